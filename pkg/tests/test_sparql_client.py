import json

import pytest
import requests

from graphquest.kg.sparql_client import BackendUnreachableError, SparqlKG
from graphquest.kg.types import Direction, KGError

ENDPOINT = "http://kg.invalid:8890/sparql"


class FakeResponse:
    def __init__(self, status_code, payload=None):
        self.status_code = status_code
        self._payload = payload or {}

    def json(self):
        return self._payload


def results_payload(variable, values):
    return {
        "results": {
            "bindings": [
                {variable: {"type": "uri",
                            "value": f"http://rdf.freebase.com/ns/{v}"}}
                for v in values
            ]
        }
    }


class FakeSession:
    """Scripted HTTP session: pops one canned outcome per request."""

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.requests = []

    def post(self, url, *, data, headers, timeout):
        self.requests.append({"url": url, "data": data, "headers": headers,
                              "timeout": timeout})
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def make_client(outcomes, **kwargs):
    session = FakeSession(outcomes)
    sleeps = []
    client = SparqlKG(ENDPOINT, session=session, sleep=sleeps.append, **kwargs)
    return client, session, sleeps


class TestTransport:
    def test_posts_raw_query_with_sparql_headers(self):
        payload = results_payload("relation", ["location.country.capital"])
        client, session, _ = make_client([FakeResponse(200, payload)])
        got = client.search_relations("m.05qtj", Direction.OUTGOING)
        assert got == ["location.country.capital"]
        sent = session.requests[0]
        assert sent["url"] == ENDPOINT
        assert sent["headers"]["Content-Type"] == "application/sparql-query"
        assert sent["headers"]["Accept"] == "application/sparql-results+json"
        body = sent["data"].decode("utf-8")
        assert "ns:m.05qtj ?relation ?x ." in body

    def test_entity_query_direction_controls_template(self):
        payload = results_payload("tailEntity", ["m.0fsmy2"])
        client, session, _ = make_client([FakeResponse(200, payload),
                                          FakeResponse(200, payload)])
        client.search_entities("m.05qtj", "location.country.capital",
                               Direction.OUTGOING)
        client.search_entities("m.05qtj", "location.country.capital",
                               Direction.INCOMING)
        first = session.requests[0]["data"].decode("utf-8")
        second = session.requests[1]["data"].decode("utf-8")
        assert "ns:m.05qtj ns:location.country.capital ?tailEntity ." in first
        assert "?tailEntity ns:location.country.capital ns:m.05qtj ." in second

    def test_results_are_deduped_sorted_and_ns_stripped(self):
        payload = {
            "results": {"bindings": [
                {"relation": {"value": "http://rdf.freebase.com/ns/b.rel"}},
                {"relation": {"value": "http://rdf.freebase.com/ns/a.rel"}},
                {"relation": {"value": "http://rdf.freebase.com/ns/b.rel"}},
                {"other": {"value": "ignored"}},
            ]}
        }
        client, _, _ = make_client([FakeResponse(200, payload)])
        assert client.search_relations("m.0x", Direction.INCOMING) == \
            ["a.rel", "b.rel"]

    def test_malformed_payload_raises(self):
        client, _, _ = make_client([FakeResponse(200, {"weird": True})])
        with pytest.raises(KGError):
            client.search_relations("m.0x", Direction.OUTGOING)


class TestCache:
    def test_identical_query_hits_cache(self):
        payload = results_payload("relation", ["a.rel"])
        client, session, _ = make_client([FakeResponse(200, payload)])
        first = client.search_relations("m.05qtj", Direction.OUTGOING)
        second = client.search_relations("m.05qtj", Direction.OUTGOING)
        assert first == second == ["a.rel"]
        assert len(session.requests) == 1

    def test_cache_returns_copies(self):
        payload = results_payload("relation", ["a.rel"])
        client, _, _ = make_client([FakeResponse(200, payload)])
        first = client.search_relations("m.05qtj", Direction.OUTGOING)
        first.append("mutated")
        assert client.search_relations("m.05qtj",
                                       Direction.OUTGOING) == ["a.rel"]

    def test_different_direction_is_a_different_key(self):
        payload = results_payload("relation", ["a.rel"])
        client, session, _ = make_client([FakeResponse(200, payload),
                                          FakeResponse(200, payload)])
        client.search_relations("m.05qtj", Direction.OUTGOING)
        client.search_relations("m.05qtj", Direction.INCOMING)
        assert len(session.requests) == 2


class TestRetries:
    def test_retryable_statuses_back_off_exponentially(self):
        payload = results_payload("relation", ["a.rel"])
        client, session, sleeps = make_client(
            [FakeResponse(503), FakeResponse(429), FakeResponse(200, payload)],
            backoff_seconds=0.5,
        )
        assert client.search_relations("m.0x", Direction.OUTGOING) == ["a.rel"]
        assert len(session.requests) == 3
        assert sleeps == [0.5, 1.0]  # 0.5 * 2^0, 0.5 * 2^1

    def test_connection_errors_are_retried(self):
        payload = results_payload("relation", ["a.rel"])
        client, session, sleeps = make_client(
            [requests.ConnectionError("boom"), FakeResponse(200, payload)])
        assert client.search_relations("m.0x", Direction.OUTGOING) == ["a.rel"]
        assert len(sleeps) == 1

    def test_exhausted_retries_raise_with_attempt_count(self):
        client, _, _ = make_client(
            [FakeResponse(500), FakeResponse(500), FakeResponse(500)])
        with pytest.raises(BackendUnreachableError) as info:
            client.search_relations("m.0x", Direction.OUTGOING)
        assert info.value.attempts == 3
        assert "HTTP 500" in str(info.value)

    def test_client_error_fails_fast(self):
        client, session, sleeps = make_client([FakeResponse(400)])
        with pytest.raises(BackendUnreachableError) as info:
            client.search_relations("m.0x", Direction.OUTGOING)
        assert info.value.attempts == 1
        assert len(session.requests) == 1
        assert sleeps == []


class TestLabels:
    def test_resolve_label_uses_first_value(self):
        payload = results_payload("tailEntity", ["Panama"])
        client, session, _ = make_client([FakeResponse(200, payload)])
        label = client.resolve_label("m.05qtj")
        assert label.label == "Panama"
        assert label.is_fallback is False
        body = session.requests[0]["data"].decode("utf-8")
        assert "owl#sameAs" in body and "FILTER(?entity = ns:m.05qtj)" in body

    def test_resolve_label_falls_back_to_id(self):
        payload = {"results": {"bindings": []}}
        client, _, _ = make_client([FakeResponse(200, payload)])
        label = client.resolve_label("m.0mystery")
        assert label.label == "m.0mystery"
        assert label.is_fallback is True

    def test_payload_round_trips_as_json(self):
        # canned payloads in these tests mirror the concrete wire format
        payload = results_payload("tailEntity", ["m.0fsmy2"])
        assert json.loads(json.dumps(payload)) == payload
