"""Knowledge-graph backend speaking SPARQL over HTTP."""

from __future__ import annotations

import logging
import threading
import time
from typing import Callable

import requests

from .queries import render_sparql
from .types import Direction, EntityLabel, KGError

logger = logging.getLogger(__name__)

SPARQL_MIME = "application/sparql-query"
RESULTS_MIME = "application/sparql-results+json"
RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class BackendUnreachableError(KGError):
    def __init__(self, endpoint: str, attempts: int, last_error: str):
        super().__init__(
            f"SPARQL endpoint {endpoint} unreachable after {attempts} "
            f"attempts: {last_error}"
        )
        self.endpoint = endpoint
        self.attempts = attempts


class SparqlKG:
    """Remote triple store client with a per-instance query cache.

    The cache is keyed on the rendered query text, so repeated expansions
    of the same entity cost one round trip per process. A session and a
    sleep function can be injected for testing.
    """

    def __init__(self, endpoint_url: str, *,
                 session: requests.Session | None = None,
                 max_retries: int = 3,
                 backoff_seconds: float = 1.0,
                 timeout_seconds: float = 30.0,
                 sleep: Callable[[float], None] = time.sleep):
        self.endpoint_url = endpoint_url
        self.session = session or requests.Session()
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self.timeout_seconds = timeout_seconds
        self._sleep = sleep
        self._cache: dict[str, list[str]] = {}
        self._lock = threading.Lock()

    # -- queries ---------------------------------------------------------

    def search_relations(self, entity: str, direction: Direction) -> list[str]:
        template = ("relation-out" if direction is Direction.OUTGOING
                    else "relation-in")
        query = render_sparql(template, mid=entity)
        return self._cached(query, "relation")

    def search_entities(self, entity: str, relation: str,
                        direction: Direction) -> list[str]:
        template = ("entity-out" if direction is Direction.OUTGOING
                    else "entity-in")
        query = render_sparql(template, mid=entity, relation=relation)
        return self._cached(query, "tailEntity")

    def resolve_label(self, entity: str) -> EntityLabel:
        query = render_sparql("name", mid=entity)
        values = self._cached(query, "tailEntity")
        if values:
            return EntityLabel(entity, values[0])
        return EntityLabel(entity, entity, is_fallback=True)

    # -- transport -------------------------------------------------------

    def _cached(self, query: str, variable: str) -> list[str]:
        with self._lock:
            hit = self._cache.get(query)
        if hit is not None:
            return list(hit)
        values = self._execute(query, variable)
        with self._lock:
            self._cache[query] = values
        return list(values)

    def _execute(self, query: str, variable: str) -> list[str]:
        last_error = "no attempt made"
        for attempt in range(1, self.max_retries + 1):
            try:
                response = self.session.post(
                    self.endpoint_url,
                    data=query.encode("utf-8"),
                    headers={"Content-Type": SPARQL_MIME,
                             "Accept": RESULTS_MIME},
                    timeout=self.timeout_seconds,
                )
            except requests.RequestException as exc:
                last_error = str(exc)
            else:
                if response.status_code == 200:
                    return self._parse(response.json(), variable)
                last_error = f"HTTP {response.status_code}"
                if response.status_code not in RETRYABLE_STATUS:
                    raise BackendUnreachableError(
                        self.endpoint_url, attempt, last_error)
            if attempt < self.max_retries:
                delay = self.backoff_seconds * (2 ** (attempt - 1))
                logger.warning("SPARQL attempt %d failed (%s); retrying in %.1fs",
                               attempt, last_error, delay)
                self._sleep(delay)
        raise BackendUnreachableError(
            self.endpoint_url, self.max_retries, last_error)

    @staticmethod
    def _parse(payload: dict, variable: str) -> list[str]:
        try:
            bindings = payload["results"]["bindings"]
        except (KeyError, TypeError):
            raise KGError("malformed SPARQL results payload") from None
        values = set()
        for binding in bindings:
            entry = binding.get(variable)
            if entry is None:
                continue
            value = entry.get("value", "")
            if value.startswith("http://rdf.freebase.com/ns/"):
                value = value[len("http://rdf.freebase.com/ns/"):]
            if value:
                values.add(value)
        return sorted(values)
