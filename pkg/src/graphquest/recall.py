"""Candidate recall: rank entity labels by relevance to the question.

Used when an expansion returns more candidates than the planner can put
in one prompt. The default scorer is dependency-free: cosine similarity
over lowercase character-trigram multisets.
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import requests

logger = logging.getLogger(__name__)


class RecallError(ValueError):
    pass


class Scorer(Protocol):
    def score(self, question: str, label: str) -> float:
        ...


@dataclass(frozen=True)
class ScoredCandidate:
    entity: str
    label: str
    score: float


@dataclass(frozen=True)
class RecallConfig:
    # Prompts stay bounded: rank when a candidate set exceeds `threshold`
    # and keep the best `k`.
    threshold: int = 30
    k: int = 25
    scorer: str = "trigram"
    endpoint: str | None = None


def _trigrams(text: str) -> Counter:
    lowered = text.strip().lower()
    return Counter(lowered[i:i + 3] for i in range(len(lowered) - 2))


class TrigramScorer:
    """Similarity over character-trigram counts; exact match scores 1.0."""

    def score(self, question: str, label: str) -> float:
        q = question.strip()
        c = label.strip()
        if not q or not c:
            raise RecallError("cannot score empty text")
        if q.lower() == c.lower():
            return 1.0
        left = _trigrams(q)
        right = _trigrams(c)
        if not left or not right:
            return 0.0
        shared = set(left) & set(right)
        dot = sum(left[g] * right[g] for g in shared)
        norm = math.sqrt(sum(v * v for v in left.values()))
        norm *= math.sqrt(sum(v * v for v in right.values()))
        if norm == 0.0:
            return 0.0
        return dot / norm


class RemoteEmbeddingScorer:
    """Scores with cosine over embeddings fetched from an HTTP service.

    POSTs {"input": [text]} and expects {"data": [{"embedding": [...]}]}.
    Embeddings are cached per text, so each distinct string costs one
    request per process.
    """

    def __init__(self, endpoint_url: str, *,
                 session: requests.Session | None = None,
                 model: str | None = None,
                 timeout_seconds: float = 30.0,
                 max_retries: int = 3,
                 backoff_seconds: float = 1.0,
                 sleep: Callable[[float], None] = time.sleep):
        self.endpoint_url = endpoint_url
        self.session = session or requests.Session()
        self.model = model
        self.timeout_seconds = timeout_seconds
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self._sleep = sleep
        self._cache: dict[str, list[float]] = {}

    def score(self, question: str, label: str) -> float:
        q = question.strip()
        c = label.strip()
        if not q or not c:
            raise RecallError("cannot score empty text")
        left = self._embed(q)
        right = self._embed(c)
        dot = sum(a * b for a, b in zip(left, right))
        norm = math.sqrt(sum(a * a for a in left))
        norm *= math.sqrt(sum(b * b for b in right))
        if norm == 0.0:
            return 0.0
        return dot / norm

    def _embed(self, text: str) -> list[float]:
        hit = self._cache.get(text)
        if hit is not None:
            return hit
        body: dict = {"input": [text]}
        if self.model:
            body["model"] = self.model
        last_error = "no attempt made"
        for attempt in range(1, self.max_retries + 1):
            try:
                response = self.session.post(
                    self.endpoint_url, json=body,
                    timeout=self.timeout_seconds,
                )
            except requests.RequestException as exc:
                last_error = str(exc)
            else:
                if response.status_code == 200:
                    payload = response.json()
                    try:
                        vector = [float(v) for v in
                                  payload["data"][0]["embedding"]]
                    except (KeyError, IndexError, TypeError, ValueError):
                        raise RecallError(
                            "malformed embedding response") from None
                    self._cache[text] = vector
                    return vector
                last_error = f"HTTP {response.status_code}"
            if attempt < self.max_retries:
                self._sleep(self.backoff_seconds * (2 ** (attempt - 1)))
        raise RecallError(
            f"embedding endpoint {self.endpoint_url} unreachable: {last_error}")


def top_k(question: str, candidates: Sequence[tuple[str, str]], k: int,
          scorer: Scorer | None = None) -> list[ScoredCandidate]:
    """Keep the k best (entity, label) pairs for the question.

    Ordering is total and input-order independent: score descending,
    then label ascending, then entity id ascending.
    """
    if k < 1:
        raise RecallError(f"k must be >= 1, got {k}")
    active = scorer or TrigramScorer()
    scored = [
        ScoredCandidate(entity, label, active.score(question, label))
        for entity, label in candidates
    ]
    scored.sort(key=lambda c: (-c.score, c.label, c.entity))
    return scored[:k]
