"""Chat-completions HTTP backend (OpenAI-compatible endpoints)."""

from __future__ import annotations

import logging
import os
import time
from typing import Callable

import requests

from .types import (
    Completion,
    GenerationConfig,
    TransportError,
    Usage,
    approximate_tokens,
)

logger = logging.getLogger(__name__)

API_KEY_ENV_VARS = ("GRAPHQUEST_API_KEY", "OPENAI_API_KEY")
RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


def _api_key_from_env() -> str | None:
    # Credentials come from the environment only; never from files or flags.
    for name in API_KEY_ENV_VARS:
        value = os.environ.get(name)
        if value:
            return value
    return None


class ChatCompletionsBackend:
    def __init__(self, base_url: str, *,
                 session: requests.Session | None = None,
                 max_retries: int = 3,
                 backoff_seconds: float = 1.0,
                 timeout_seconds: float = 60.0,
                 sleep: Callable[[float], None] = time.sleep):
        base = base_url.rstrip("/")
        if not base.endswith("/chat/completions"):
            base = base + "/chat/completions"
        self.url = base
        self.session = session or requests.Session()
        self.max_retries = max_retries
        self.backoff_seconds = backoff_seconds
        self.timeout_seconds = timeout_seconds
        self._sleep = sleep

    def complete(self, prompt: str, config: GenerationConfig) -> Completion:
        body = {
            "model": config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": config.temperature,
            "max_tokens": config.max_tokens,
            "frequency_penalty": config.frequency_penalty,
            "presence_penalty": config.presence_penalty,
        }
        headers = {"Content-Type": "application/json"}
        key = _api_key_from_env()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        started = time.perf_counter()
        payload = self._post(body, headers)
        latency = time.perf_counter() - started
        try:
            text = payload["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            raise TransportError(
                f"malformed chat response from {self.url}") from None
        usage = payload.get("usage") or {}
        input_tokens = usage.get("prompt_tokens")
        output_tokens = usage.get("completion_tokens")
        if input_tokens is None:
            input_tokens = approximate_tokens(prompt)
        if output_tokens is None:
            output_tokens = approximate_tokens(text)
        return Completion(
            text=text,
            usage=Usage(int(input_tokens), int(output_tokens)),
            latency_seconds=latency,
        )

    def _post(self, body: dict, headers: dict) -> dict:
        last_error = "no attempt made"
        for attempt in range(1, self.max_retries + 1):
            try:
                response = self.session.post(
                    self.url, json=body, headers=headers,
                    timeout=self.timeout_seconds,
                )
            except requests.RequestException as exc:
                last_error = str(exc)
            else:
                if response.status_code == 200:
                    return response.json()
                last_error = f"HTTP {response.status_code}"
                if response.status_code not in RETRYABLE_STATUS:
                    raise TransportError(
                        f"chat request to {self.url} failed: {last_error}")
            if attempt < self.max_retries:
                delay = self.backoff_seconds * (2 ** (attempt - 1))
                logger.warning("chat attempt %d failed (%s); retrying in %.1fs",
                               attempt, last_error, delay)
                self._sleep(delay)
        raise TransportError(
            f"chat endpoint {self.url} unreachable after "
            f"{self.max_retries} attempts: {last_error}")
