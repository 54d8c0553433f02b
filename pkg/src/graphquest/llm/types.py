"""Core types for language-model backends."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol


class LLMError(Exception):
    """Base class for language-model backend errors."""


class TransportError(LLMError):
    """The backend could not be reached or kept failing after retries."""


class NoMatchingRuleError(LLMError):
    """A scripted backend received a prompt no rule matches."""


@dataclass(frozen=True)
class GenerationConfig:
    """Decoding parameters sent with every completion request."""

    model: str = "gpt-3.5-turbo"
    temperature: float = 0.3
    max_tokens: int = 1024
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0


@dataclass(frozen=True)
class Usage:
    input_tokens: int = 0
    output_tokens: int = 0

    @property
    def total_tokens(self) -> int:
        return self.input_tokens + self.output_tokens

    def __add__(self, other: "Usage") -> "Usage":
        return Usage(self.input_tokens + other.input_tokens,
                     self.output_tokens + other.output_tokens)


@dataclass(frozen=True)
class Completion:
    text: str
    usage: Usage = field(default_factory=Usage)
    latency_seconds: float = 0.0


class CompletionBackend(Protocol):
    def complete(self, prompt: str, config: GenerationConfig) -> Completion:
        ...


def approximate_tokens(text: str) -> int:
    """Character-count token estimate used when a backend reports none."""
    return math.ceil(len(text) / 4)
