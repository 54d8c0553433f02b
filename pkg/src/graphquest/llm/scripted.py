"""Deterministic rule-matching backend used for tests and offline runs."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .types import (
    Completion,
    GenerationConfig,
    NoMatchingRuleError,
    Usage,
    approximate_tokens,
)


@dataclass(frozen=True)
class ResponderRule:
    """One prompt matcher; `pattern` is a substring, or a regex if flagged.

    Regex rules are compiled with DOTALL so `.*` spans the multi-line
    prompts the planner renders.
    """

    pattern: str
    response: str
    regex: bool = False

    def matches(self, prompt: str) -> bool:
        if self.regex:
            return re.search(self.pattern, prompt, re.DOTALL) is not None
        return self.pattern in prompt


class ScriptedBackend:
    """Answers each prompt with the first matching rule's response.

    A pure function of the prompt: no internal state, so call order never
    changes a response and repeated runs yield identical traces.
    """

    def __init__(self, rules: list[ResponderRule],
                 default_response: str | None = None):
        self.rules = list(rules)
        self.default_response = default_response

    @classmethod
    def from_file(cls, path: str) -> "ScriptedBackend":
        """Load rules from JSON: a list of rule objects, or an object with
        a "rules" list and optional "default" response."""
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
        if isinstance(payload, dict):
            raw_rules = payload.get("rules", [])
            default = payload.get("default")
        else:
            raw_rules = payload
            default = None
        rules = [
            ResponderRule(
                pattern=str(entry["pattern"]),
                response=str(entry["response"]),
                regex=bool(entry.get("regex", False)),
            )
            for entry in raw_rules
        ]
        return cls(rules, default_response=default)

    def complete(self, prompt: str, config: GenerationConfig) -> Completion:
        text = self._respond(prompt)
        usage = Usage(input_tokens=approximate_tokens(prompt),
                      output_tokens=approximate_tokens(text))
        return Completion(text=text, usage=usage, latency_seconds=0.0)

    def _respond(self, prompt: str) -> str:
        for rule in self.rules:
            if rule.matches(prompt):
                return rule.response
        if self.default_response is not None:
            return self.default_response
        head = prompt.strip().splitlines()[0][:120] if prompt.strip() else ""
        raise NoMatchingRuleError(
            f"no scripted rule matches prompt starting with: {head!r}"
        )
