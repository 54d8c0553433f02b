"""Run traces: an append-only event log persisted as JSON Lines.

Events carry no wall-clock timestamps; elapsed time lives only in the
final event's payload, so two runs of the same scripted configuration
serialize byte-identically except for that one field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

from .llm.types import Usage

EVENT_KINDS = frozenset({
    "kg_query",
    "llm_call",
    "selection",
    "memory_update",
    "verdict",
    "reflection",
    "final",
})


class TraceError(ValueError):
    pass


@dataclass
class TraceEvent:
    seq: int
    kind: str
    iteration: int
    payload: dict
    usage: Usage | None = None

    def to_json(self) -> str:
        record: dict = {
            "seq": self.seq,
            "kind": self.kind,
            "iteration": self.iteration,
            "payload": self.payload,
        }
        if self.usage is not None:
            record["usage"] = {
                "input_tokens": self.usage.input_tokens,
                "output_tokens": self.usage.output_tokens,
            }
        return json.dumps(record, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "TraceEvent":
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"bad trace line: {exc}") from exc
        usage = None
        if "usage" in record:
            usage = Usage(int(record["usage"]["input_tokens"]),
                          int(record["usage"]["output_tokens"]))
        return cls(
            seq=int(record["seq"]),
            kind=str(record["kind"]),
            iteration=int(record["iteration"]),
            payload=dict(record["payload"]),
            usage=usage,
        )


@dataclass
class RunTrace:
    events: list[TraceEvent] = field(default_factory=list)

    def record(self, kind: str, iteration: int, payload: dict,
               usage: Usage | None = None) -> TraceEvent:
        if kind not in EVENT_KINDS:
            raise TraceError(f"unknown trace event kind {kind!r}")
        event = TraceEvent(
            seq=len(self.events),
            kind=kind,
            iteration=iteration,
            payload=payload,
            usage=usage,
        )
        self.events.append(event)
        return event

    def iter_kind(self, kind: str) -> Iterator[TraceEvent]:
        return (event for event in self.events if event.kind == kind)

    def final_event(self) -> TraceEvent | None:
        for event in reversed(self.events):
            if event.kind == "final":
                return event
        return None

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for event in self.events:
                handle.write(event.to_json())
                handle.write("\n")

    @classmethod
    def load(cls, path: str) -> "RunTrace":
        events = []
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    events.append(TraceEvent.from_json(line))
        return cls(events=events)
