"""Aggregate model-call cost out of a run trace."""

from __future__ import annotations

from ..trace import RunTrace
from .types import Usage


def usage_total(trace: RunTrace) -> tuple[Usage, int]:
    """Sum usage over every llm_call event; returns (usage, call count)."""
    total = Usage()
    calls = 0
    for event in trace.iter_kind("llm_call"):
        calls += 1
        if event.usage is not None:
            total = total + event.usage
    return total, calls
