"""Planning engine: state types and the iterative reasoning loop."""

from .engine import (
    Backends,
    INSUFFICIENT_ANSWERS,
    PendingExpansion,
    Planner,
    PlannerRunError,
    RunResult,
    run_question,
)
from .state import (
    AblationFlags,
    Frontier,
    Memory,
    PathStep,
    PlannerConfig,
    Question,
    ReasoningPath,
    ReflectionDecision,
    StateError,
    SubObjectiveStatus,
    SubObjectives,
    Subgraph,
    Verdict,
)

__all__ = [
    "AblationFlags",
    "Backends",
    "Frontier",
    "INSUFFICIENT_ANSWERS",
    "Memory",
    "PathStep",
    "PendingExpansion",
    "Planner",
    "PlannerConfig",
    "PlannerRunError",
    "Question",
    "ReasoningPath",
    "ReflectionDecision",
    "RunResult",
    "StateError",
    "SubObjectiveStatus",
    "SubObjectives",
    "Subgraph",
    "Verdict",
    "run_question",
]
