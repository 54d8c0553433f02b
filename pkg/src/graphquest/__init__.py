"""graphquest: self-correcting knowledge-graph reasoning for LLM QA.

An engine that answers natural-language questions by exploring a
knowledge graph one hop at a time under language-model guidance, keeps
everything it has seen in an explicit memory, and backtracks to earlier
entities when the evidence it gathered cannot answer the question.
"""

from .planner.engine import Backends, Planner, PlannerRunError, run_question
from .planner.state import (
    AblationFlags,
    PlannerConfig,
    Question,
    Verdict,
)
from .trace import RunTrace

__version__ = "0.1.0"

__all__ = [
    "AblationFlags",
    "Backends",
    "Planner",
    "PlannerConfig",
    "PlannerRunError",
    "Question",
    "RunTrace",
    "Verdict",
    "run_question",
    "__version__",
]
