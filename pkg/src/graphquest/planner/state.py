"""State carried across planning iterations."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..kg.types import Direction, Triplet
from ..llm.types import GenerationConfig
from ..recall import RecallConfig


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class Question:
    text: str
    # (entity id, human-readable label) pairs
    topic_entities: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise StateError("question text is empty")
        if not self.topic_entities:
            raise StateError("question has no topic entities")


@dataclass(frozen=True)
class SubObjectives:
    items: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.items:
            raise StateError("sub-objective list is empty")


@dataclass
class SubObjectiveStatus:
    """Per-sub-objective progress notes; always one entry per objective."""

    entries: list[str]

    @classmethod
    def initial(cls, count: int) -> "SubObjectiveStatus":
        return cls(["unknown"] * count)


@dataclass(frozen=True)
class PathStep:
    """One traversed edge, stored in KG orientation.

    `direction` is relative to the entity the path stepped from:
    outgoing means the path entered at `subject` and left at `object`,
    incoming the reverse.
    """

    subject: str
    relation: str
    object: str
    direction: Direction

    @property
    def source(self) -> str:
        return (self.subject if self.direction is Direction.OUTGOING
                else self.object)

    @property
    def target(self) -> str:
        return (self.object if self.direction is Direction.OUTGOING
                else self.subject)

    def as_triplet(self) -> Triplet:
        return Triplet(self.subject, self.relation, self.object)


@dataclass(frozen=True)
class ReasoningPath:
    origin: str
    steps: tuple[PathStep, ...] = ()

    def key(self) -> tuple:
        return (self.origin, self.steps)

    def entities(self) -> tuple[str, ...]:
        visited = [self.origin]
        for step in self.steps:
            visited.append(step.target)
        return tuple(visited)

    def tail_entity(self) -> str:
        if self.steps:
            return self.steps[-1].target
        return self.origin

    def extended(self, step: PathStep) -> "ReasoningPath":
        return ReasoningPath(self.origin, self.steps + (step,))

    def validate(self, max_length: int | None = None) -> None:
        """Raise StateError unless linked, acyclic, and within bounds."""
        at = self.origin
        for index, step in enumerate(self.steps):
            if step.source != at:
                raise StateError(
                    f"step {index} starts at {step.source!r}, path is at {at!r}"
                )
            at = step.target
        visited = self.entities()
        if len(set(visited)) != len(visited):
            raise StateError(f"path revisits an entity: {visited}")
        if max_length is not None and len(self.steps) > max_length:
            raise StateError(
                f"path has {len(self.steps)} steps, cap is {max_length}"
            )


@dataclass
class Subgraph:
    """Everything retrieved so far, plus which pairs were expanded."""

    relation_edges: set[tuple[str, str, Direction]] = field(default_factory=set)
    triples: set[Triplet] = field(default_factory=set)
    expanded: set[tuple[str, str, Direction]] = field(default_factory=set)

    def size_summary(self) -> dict[str, int]:
        return {
            "relation_edges": len(self.relation_edges),
            "triples": len(self.triples),
            "expanded": len(self.expanded),
        }


@dataclass
class Memory:
    subgraph: Subgraph
    paths: list[ReasoningPath]
    status: SubObjectiveStatus


@dataclass
class Frontier:
    iteration: int
    # (entity id, label) pairs still to be expanded this iteration
    tail_entities: list[tuple[str, str]]
    # (relation, direction) pairs chosen in the current iteration
    tail_relations: list[tuple[str, Direction]]
    # id -> label over every candidate seen so far (topic entities included)
    candidate_pool: dict[str, str]


@dataclass(frozen=True)
class Verdict:
    sufficient: bool
    answer: str | None
    reason: str
    forced: bool = False

    def __post_init__(self) -> None:
        # Only a forced (exhaustion) verdict may carry a hedged answer.
        if not self.forced and self.sufficient == (self.answer is None):
            raise StateError(
                "verdict must carry an answer exactly when sufficient"
            )


@dataclass(frozen=True)
class ReflectionDecision:
    add: bool
    reason: str
    backtrack_entities: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.add and self.backtrack_entities:
            raise StateError("backtrack entities present without add=true")


@dataclass(frozen=True)
class AblationFlags:
    no_guidance: bool = False
    no_memory: bool = False
    no_reflection: bool = False
    # None = adaptive breadth; N caps relations per entity and entities
    # per iteration.
    fixed_breadth: int | None = None

    def __post_init__(self) -> None:
        if self.fixed_breadth is not None and self.fixed_breadth < 1:
            raise StateError(
                f"fixed_breadth must be >= 1, got {self.fixed_breadth}"
            )

    def active(self) -> tuple[str, ...]:
        names = []
        if self.no_guidance:
            names.append("no_guidance")
        if self.no_memory:
            names.append("no_memory")
        if self.no_reflection:
            names.append("no_reflection")
        if self.fixed_breadth is not None:
            names.append(f"fixed_breadth={self.fixed_breadth}")
        return tuple(names)


@dataclass(frozen=True)
class PlannerConfig:
    max_depth: int = 4
    ablations: AblationFlags = field(default_factory=AblationFlags)
    generation: "GenerationConfig" = None  # type: ignore[assignment]
    recall: "RecallConfig" = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise StateError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.generation is None:
            object.__setattr__(self, "generation", GenerationConfig())
        if self.recall is None:
            object.__setattr__(self, "recall", RecallConfig())
