"""Shared types for the knowledge-graph backends."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Protocol

# Freebase-style machine ids: m.xxxx / g.xxxx
MID_PATTERN = re.compile(r"^(m|g)\.[0-9a-zA-Z_]+$")


class KGError(Exception):
    """Base class for knowledge-graph backend errors."""


class Direction(enum.Enum):
    """Edge orientation relative to the entity being expanded."""

    OUTGOING = "outgoing"
    INCOMING = "incoming"

    def flipped(self) -> "Direction":
        if self is Direction.OUTGOING:
            return Direction.INCOMING
        return Direction.OUTGOING


@dataclass(frozen=True)
class Triplet:
    subject: str
    relation: str
    object: str

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.subject, self.relation, self.object)


@dataclass(frozen=True)
class EntityLabel:
    entity: str
    label: str
    # True when no human-readable name was found and `label` is the raw id.
    is_fallback: bool = False


def is_mid(value: str) -> bool:
    """True for machine-id shaped strings (as opposed to literals)."""
    return bool(MID_PATTERN.match(value))


class KGBackend(Protocol):
    """What the planner needs from any knowledge-graph backend."""

    def search_relations(self, entity: str,
                         direction: Direction) -> list[str]:
        ...

    def search_entities(self, entity: str, relation: str,
                        direction: Direction) -> list[str]:
        ...

    def resolve_label(self, entity: str) -> EntityLabel:
        ...
