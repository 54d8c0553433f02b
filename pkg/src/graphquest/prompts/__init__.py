"""Prompt template registry backed by text assets."""

from .registry import (
    MissingSlotError,
    PromptAssetError,
    PromptError,
    PromptLibrary,
    PromptTemplate,
    TEMPLATE_SLOTS,
    UnknownPromptError,
)

__all__ = [
    "MissingSlotError",
    "PromptAssetError",
    "PromptError",
    "PromptLibrary",
    "PromptTemplate",
    "TEMPLATE_SLOTS",
    "UnknownPromptError",
]
