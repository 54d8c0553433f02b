"""Tolerant extraction of structured payloads from model output.

Model responses wrap the payload in prose, code fences, or single-quoted
pseudo-JSON. These parsers locate the first balanced bracketed span,
then decode it with a JSON -> Python-literal -> manual-split fallback
chain. All failures raise typed ParseError subclasses; no input aborts
the process.
"""

from __future__ import annotations

import ast
import json
import re

_FENCE = re.compile(r"```[a-zA-Z0-9_-]*")
_TRAILING_COMMA = re.compile(r",\s*([}\]])")

TRUE_WORDS = frozenset({"yes", "true", "y", "1"})
FALSE_WORDS = frozenset({"no", "false", "n", "0"})


class ParseError(ValueError):
    """Base class for structured-output parsing failures."""


class NoListFoundError(ParseError):
    def __init__(self) -> None:
        super().__init__("no bracketed list found in response")


class UnbalancedBracketsError(ParseError):
    def __init__(self) -> None:
        super().__init__("bracketed list is never closed")


class NoObjectFoundError(ParseError):
    def __init__(self) -> None:
        super().__init__("no JSON object found in response")


class MalformedJsonError(ParseError):
    def __init__(self, detail: str):
        super().__init__(f"object span could not be decoded: {detail}")


class MissingRequiredKeyError(ParseError):
    def __init__(self, key: str, present: tuple[str, ...]):
        super().__init__(
            f"response object lacks required key {key!r} (present: {list(present)})"
        )
        self.key = key
        self.present = present


def strip_code_fences(text: str) -> str:
    """Drop markdown fence markers, keeping whatever they wrapped."""
    return _FENCE.sub("", text)


def _is_value_position(text: str, index: int) -> bool:
    # A quote only starts a string when it sits where a value may begin;
    # this keeps apostrophes in prose ("don't") from opening a string.
    for j in range(index - 1, -1, -1):
        ch = text[j]
        if ch.isspace():
            continue
        return ch in "[{(,:"
    return True


def _balanced_span(text: str, start: int, open_ch: str, close_ch: str) -> str | None:
    depth = 0
    quote: str | None = None
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if quote is not None:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == quote:
                quote = None
            continue
        if ch in "\"'":
            if _is_value_position(text, i):
                quote = ch
            continue
        if ch == open_ch:
            depth += 1
        elif ch == close_ch:
            depth -= 1
            if depth == 0:
                return text[start:i + 1]
    return None


def _decode_span(span: str):
    try:
        return json.loads(span)
    except (json.JSONDecodeError, ValueError):
        pass
    try:
        return ast.literal_eval(span)
    except (ValueError, SyntaxError, MemoryError, RecursionError):
        pass
    try:
        return json.loads(_TRAILING_COMMA.sub(r"\1", span))
    except (json.JSONDecodeError, ValueError):
        return None


def _split_items(inner: str) -> list[str]:
    items: list[str] = []
    buffer: list[str] = []
    depth = 0
    quote: str | None = None
    escaped = False
    for ch in inner:
        if quote is not None:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == quote:
                quote = None
            buffer.append(ch)
            continue
        if ch == '"' or (ch == "'" and not buffer):
            quote = ch
            buffer.append(ch)
        elif ch in "[{(":
            depth += 1
            buffer.append(ch)
        elif ch in ")}]":
            depth -= 1
            buffer.append(ch)
        elif ch == "," and depth == 0:
            items.append("".join(buffer))
            buffer = []
        else:
            buffer.append(ch)
    items.append("".join(buffer))
    return items


def _clean_item(item: str) -> str:
    item = item.strip()
    if len(item) >= 2 and item[0] == item[-1] and item[0] in "\"'":
        item = item[1:-1].replace("\\" + item[0], item[0])
    return item.strip()


def parse_list(text: str) -> list[str]:
    """Extract the first bracketed list from the response as strings."""
    cleaned = strip_code_fences(text)
    start = cleaned.find("[")
    if start == -1:
        raise NoListFoundError()
    span = _balanced_span(cleaned, start, "[", "]")
    if span is None:
        raise UnbalancedBracketsError()
    decoded = _decode_span(span)
    if isinstance(decoded, (list, tuple)):
        items = [str(x).strip() for x in decoded]
    else:
        items = [_clean_item(piece) for piece in _split_items(span[1:-1])]
    return [item for item in items if item]


def extract_json_object(text: str) -> dict:
    """Extract the first balanced JSON object; no key requirements."""
    cleaned = strip_code_fences(text)
    start = cleaned.find("{")
    if start == -1:
        raise NoObjectFoundError()
    span = _balanced_span(cleaned, start, "{", "}")
    if span is None:
        raise MalformedJsonError("object span is never closed")
    decoded = _decode_span(span)
    if not isinstance(decoded, dict):
        raise MalformedJsonError("span did not decode to an object")
    return {str(key): value for key, value in decoded.items()}


def parse_json_object(text: str, required_keys: set[str]) -> dict:
    """Extract a JSON object and require the given keys (case-sensitive)."""
    if not required_keys:
        raise ValueError("required_keys must be non-empty")
    data = extract_json_object(text)
    for key in sorted(required_keys):
        if key not in data:
            raise MissingRequiredKeyError(key, tuple(data))
    return data


def normalize_bool(value: object) -> bool | None:
    """Map yes/no-style values to booleans; None when unrecognizable."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        if value == 1:
            return True
        if value == 0:
            return False
        return None
    if isinstance(value, str):
        word = value.strip().lower().rstrip(".!")
        if word in TRUE_WORDS:
            return True
        if word in FALSE_WORDS:
            return False
    return None
