"""Four-stage salvage of model JSON responses.

Stages, in order:

1. strict parse of the whole text
2. extraction of the first balanced top-level JSON object
3. strip of code-fence markers, then re-parse of the fenced body
4. repair of trailing commas and unescaped newlines inside strings, then
   re-parse

The first stage whose candidate both parses and validates against the
kind's schema wins, and its index is recorded on the output; later stages
are never consulted. If all four fail, ParseFailure carries the per-stage
diagnostics so the retry prompt can include them.
"""

from __future__ import annotations

import json
import re
from typing import Optional

from ..errors import ParseFailure, SchemaViolation, VocabularyViolation
from .kinds import CognitiveOutput, PrimitiveKind, split_flat_object, validate_payload

_FENCE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n(.*?)```", re.DOTALL)
_TRAILING_COMMA = re.compile(r",(\s*[}\]])")


def _first_balanced_object(text: str) -> Optional[str]:
    start = text.find("{")
    if start < 0:
        return None
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def _fence_body(text: str) -> Optional[str]:
    match = _FENCE.search(text)
    return match.group(1) if match else None


def _escape_newlines_in_strings(text: str) -> str:
    out = []
    in_string = False
    escaped = False
    for ch in text:
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            elif ch == "\n":
                out.append("\\n")
                continue
            elif ch == "\r":
                continue
        elif ch == '"':
            in_string = True
        out.append(ch)
    return "".join(out)


def _repair(text: str) -> str:
    candidate = _fence_body(text) or _first_balanced_object(text) or text
    candidate = _escape_newlines_in_strings(candidate)
    return _TRAILING_COMMA.sub(r"\1", candidate)


def _stage_candidates(raw: str):
    yield 1, "strict parse", lambda: raw
    yield 2, "balanced object extraction", lambda: _first_balanced_object(raw)
    yield 3, "code fence strip", lambda: _fence_body(raw)
    yield 4, "comma and newline repair", lambda: _repair(raw)


def parse_output(kind: PrimitiveKind, raw: str, domain=None) -> CognitiveOutput:
    """Parse a raw model response into a validated CognitiveOutput."""
    if not raw or not raw.strip():
        raise ParseFailure(["empty response"])

    diagnostics: list[str] = []
    for stage, label, produce in _stage_candidates(raw):
        candidate = produce()
        if candidate is None:
            diagnostics.append(f"stage {stage} ({label}): no candidate found")
            continue
        try:
            obj = json.loads(candidate)
        except json.JSONDecodeError as exc:
            diagnostics.append(f"stage {stage} ({label}): invalid JSON: {exc.msg}")
            continue
        try:
            base, payload = split_flat_object(kind, obj)
            typed = validate_payload(kind, payload, domain)
        except (SchemaViolation, VocabularyViolation) as exc:
            diagnostics.append(f"stage {stage} ({label}): schema: {exc}")
            continue
        return CognitiveOutput(
            kind=kind,
            payload=typed,
            confidence=base["confidence"],
            reasoning_quality=base["reasoning_quality"],
            outcome_certainty=base["outcome_certainty"],
            citations=base["citations"],
            raw_text=raw,
            salvage_stage=stage,
        )
    raise ParseFailure(diagnostics)
