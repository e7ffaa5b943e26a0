"""Pre-execution guardrails, PII redaction, and the runtime kill switch.

The guardrail pass is a deterministic regex scan over every free-text case
field; patterns ship in the domain configuration. Critical findings are
recorded into the epistemic record so the governance rubric can force HOLD.
Redaction replaces PII with stable tokens and keeps a per-instance map so an
authorized reviewer can de-redact.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from typing import Optional

TOKEN_OPEN = "⟨"   # mathematical angle brackets; survive round-trips
TOKEN_CLOSE = "⟩"
_TOKEN_RE = re.compile(r"⟨PII:[a-z_]+:\d+⟩")


@dataclass(frozen=True)
class GuardrailPattern:
    pattern_id: str
    category: str  # prompt_injection | force_approval | classification_manipulation
    severity: str  # critical | warning
    regex: str


@dataclass(frozen=True)
class GuardrailFinding:
    pattern_id: str
    category: str
    severity: str
    field: str
    start: int
    end: int
    excerpt: str

    def to_content(self) -> dict:
        return {
            "pattern_id": self.pattern_id,
            "category": self.category,
            "severity": self.severity,
            "field": self.field,
            "start": self.start,
            "end": self.end,
            "excerpt": self.excerpt,
        }


def _text_fields(value, path: str = "") -> list[tuple[str, str]]:
    if isinstance(value, str):
        return [(path or "$", value)]
    if isinstance(value, dict):
        fields = []
        for key, item in sorted(value.items()):
            fields.extend(_text_fields(item, f"{path}.{key}" if path else key))
        return fields
    if isinstance(value, list):
        fields = []
        for i, item in enumerate(value):
            fields.extend(_text_fields(item, f"{path}[{i}]"))
        return fields
    return []


def scan(case_fields: dict, patterns: list[GuardrailPattern]) -> list[GuardrailFinding]:
    """Deterministic pattern pass over all free-text case fields."""
    findings = []
    for path, text in _text_fields(case_fields):
        for pattern in patterns:
            for match in re.finditer(pattern.regex, text, re.IGNORECASE):
                findings.append(
                    GuardrailFinding(
                        pattern_id=pattern.pattern_id,
                        category=pattern.category,
                        severity=pattern.severity,
                        field=path,
                        start=match.start(),
                        end=match.end(),
                        excerpt=match.group()[:120],
                    )
                )
    return findings


@dataclass(frozen=True)
class PiiRule:
    category: str
    regex: str


@dataclass
class RedactionMap:
    scope: str  # instance id
    tokens: dict = field(default_factory=dict)  # token -> original

    def restore(self, text: str) -> str:
        for token, original in self.tokens.items():
            text = text.replace(token, original)
        return text


def redact(
    text: str,
    policy: list[PiiRule],
    existing: Optional[RedactionMap] = None,
    scope: str = "",
) -> tuple[str, RedactionMap]:
    """Replace PII with stable tokens; idempotent on already-redacted text.

    The same original value always maps to the same token within a scope.
    """
    rmap = existing if existing is not None else RedactionMap(scope=scope)
    by_original = {v: k for k, v in rmap.tokens.items()}
    counters: dict[str, int] = {}
    for token in rmap.tokens:
        category = token[1:-1].split(":")[1]
        counters[category] = counters.get(category, 0) + 1

    for rule in policy:
        def _replace(match: re.Match) -> str:
            original = match.group()
            if _TOKEN_RE.fullmatch(original):
                return original
            if original in by_original:
                return by_original[original]
            counters[rule.category] = counters.get(rule.category, 0) + 1
            token = f"{TOKEN_OPEN}PII:{rule.category}:{counters[rule.category]}{TOKEN_CLOSE}"
            rmap.tokens[token] = original
            by_original[original] = token
            return token

        text = re.sub(rule.regex, _replace, text)
    return text, rmap


def redact_fields(
    value, policy: list[PiiRule], rmap: RedactionMap, skip_keys: frozenset = frozenset()
):
    """Recursively redact every string field of a case structure."""
    if isinstance(value, str):
        redacted, _ = redact(value, policy, existing=rmap)
        return redacted
    if isinstance(value, dict):
        return {
            k: (v if k in skip_keys else redact_fields(v, policy, rmap, skip_keys))
            for k, v in value.items()
        }
    if isinstance(value, list):
        return [redact_fields(v, policy, rmap, skip_keys) for v in value]
    return value


@dataclass
class Halted:
    reason: str
    scope: str


class KillSwitch:
    """Global / domain / instance halt flags; reads are lock-protected."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._global: Optional[str] = None
        self._domains: dict[str, str] = {}
        self._instances: dict[str, str] = {}

    def engage(self, scope: str, reason: str, target: str = "") -> None:
        with self._lock:
            if scope == "global":
                self._global = reason
            elif scope == "domain":
                self._domains[target] = reason
            elif scope == "instance":
                self._instances[target] = reason
            else:
                raise ValueError(f"unknown kill-switch scope: {scope}")

    def release(self, scope: str, target: str = "") -> None:
        with self._lock:
            if scope == "global":
                self._global = None
            elif scope == "domain":
                self._domains.pop(target, None)
            elif scope == "instance":
                self._instances.pop(target, None)

    def check(self, domain: str = "", instance: str = "") -> Optional[Halted]:
        """Consulted before every primitive dispatch."""
        with self._lock:
            if self._global is not None:
                return Halted(self._global, "global")
            if domain in self._domains:
                return Halted(self._domains[domain], "domain")
            if instance in self._instances:
                return Halted(self._instances[instance], "instance")
        return None
