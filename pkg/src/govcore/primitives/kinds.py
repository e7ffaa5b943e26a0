"""The nine cognitive primitives and their typed output contracts.

Every model response is one flat JSON object carrying the per-kind payload
fields plus the shared base fields (confidence, citations, and the two
judgment signals where the kind elicits them). Validation is strict in both
directions: a missing required field fails, and so does an unknown one:
a reflect output must not smuggle in a recommended_action.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from ..errors import SchemaViolation, VocabularyViolation


class PrimitiveKind(str, Enum):
    RETRIEVE = "retrieve"
    CLASSIFY = "classify"
    INVESTIGATE = "investigate"
    VERIFY = "verify"
    CHALLENGE = "challenge"
    REFLECT = "reflect"
    DELIBERATE = "deliberate"
    GOVERN = "govern"
    GENERATE = "generate"


# Kinds whose prompts elicit reasoning_quality and outcome_certainty.
# retrieve is measured mechanically, govern reads the accumulated record,
# and reflect reports trajectory fields instead of scalar quality.
JUDGMENT_KINDS = frozenset(
    {
        PrimitiveKind.CLASSIFY,
        PrimitiveKind.INVESTIGATE,
        PrimitiveKind.VERIFY,
        PrimitiveKind.CHALLENGE,
        PrimitiveKind.DELIBERATE,
        PrimitiveKind.GENERATE,
    }
)

# Governance routing terms are not dispositions.
ROUTING_TERMS = frozenset({"GATE", "HOLD", "SPOT_CHECK"})

TRAJECTORIES = ("continue", "revise", "escalate")
SEVERITIES = ("low", "medium", "high")
VULNERABILITY_KINDS = (
    "evidence_defect",
    "reasoning_defect",
    "authority_pressure",
    "domain_mismatch",
)
TIER_NAMES = ("AUTO", "SPOT_CHECK", "GATE", "HOLD")


@dataclass(frozen=True)
class CognitiveOutput:
    """Typed result of one primitive execution; the unit governance inspects."""

    kind: PrimitiveKind
    payload: dict
    confidence: float
    reasoning_quality: Optional[float] = None
    outcome_certainty: Optional[float] = None
    citations: list = field(default_factory=list)
    raw_text: str = ""
    salvage_stage: int = 1

    def to_flat_dict(self) -> dict:
        """Inverse of parsing: the flat JSON object form."""
        flat = dict(self.payload)
        flat["confidence"] = self.confidence
        if self.citations:
            flat["citations"] = list(self.citations)
        if self.reasoning_quality is not None:
            flat["reasoning_quality"] = self.reasoning_quality
        if self.outcome_certainty is not None:
            flat["outcome_certainty"] = self.outcome_certainty
        return flat


def _need(payload: dict, name: str):
    if name not in payload:
        raise SchemaViolation(name, "missing required field")
    return payload[name]


def _text(payload: dict, name: str) -> str:
    value = _need(payload, name)
    if not isinstance(value, str):
        raise SchemaViolation(name, f"expected string, got {type(value).__name__}")
    return value


def _boolean(payload: dict, name: str) -> bool:
    value = _need(payload, name)
    if not isinstance(value, bool):
        raise SchemaViolation(name, f"expected boolean, got {type(value).__name__}")
    return value


def _str_list(payload: dict, name: str, required: bool = True) -> list[str]:
    if name not in payload:
        if required:
            raise SchemaViolation(name, "missing required field")
        return []
    value = payload[name]
    if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
        raise SchemaViolation(name, "expected list of strings")
    return list(value)


def _number(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(name, f"expected number, got {type(value).__name__}")
    number = float(value)
    if not 0.0 <= number <= 1.0:
        raise SchemaViolation(name, f"{number} outside [0, 1]")
    return number


def _enum(value: str, name: str, allowed: tuple) -> str:
    if value not in allowed:
        raise SchemaViolation(name, f"{value!r} not one of {sorted(allowed)}")
    return value


def _validate_retrieve(payload: dict) -> dict:
    data = _need(payload, "data")
    if not isinstance(data, dict) or any(
        not isinstance(k, str) or not isinstance(v, str) for k, v in data.items()
    ):
        raise SchemaViolation("data", "expected map of source name to text")
    return {
        "data": dict(data),
        "sources_queried": _str_list(payload, "sources_queried"),
        "retrieval_plan": _text(payload, "retrieval_plan"),
    }


def _validate_classify(payload: dict) -> dict:
    alternatives = _need(payload, "alternative_categories")
    if not isinstance(alternatives, list):
        raise SchemaViolation("alternative_categories", "expected list")
    normalized = []
    for i, alt in enumerate(alternatives):
        if not isinstance(alt, list) or len(alt) != 2 or not isinstance(alt[0], str):
            raise SchemaViolation(
                "alternative_categories",
                f"entry {i} must be a [category, confidence] pair",
            )
        normalized.append([alt[0], _number(alt[1], f"alternative_categories[{i}]")])
    return {
        "category": _text(payload, "category"),
        "alternative_categories": normalized,
        "reasoning": _text(payload, "reasoning"),
    }


def _validate_investigate(payload: dict) -> dict:
    return {
        "finding": _text(payload, "finding"),
        "hypotheses_tested": _str_list(payload, "hypotheses_tested"),
        "evidence_flags": _str_list(payload, "evidence_flags"),
        "missing_evidence": _str_list(payload, "missing_evidence"),
    }


def _validate_verify(payload: dict) -> dict:
    violations = _need(payload, "violations")
    if not isinstance(violations, list):
        raise SchemaViolation("violations", "expected list")
    normalized = []
    for i, violation in enumerate(violations):
        if not isinstance(violation, dict):
            raise SchemaViolation("violations", f"entry {i} must be an object")
        normalized.append(
            {
                "rule_id": _text(violation, "rule_id"),
                "description": _text(violation, "description"),
            }
        )
    return {
        "conforms": _boolean(payload, "conforms"),
        "violations": normalized,
        "rules_checked": _str_list(payload, "rules_checked"),
    }


def _validate_challenge(payload: dict) -> dict:
    vulnerabilities = _need(payload, "vulnerabilities")
    if not isinstance(vulnerabilities, list):
        raise SchemaViolation("vulnerabilities", "expected list")
    normalized = []
    for i, vuln in enumerate(vulnerabilities):
        if not isinstance(vuln, dict):
            raise SchemaViolation("vulnerabilities", f"entry {i} must be an object")
        entry = {
            "description": _text(vuln, "description"),
            "severity": _enum(_text(vuln, "severity"), "severity", SEVERITIES),
            "kind": _enum(_text(vuln, "kind"), "kind", VULNERABILITY_KINDS),
        }
        if "target_domain" in vuln:
            entry["target_domain"] = _text(vuln, "target_domain")
        extra = set(vuln) - {"description", "severity", "kind", "target_domain"}
        if extra:
            raise SchemaViolation("vulnerabilities", f"unknown fields {sorted(extra)}")
        normalized.append(entry)
    return {
        "survives": _boolean(payload, "survives"),
        "vulnerabilities": normalized,
        "strengths": _str_list(payload, "strengths"),
        "overall_assessment": _text(payload, "overall_assessment"),
    }


def _validate_reflect(payload: dict) -> dict:
    trajectory = _enum(_text(payload, "trajectory"), "trajectory", TRAJECTORIES)
    result = {
        "trajectory": trajectory,
        "what_changed": _text(payload, "what_changed"),
        "open_questions": _str_list(payload, "open_questions"),
        "next_question": _text(payload, "next_question"),
        "template_guidance": payload.get("template_guidance", ""),
        "established_facts_to_skip": _str_list(
            payload, "established_facts_to_skip", required=False
        ),
    }
    if not isinstance(result["template_guidance"], str):
        raise SchemaViolation("template_guidance", "expected string")
    if trajectory == "revise":
        result["revision_target"] = _text(payload, "revision_target")
    elif "revision_target" in payload:
        result["revision_target"] = _text(payload, "revision_target")
    return result


def _validate_deliberate(payload: dict) -> dict:
    return {
        "recommended_action": _text(payload, "recommended_action"),
        "warrant": _text(payload, "warrant"),
        "situation_summary": _text(payload, "situation_summary"),
        "options_considered": _str_list(payload, "options_considered"),
    }


def _validate_govern(payload: dict) -> dict:
    result = {
        "tier_applied": _enum(_text(payload, "tier_applied"), "tier_applied", TIER_NAMES),
        "disposition": _text(payload, "disposition"),
        "tier_rationale": _text(payload, "tier_rationale"),
    }
    if "work_order" in payload:
        order = payload["work_order"]
        if order is not None and not isinstance(order, dict):
            raise SchemaViolation("work_order", "expected object or null")
        if order is not None:
            result["work_order"] = dict(order)
    return result


def _validate_generate(payload: dict) -> dict:
    return {
        "artifact": _text(payload, "artifact"),
        "format": _text(payload, "format"),
        "constraints_checked": _str_list(payload, "constraints_checked"),
    }


_VALIDATORS = {
    PrimitiveKind.RETRIEVE: _validate_retrieve,
    PrimitiveKind.CLASSIFY: _validate_classify,
    PrimitiveKind.INVESTIGATE: _validate_investigate,
    PrimitiveKind.VERIFY: _validate_verify,
    PrimitiveKind.CHALLENGE: _validate_challenge,
    PrimitiveKind.REFLECT: _validate_reflect,
    PrimitiveKind.DELIBERATE: _validate_deliberate,
    PrimitiveKind.GOVERN: _validate_govern,
    PrimitiveKind.GENERATE: _validate_generate,
}

_PAYLOAD_FIELDS = {
    PrimitiveKind.RETRIEVE: {"data", "sources_queried", "retrieval_plan"},
    PrimitiveKind.CLASSIFY: {"category", "alternative_categories", "reasoning"},
    PrimitiveKind.INVESTIGATE: {
        "finding",
        "hypotheses_tested",
        "evidence_flags",
        "missing_evidence",
    },
    PrimitiveKind.VERIFY: {"conforms", "violations", "rules_checked"},
    PrimitiveKind.CHALLENGE: {
        "survives",
        "vulnerabilities",
        "strengths",
        "overall_assessment",
    },
    PrimitiveKind.REFLECT: {
        "trajectory",
        "revision_target",
        "what_changed",
        "open_questions",
        "next_question",
        "template_guidance",
        "established_facts_to_skip",
    },
    PrimitiveKind.DELIBERATE: {
        "recommended_action",
        "warrant",
        "situation_summary",
        "options_considered",
    },
    PrimitiveKind.GOVERN: {"tier_applied", "disposition", "work_order", "tier_rationale"},
    PrimitiveKind.GENERATE: {"artifact", "format", "constraints_checked"},
}

_BASE_FIELDS = {"confidence", "citations", "reasoning_quality", "outcome_certainty"}


def payload_fields(kind: PrimitiveKind) -> set[str]:
    return set(_PAYLOAD_FIELDS[kind])


def validate_payload(kind: PrimitiveKind, payload: dict, domain=None) -> dict:
    """Validate and normalize a per-kind payload.

    With a domain, deliberate dispositions are checked against the domain
    vocabulary; routing terms are rejected when the domain excludes them.
    """
    unknown = set(payload) - _PAYLOAD_FIELDS[kind]
    if unknown:
        raise SchemaViolation(sorted(unknown)[0], "unknown field for this kind")
    typed = _VALIDATORS[kind](payload)
    if kind is PrimitiveKind.DELIBERATE and domain is not None:
        action = typed["recommended_action"]
        if domain.routing_terms_excluded and action in ROUTING_TERMS:
            raise VocabularyViolation(
                f"{action} is a governance routing term, not a disposition"
            )
        if action not in domain.deliberate_vocabulary:
            raise VocabularyViolation(
                f"{action} is not in the domain vocabulary "
                f"{sorted(domain.deliberate_vocabulary)}"
            )
    return typed


def split_flat_object(kind: PrimitiveKind, obj: dict) -> tuple[dict, dict]:
    """Split a flat model response into (base fields, payload fields).

    Raises SchemaViolation for base-contract problems: a missing confidence,
    judgment signals on kinds that must not carry them, or vice versa.
    """
    if not isinstance(obj, dict):
        raise SchemaViolation("$", "response is not a JSON object")
    base = {k: obj[k] for k in _BASE_FIELDS if k in obj}
    payload = {k: v for k, v in obj.items() if k not in _BASE_FIELDS}

    if "confidence" not in base:
        raise SchemaViolation("confidence", "missing required field")
    base["confidence"] = _number(base["confidence"], "confidence")
    if "citations" in base:
        if not isinstance(base["citations"], list) or any(
            not isinstance(c, str) for c in base["citations"]
        ):
            raise SchemaViolation("citations", "expected list of strings")
    else:
        base["citations"] = []

    if kind in JUDGMENT_KINDS:
        for name in ("reasoning_quality", "outcome_certainty"):
            if name not in base:
                raise SchemaViolation(name, "missing required field")
            base[name] = _number(base[name], name)
    else:
        for name in ("reasoning_quality", "outcome_certainty"):
            if name in base:
                raise SchemaViolation(name, f"not part of the {kind.value} contract")
            base[name] = None
    return base, payload
