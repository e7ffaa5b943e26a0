from __future__ import annotations

import json

import pytest

from govcore.primitives.kinds import CognitiveOutput, PrimitiveKind


def flat_output(kind: str, **overrides) -> dict:
    """A schema-valid flat JSON object for any kind, override as needed."""
    base = {
        "retrieve": {
            "data": {"clinical_record": "seven weeks of therapy documented"},
            "sources_queried": ["clinical_record"],
            "retrieval_plan": "query the record",
            "confidence": 0.9,
        },
        "classify": {
            "category": "criteria_not_met",
            "alternative_categories": [["regulatory_override", 0.2]],
            "reasoning": "Criteria unmet on the documented history [plan_criteria].",
            "confidence": 0.9,
            "reasoning_quality": 0.85,
            "outcome_certainty": 0.8,
        },
        "investigate": {
            "finding": "The documented course satisfies the threshold [clinical_record].",
            "hypotheses_tested": ["threshold satisfied"],
            "evidence_flags": [],
            "missing_evidence": [],
            "confidence": 0.85,
            "reasoning_quality": 0.85,
            "outcome_certainty": 0.8,
        },
        "verify": {
            "conforms": True,
            "violations": [],
            "rules_checked": ["R1", "R2"],
            "confidence": 0.9,
            "reasoning_quality": 0.9,
            "outcome_certainty": 0.85,
        },
        "challenge": {
            "survives": True,
            "vulnerabilities": [],
            "strengths": ["documentary basis"],
            "overall_assessment": "The determination stands [plan_criteria].",
            "confidence": 0.85,
            "reasoning_quality": 0.9,
            "outcome_certainty": 0.8,
        },
        "reflect": {
            "trajectory": "continue",
            "what_changed": "Nothing material changed [record].",
            "open_questions": [],
            "next_question": "none",
            "template_guidance": "",
            "established_facts_to_skip": [],
            "confidence": 0.85,
        },
        "deliberate": {
            "recommended_action": "UPHOLD",
            "warrant": "Criteria correctly applied [plan_criteria].",
            "situation_summary": "Routine application of written criteria.",
            "options_considered": ["UPHOLD", "OVERTURN"],
            "confidence": 0.88,
            "reasoning_quality": 0.9,
            "outcome_certainty": 0.85,
        },
        "govern": {
            "tier_applied": "SPOT_CHECK",
            "disposition": "UPHOLD",
            "tier_rationale": "Supported record [record].",
            "confidence": 0.9,
        },
        "generate": {
            "artifact": "Determination notice text [plan_criteria].",
            "format": "determination_notice",
            "constraints_checked": ["citations"],
            "confidence": 0.9,
            "reasoning_quality": 0.9,
            "outcome_certainty": 0.85,
        },
    }[kind]
    merged = dict(base)
    merged.update(overrides)
    return merged


def make_output(kind: str, **overrides) -> CognitiveOutput:
    from govcore.primitives.salvage import parse_output

    return parse_output(PrimitiveKind(kind), json.dumps(flat_output(kind, **overrides)))


@pytest.fixture
def appeal_domain():
    from govcore.config import load_domain
    from govcore.replay import data_file

    return load_domain(data_file("domains", "prior_auth_appeal.yaml"))
