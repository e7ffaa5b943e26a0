"""Prompt assembly from per-primitive templates.

Every template has four named sections: {context} (accumulated workflow
state), {subject} (this step's input), {rules} (domain instructions), and
{schema} (the JSON contract). Reflect is the exception that proves the
structure: its context is the accumulated reasoning state, never the raw
case evidence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from ..errors import MissingParameter
from .kinds import JUDGMENT_KINDS, PrimitiveKind
from .registry import registry_lookup

_SCHEMAS: dict[PrimitiveKind, dict] = {
    PrimitiveKind.RETRIEVE: {
        "data": "map of source name to synthesized text ('' when a source returned nothing)",
        "sources_queried": ["source name"],
        "retrieval_plan": "string",
    },
    PrimitiveKind.CLASSIFY: {
        "category": "string",
        "alternative_categories": [["category", "confidence 0..1"]],
        "reasoning": "string, cite evidence in [brackets]",
    },
    PrimitiveKind.INVESTIGATE: {
        "finding": "string, cite evidence in [brackets]",
        "hypotheses_tested": ["string"],
        "evidence_flags": ["string"],
        "missing_evidence": ["string"],
    },
    PrimitiveKind.VERIFY: {
        "conforms": "boolean",
        "violations": [{"rule_id": "string", "description": "string"}],
        "rules_checked": ["rule id"],
    },
    PrimitiveKind.CHALLENGE: {
        "survives": "boolean",
        "vulnerabilities": [
            {
                "description": "string",
                "severity": "low|medium|high",
                "kind": "evidence_defect|reasoning_defect|authority_pressure|domain_mismatch",
                "target_domain": "optional string",
            }
        ],
        "strengths": ["string"],
        "overall_assessment": "string, cite evidence in [brackets]",
    },
    PrimitiveKind.REFLECT: {
        "trajectory": "continue|revise|escalate",
        "revision_target": "required when trajectory is revise",
        "what_changed": "string",
        "open_questions": ["string"],
        "next_question": "string",
        "template_guidance": "string",
        "established_facts_to_skip": ["string"],
    },
    PrimitiveKind.DELIBERATE: {
        "recommended_action": "one term from the domain vocabulary",
        "warrant": "string, cite evidence in [brackets]",
        "situation_summary": "string",
        "options_considered": ["string"],
    },
    PrimitiveKind.GOVERN: {
        "tier_applied": "AUTO|SPOT_CHECK|GATE|HOLD",
        "disposition": "string",
        "work_order": {"reason": "optional object"},
        "tier_rationale": "string, cite evidence in [brackets]",
    },
    PrimitiveKind.GENERATE: {
        "artifact": "string, cite evidence in [brackets]",
        "format": "string",
        "constraints_checked": ["string"],
    },
}

_BASE_SCHEMA_NOTE = {"confidence": "number 0..1", "citations": ["source id"]}
_JUDGMENT_SCHEMA_NOTE = {
    "reasoning_quality": "number 0..1",
    "outcome_certainty": "number 0..1",
}


def schema_text(kind: PrimitiveKind) -> str:
    schema = dict(_SCHEMAS[kind])
    schema.update(_BASE_SCHEMA_NOTE)
    if kind in JUDGMENT_KINDS:
        schema.update(_JUDGMENT_SCHEMA_NOTE)
    return json.dumps(schema, indent=2, sort_keys=True)


@dataclass(frozen=True)
class PromptState:
    """What the runtime exposes to prompt rendering."""

    case_subject: str = ""
    context_text: str = ""
    reasoning_text: str = ""


@dataclass(frozen=True)
class PromptBundle:
    template_id: str
    context: str
    subject: str
    rules_or_scope: str
    output_schema: str
    appendix: str = ""

    @property
    def text(self) -> str:
        rendered = _load_template(self.template_id).format(
            context=self.context,
            subject=self.subject,
            rules=self.rules_or_scope,
            schema=self.output_schema,
        )
        if self.appendix:
            rendered = rendered + "\n\n" + self.appendix
        return rendered

    def with_appendix(self, appendix: str) -> "PromptBundle":
        return PromptBundle(
            self.template_id,
            self.context,
            self.subject,
            self.rules_or_scope,
            self.output_schema,
            appendix,
        )


_template_cache: dict[str, str] = {}


def _load_template(template_id: str) -> str:
    if template_id not in _template_cache:
        ref = resources.files("govcore.primitives") / "templates" / f"{template_id}.txt"
        _template_cache[template_id] = ref.read_text(encoding="utf-8")
    return _template_cache[template_id]


def _subject_for(kind: PrimitiveKind, state: PromptState, params: dict) -> str:
    if kind is PrimitiveKind.REFLECT:
        focus = params.get("focus") or "overall trajectory"
        return f"Assess the reasoning so far. Focus: {focus}"
    if kind is PrimitiveKind.RETRIEVE:
        sources = params["sources"]
        listing = ", ".join(sources) if isinstance(sources, list) else str(sources)
        return f"Acquire evidence from: {listing}\n\n{state.case_subject}"
    if kind is PrimitiveKind.CLASSIFY:
        return f"Classify this case into one of: {params['categories']}\n\n{state.case_subject}"
    if kind is PrimitiveKind.INVESTIGATE:
        return f"Question: {params['question']}\n\n{state.case_subject}"
    if kind is PrimitiveKind.VERIFY:
        return f"Check conformance against the rules in scope.\n\n{state.case_subject}"
    if kind is PrimitiveKind.CHALLENGE:
        return (
            f"Perspective: {params.get('perspective', 'strongest opposing view')}\n\n"
            f"{state.case_subject}"
        )
    if kind is PrimitiveKind.DELIBERATE:
        constraint = params.get("constraint", "")
        prefix = f"Scope of this deliberation: {constraint}\n\n" if constraint else ""
        return prefix + state.case_subject
    if kind is PrimitiveKind.GOVERN:
        return "Produce the governance determination for this instance."
    return f"Render the determination artifact.\n\n{state.case_subject}"


def _rules_for(kind: PrimitiveKind, domain, params: dict) -> str:
    sections = []
    if domain is not None:
        sections.append(domain.orchestrator_strategy)
        if kind is PrimitiveKind.DELIBERATE:
            sections.append(
                "Valid dispositions: " + ", ".join(sorted(domain.deliberate_vocabulary))
            )
            if domain.routing_terms_excluded:
                sections.append(
                    "GATE, HOLD, and SPOT_CHECK are review tiers, not dispositions; "
                    "never output them as recommended_action."
                )
    if kind is PrimitiveKind.VERIFY:
        rules = params["rules"]
        listing = "\n".join(f"- {r}" for r in rules) if isinstance(rules, list) else str(rules)
        sections.append("Rules in scope:\n" + listing)
    return "\n\n".join(s for s in sections if s)


def render_prompt(
    kind: PrimitiveKind, domain, state: PromptState, step_params: dict
) -> PromptBundle:
    """Assemble the four-section prompt bundle for one step.

    Deterministic: identical inputs render byte-identical bundles. Raises
    MissingParameter when a registry-required parameter is absent.
    """
    registration = registry_lookup(kind)
    params = dict(registration.optional_params)
    params.update(step_params or {})
    for name in registration.required_params:
        if name not in params:
            raise MissingParameter(name)

    context = (
        state.reasoning_text if kind is PrimitiveKind.REFLECT else state.context_text
    )
    return PromptBundle(
        template_id=registration.template_id,
        context=context,
        subject=_subject_for(kind, state, params),
        rules_or_scope=_rules_for(kind, domain, params),
        output_schema=schema_text(kind),
    )
