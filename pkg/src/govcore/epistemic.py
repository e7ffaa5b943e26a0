"""Three-layer epistemic state, computed by the substrate after every step.

Layer 1, mechanical signals, are ratios over observable output structure and
cannot be inflated by model self-assertion. Layer 2, judgment signals, are
the model-reported reasoning_quality and outcome_certainty pair, present for
six of the nine kinds. Layer 3, coherence flags, are cross-step contradiction
detectors; critical flags force warranted=False regardless of score.

Citation-rate convention: the designated narrative field of a kind is split
into sentences, and a sentence counts as cited when it carries a bracketed
evidence marker like ``[plan_criteria]``. A zero denominator scores 0.0;
absence of checkable structure degrades the state, never inflates it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from statistics import mean
from typing import Optional

from .primitives.kinds import CognitiveOutput, PrimitiveKind
from .triggers import evaluate_gate_trigger  # noqa: F401  (part of this surface)

WARRANT_FLOOR = 0.5
JUDGMENT_WEIGHT = 0.4  # blended only when judgment signals exist
CONFIDENCE_DROP_THRESHOLD = 0.3

FLAG_PENALTIES = {
    "CD_MISMATCH": (-0.20, "critical"),
    "VD_TENSION": (-0.25, "critical"),
    "CONFIDENCE_DROP": (-0.10, "warning"),
}

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_CITATION_MARK = re.compile(r"\[[^\[\]]+\]")

# Narrative field whose sentences are the claim units for citation rate.
_CITATION_FIELD = {
    PrimitiveKind.CLASSIFY: "reasoning",
    PrimitiveKind.DELIBERATE: "warrant",
    PrimitiveKind.GOVERN: "tier_rationale",
    PrimitiveKind.GENERATE: "artifact",
    PrimitiveKind.INVESTIGATE: "finding",
    PrimitiveKind.CHALLENGE: "overall_assessment",
    PrimitiveKind.REFLECT: "what_changed",
}


@dataclass(frozen=True)
class MechanicalSignals:
    evidence_completeness: Optional[float] = None
    rule_coverage: Optional[float] = None
    citation_rate: Optional[float] = None
    alternative_separation: Optional[float] = None
    notes: tuple = ()

    def present(self) -> dict:
        values = {
            "evidence_completeness": self.evidence_completeness,
            "rule_coverage": self.rule_coverage,
            "citation_rate": self.citation_rate,
            "alternative_separation": self.alternative_separation,
        }
        return {k: v for k, v in values.items() if v is not None}


@dataclass(frozen=True)
class JudgmentSignals:
    reasoning_quality: float
    outcome_certainty: float


@dataclass(frozen=True)
class CoherenceFlag:
    kind: str
    severity: str
    penalty: float
    source_steps: tuple
    note: str = ""

    @staticmethod
    def make(kind: str, source_steps: tuple, note: str = "") -> "CoherenceFlag":
        penalty, severity = FLAG_PENALTIES[kind]
        return CoherenceFlag(kind, severity, penalty, source_steps, note)


@dataclass
class StepEpistemicState:
    step_id: str
    kind: PrimitiveKind
    mechanical: MechanicalSignals
    judgment: Optional[JudgmentSignals]
    flags: list = field(default_factory=list)
    overall: float = 0.0
    warranted: bool = False
    confidence: float = 0.0

    def signal_value(self, name: str) -> Optional[float]:
        if name == "overall":
            return self.overall
        if name == "confidence":
            return self.confidence
        if name in ("reasoning_quality", "outcome_certainty"):
            if self.judgment is None:
                return None
            return getattr(self.judgment, name)
        return self.mechanical.present().get(name)


@dataclass
class WorkflowEpistemicRecord:
    """The accumulated record that governance reads."""

    steps: list = field(default_factory=list)
    challenge_cycle_count: int = 0
    challenge_survived: bool = False
    reflect_counts: dict = field(default_factory=lambda: {"gap_filling": 0, "post_challenge": 0})
    post_challenge_revises: int = 0
    guardrail_events: list = field(default_factory=list)

    def add(self, state: StepEpistemicState) -> None:
        self.steps.append(state)

    def last(self) -> Optional[StepEpistemicState]:
        return self.steps[-1] if self.steps else None

    def any_unwarranted(self) -> bool:
        return any(not s.warranted for s in self.steps)

    def any_warning_flags(self) -> bool:
        return any(f.severity == "warning" for s in self.steps for f in s.flags)

    def any_flags(self) -> bool:
        return any(s.flags for s in self.steps)

    def label(self) -> str:
        """SUPPORTED / DEGRADED / INSUFFICIENT summary of the record."""
        if self.any_unwarranted():
            return "INSUFFICIENT"
        if self.any_warning_flags() or any(
            WARRANT_FLOOR <= s.overall < 0.7 for s in self.steps
        ):
            return "DEGRADED"
        if self.any_flags():
            return "DEGRADED"
        return "SUPPORTED"


def _ratio(numerator: int, denominator: int) -> tuple[float, Optional[str]]:
    if denominator == 0:
        return 0.0, "zero denominator scored 0.0"
    return min(1.0, numerator / denominator), None


def _citation_rate(text: str) -> tuple[float, Optional[str]]:
    sentences = [s for s in _SENTENCE_SPLIT.split(text.strip()) if s.strip()]
    cited = sum(1 for s in sentences if _CITATION_MARK.search(s))
    return _ratio(cited, len(sentences))


def compute_mechanical(
    kind: PrimitiveKind, output: CognitiveOutput, context: Optional[dict] = None
) -> MechanicalSignals:
    """Layer-1 signals from output structure alone.

    retrieve: sources with data / sources specified. verify: rules checked /
    rules applicable (from the step's input context). classify additionally
    reports the separation between the chosen category's confidence and the
    best alternative. Every other kind reports citation rate.
    """
    context = context or {}
    notes = []
    values: dict = {}

    if kind is PrimitiveKind.RETRIEVE:
        sources = output.payload["sources_queried"]
        data = output.payload["data"]
        with_data = sum(1 for s in sources if data.get(s, "").strip())
        values["evidence_completeness"], note = _ratio(with_data, len(sources))
        if note:
            notes.append(f"evidence_completeness: {note}")
    elif kind is PrimitiveKind.VERIFY:
        applicable = context.get("rules") or []
        checked = output.payload["rules_checked"]
        values["rule_coverage"], note = _ratio(len(checked), len(applicable))
        if note:
            notes.append(f"rule_coverage: {note}")
    else:
        rate, note = _citation_rate(output.payload.get(_CITATION_FIELD[kind], ""))
        values["citation_rate"] = rate
        if note:
            notes.append(f"citation_rate: {note}")
        if kind is PrimitiveKind.CLASSIFY:
            alternatives = output.payload["alternative_categories"]
            best_alt = max((c for _, c in alternatives), default=0.0)
            values["alternative_separation"] = min(
                1.0, max(0.0, output.confidence - best_alt)
            )
    return MechanicalSignals(notes=tuple(notes), **values)


def _violations_cited(deliberate: CognitiveOutput, violations: list) -> bool:
    haystack = deliberate.payload["warrant"] + " " + " ".join(deliberate.citations)
    return any(v["rule_id"] in haystack for v in violations)


def detect_flags(
    record: WorkflowEpistemicRecord,
    new_step_id: str,
    kind: PrimitiveKind,
    output: CognitiveOutput,
    outputs_by_step: dict,
    compatibility_map: Optional[dict] = None,
) -> list:
    """Layer-3 cross-step checks for the step that just completed.

    CD_MISMATCH: the deliberate action is incompatible with the classify
    category per the domain compatibility map. VD_TENSION: verify reported
    violations but deliberate proceeds confidently without citing them.
    CONFIDENCE_DROP: confidence fell by more than the threshold from the
    previous step.
    """
    flags = []
    if kind is PrimitiveKind.DELIBERATE:
        classify = _latest(record, outputs_by_step, PrimitiveKind.CLASSIFY)
        if classify is not None and compatibility_map:
            step_id, classify_out = classify
            category = classify_out.payload["category"]
            allowed = compatibility_map.get(category)
            action = output.payload["recommended_action"]
            if allowed is not None and action not in allowed:
                flags.append(
                    CoherenceFlag.make(
                        "CD_MISMATCH",
                        (step_id, new_step_id),
                        f"{action} incompatible with category {category}",
                    )
                )
        verify = _latest(record, outputs_by_step, PrimitiveKind.VERIFY)
        if verify is not None:
            step_id, verify_out = verify
            violations = verify_out.payload["violations"]
            certainty = output.outcome_certainty or 0.0
            if (
                violations
                and certainty > 0.7
                and not _violations_cited(output, violations)
            ):
                flags.append(
                    CoherenceFlag.make(
                        "VD_TENSION",
                        (step_id, new_step_id),
                        "deliberate proceeds past verify violations without citing them",
                    )
                )
    previous = record.last()
    if previous is not None:
        drop = previous.confidence - output.confidence
        if drop > CONFIDENCE_DROP_THRESHOLD:
            flags.append(
                CoherenceFlag.make(
                    "CONFIDENCE_DROP",
                    (previous.step_id, new_step_id),
                    f"confidence fell {drop:.2f} from previous step",
                )
            )
    return flags


def _latest(record, outputs_by_step, kind: PrimitiveKind):
    for state in reversed(record.steps):
        if state.kind is kind and state.step_id in outputs_by_step:
            return state.step_id, outputs_by_step[state.step_id]
    return None


def compute_overall(
    mechanical: MechanicalSignals,
    judgment: Optional[JudgmentSignals],
    flags: list,
) -> tuple[float, bool]:
    """Combine the layers into (overall, warranted).

    Base is the mean of present mechanical signals, blended 60/40 with the
    judgment mean when judgment signals exist. The coherence multiplier is
    clamp(1 + sum(penalties), 0, 1). Critical flags force warranted=False
    regardless of the score.
    """
    present = mechanical.present()
    if not present:
        raise ValueError("at least one mechanical signal is required")
    base = mean(present.values())
    if judgment is not None:
        base = (1 - JUDGMENT_WEIGHT) * base + JUDGMENT_WEIGHT * mean(
            (judgment.reasoning_quality, judgment.outcome_certainty)
        )
    multiplier = max(0.0, min(1.0, 1.0 + sum(f.penalty for f in flags)))
    overall = base * multiplier
    critical = any(f.severity == "critical" for f in flags)
    warranted = overall >= WARRANT_FLOOR and not critical
    return overall, warranted


def assess_step(
    step_id: str,
    kind: PrimitiveKind,
    output: CognitiveOutput,
    record: WorkflowEpistemicRecord,
    outputs_by_step: dict,
    step_context: Optional[dict] = None,
    compatibility_map: Optional[dict] = None,
) -> StepEpistemicState:
    """Full per-step assessment; appends nothing, callers own the record."""
    mechanical = compute_mechanical(kind, output, step_context)
    judgment = None
    if output.reasoning_quality is not None and output.outcome_certainty is not None:
        judgment = JudgmentSignals(output.reasoning_quality, output.outcome_certainty)
    flags = detect_flags(
        record, step_id, kind, output, outputs_by_step, compatibility_map
    )
    overall, warranted = compute_overall(mechanical, judgment, flags)
    return StepEpistemicState(
        step_id=step_id,
        kind=kind,
        mechanical=mechanical,
        judgment=judgment,
        flags=flags,
        overall=overall,
        warranted=warranted,
        confidence=output.confidence,
    )
