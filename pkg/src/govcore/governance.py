"""Four-tier governance: tier ordering, the quality gate over confidence
floors, and the deterministic govern rubric.

The rubric runs before any model involvement and its result is a floor the
govern model's proposal can only raise. Escalation is strictly upward; a
lowering attempt is a recorded no-op, never an error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .epistemic import WorkflowEpistemicRecord
from .errors import MissingDeliberate
from .primitives.kinds import CognitiveOutput, PrimitiveKind


class GovernanceTier(str, Enum):
    AUTO = "AUTO"
    SPOT_CHECK = "SPOT_CHECK"
    GATE = "GATE"
    HOLD = "HOLD"

    @property
    def rank(self) -> int:
        return _TIER_ORDER[self]

    def __lt__(self, other):  # total order AUTO < SPOT_CHECK < GATE < HOLD
        if isinstance(other, GovernanceTier):
            return self.rank < other.rank
        return NotImplemented


_TIER_ORDER = {
    GovernanceTier.AUTO: 0,
    GovernanceTier.SPOT_CHECK: 1,
    GovernanceTier.GATE: 2,
    GovernanceTier.HOLD: 3,
}

SUSPENDING_TIERS = frozenset({GovernanceTier.GATE, GovernanceTier.HOLD})


@dataclass
class TierLock:
    tier: GovernanceTier
    locked_at: int  # ledger index
    rationale: str


@dataclass(frozen=True)
class TierProposal:
    tier: GovernanceTier
    reason: str


@dataclass
class GovernDetermination:
    tier_applied: GovernanceTier
    disposition: str
    tier_rationale: str
    rubric_tier: GovernanceTier = GovernanceTier.SPOT_CHECK
    model_proposed_tier: Optional[GovernanceTier] = None
    rubric_rules_fired: list = field(default_factory=list)
    work_order_requested: bool = False


@dataclass(frozen=True)
class QualityGateConfig:
    confidence_floors: dict  # primitive name -> floor in [0, 1]
    escalate_to: GovernanceTier = GovernanceTier.GATE


def apply_tier(
    current: Optional[TierLock],
    proposed: GovernanceTier,
    rationale: str,
    ledger_index: int = 0,
    domain_default: GovernanceTier = GovernanceTier.AUTO,
) -> tuple[TierLock, bool]:
    """Merge a proposal into the lock: max(domain default, current, proposed).

    Returns (lock, raised). A proposal at or below the standing tier leaves
    the lock untouched and reports raised=False so the caller can ledger the
    no-op.
    """
    standing = current.tier if current is not None else domain_default
    if proposed.rank > standing.rank:
        return TierLock(proposed, ledger_index, rationale), True
    if current is None:
        return TierLock(standing, ledger_index, rationale), False
    return current, False


def quality_gate(
    record: WorkflowEpistemicRecord,
    step_attempts: dict,
    config: QualityGateConfig,
) -> Optional[TierProposal]:
    """Check confidence floors against each step's final successful attempt.

    Transient parse failures that recovered on retry are invisible here;
    only the final attempt's confidence is compared.
    """
    for state in record.steps:
        floor = config.confidence_floors.get(state.kind.value)
        if floor is None:
            continue
        attempts = step_attempts.get(state.step_id, [])
        final = next((a for a in reversed(attempts) if a.get("ok")), None)
        confidence = final["confidence"] if final else state.confidence
        if confidence < floor:
            return TierProposal(
                config.escalate_to,
                f"{state.step_id} confidence {confidence:.2f} below floor {floor:.2f}",
            )
    return None


def evaluate_govern(
    record: WorkflowEpistemicRecord,
    outputs: dict,
    domain,
    model_output: Optional[CognitiveOutput] = None,
    gate_proposal: Optional[TierProposal] = None,
) -> GovernDetermination:
    """Deterministic rubric, then merge of the model proposal (raise-only).

    Rubric, in order of severity:
      (a) critical guardrail event on record        -> HOLD
      (b) any unwarranted step (INSUFFICIENT)       -> HOLD
      (c) >=2 challenge cycles with no survivor,
          any warning flag, or DEGRADED record      -> GATE
      (d) high-stakes disposition for the domain    -> at least GATE
      (e) otherwise SPOT_CHECK; AUTO only for a SUPPORTED record with no
          flags and every floor met
    """
    deliberates = [
        (step_id, out)
        for step_id, (kind, out) in outputs.items()
        if kind is PrimitiveKind.DELIBERATE
    ]
    if not deliberates:
        raise MissingDeliberate("govern evaluated without a deliberate output")
    final_action = deliberates[-1][1].payload["recommended_action"]

    fired: list[str] = []
    rubric = GovernanceTier.SPOT_CHECK
    label = record.label()

    if any(e.get("severity") == "critical" for e in record.guardrail_events):
        rubric = GovernanceTier.HOLD
        fired.append("critical_guardrail_event")
    elif label == "INSUFFICIENT":
        rubric = GovernanceTier.HOLD
        fired.append("record_insufficient")
    else:
        gate_reasons = []
        if record.challenge_cycle_count >= 2 and not record.challenge_survived:
            gate_reasons.append("repeated_failed_challenge_cycles")
        if record.any_warning_flags():
            gate_reasons.append("warning_flags_present")
        if label == "DEGRADED":
            gate_reasons.append("record_degraded")
        if final_action in set(domain.high_stakes_dispositions):
            gate_reasons.append(f"high_stakes_disposition:{final_action}")
        if gate_reasons:
            rubric = GovernanceTier.GATE
            fired.extend(gate_reasons)
        elif label == "SUPPORTED" and gate_proposal is None:
            rubric = GovernanceTier.AUTO
            fired.append("record_supported_all_floors_met")
        else:
            fired.append("routine_decision_class")

    tier = rubric
    rationale_parts = [f"rubric:{'+'.join(fired)}"]
    if gate_proposal is not None and gate_proposal.tier.rank > tier.rank:
        tier = gate_proposal.tier
        rationale_parts.append(f"quality_gate:{gate_proposal.reason}")

    disposition = final_action
    model_proposed = None
    if model_output is not None:
        model_proposed = GovernanceTier(model_output.payload["tier_applied"])
        disposition = model_output.payload["disposition"]
        if model_proposed.rank > tier.rank:
            tier = model_proposed
            rationale_parts.append("model_raised_tier")
        rationale_parts.append(model_output.payload["tier_rationale"])

    return GovernDetermination(
        tier_applied=tier,
        disposition=disposition,
        tier_rationale=" | ".join(rationale_parts),
        rubric_tier=rubric,
        model_proposed_tier=model_proposed,
        rubric_rules_fired=fired,
        work_order_requested=tier in SUSPENDING_TIERS,
    )
