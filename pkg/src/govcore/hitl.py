"""Nine-state human-review lifecycle with work-order delegation.

Every transition is validated against the legal table and appended to the
audit ledger with the acting identity. Human review and automated specialist
workflows share the same typed work order; only wait_for_result orders gate
instance resumption.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Callable, Optional

from .errors import IllegalStateTransition, UnauthorizedActor
from .governance import GovernanceTier

DEFAULT_SLA_HOURS = {GovernanceTier.GATE: 72, GovernanceTier.HOLD: 24}


class HitlState(str, Enum):
    SUSPENDED = "suspended"
    PENDING_REVIEW = "pending_review"
    ASSIGNED = "assigned"
    UNDER_REVIEW = "under_review"
    APPROVED = "approved"
    REJECTED = "rejected"
    TIMED_OUT = "timed_out"
    RESUMED = "resumed"
    TERMINATED = "terminated"


LEGAL_TRANSITIONS: frozenset = frozenset(
    {
        (HitlState.SUSPENDED, HitlState.PENDING_REVIEW),
        (HitlState.PENDING_REVIEW, HitlState.ASSIGNED),
        (HitlState.ASSIGNED, HitlState.UNDER_REVIEW),
        (HitlState.UNDER_REVIEW, HitlState.APPROVED),
        (HitlState.UNDER_REVIEW, HitlState.REJECTED),
        (HitlState.UNDER_REVIEW, HitlState.TIMED_OUT),
        (HitlState.PENDING_REVIEW, HitlState.TIMED_OUT),
        (HitlState.ASSIGNED, HitlState.TIMED_OUT),
        (HitlState.APPROVED, HitlState.RESUMED),
        (HitlState.REJECTED, HitlState.TERMINATED),
        (HitlState.REJECTED, HitlState.RESUMED),
        (HitlState.TIMED_OUT, HitlState.TERMINATED),
        (HitlState.TIMED_OUT, HitlState.PENDING_REVIEW),
    }
)

# Target states only a reviewer may drive.
REVIEWER_STATES = frozenset(
    {HitlState.ASSIGNED, HitlState.UNDER_REVIEW, HitlState.APPROVED, HitlState.REJECTED}
)

SWEEPABLE = frozenset(
    {HitlState.PENDING_REVIEW, HitlState.ASSIGNED, HitlState.UNDER_REVIEW}
)


@dataclass
class WorkOrder:
    order_id: str
    instance_id: str
    kind: str  # human_review | specialist_workflow
    mode: str  # fire_and_forget | wait_for_result | parallel
    payload: dict
    sla_deadline: str  # ISO-8601 UTC
    state: HitlState = HitlState.SUSPENDED
    tier: GovernanceTier = GovernanceTier.GATE
    assignee: str = ""
    notes: list = field(default_factory=list)

    @property
    def blocks_resumption(self) -> bool:
        return self.mode == "wait_for_result" and self.state not in (
            HitlState.RESUMED,
            HitlState.TERMINATED,
        )


LedgerHook = Callable[[str, dict], object]


def transition(
    order: WorkOrder,
    to: HitlState,
    actor: str,
    note: str = "",
    role: str = "system",
    ledger_append: Optional[LedgerHook] = None,
    timestamp: str = "",
) -> WorkOrder:
    """Apply one validated state change; ledger it with the actor identity."""
    if (order.state, to) not in LEGAL_TRANSITIONS:
        raise IllegalStateTransition(order.state.value, to.value)
    if to in REVIEWER_STATES and role not in ("reviewer",):
        raise UnauthorizedActor(f"{actor} ({role}) cannot drive {to.value}")
    from_state = order.state
    order.state = to
    if to is HitlState.ASSIGNED:
        order.assignee = actor
    if note:
        order.notes.append(note)
    if ledger_append is not None:
        ledger_append(
            "hitl_transition",
            {
                "order_id": order.order_id,
                "from": from_state.value,
                "to": to.value,
                "actor": actor,
                "role": role,
                "note": note,
                "timestamp": timestamp,
            },
        )
    return order


def make_work_order(
    order_id: str,
    instance_id: str,
    tier: GovernanceTier,
    payload: dict,
    now: datetime,
    kind: str = "human_review",
    mode: str = "wait_for_result",
    sla_hours: Optional[dict] = None,
) -> WorkOrder:
    hours = (sla_hours or {}).get(tier.value) or DEFAULT_SLA_HOURS.get(tier, 72)
    deadline = (now + timedelta(hours=hours)).strftime("%Y-%m-%dT%H:%M:%SZ")
    return WorkOrder(
        order_id=order_id,
        instance_id=instance_id,
        kind=kind,
        mode=mode,
        payload=payload,
        sla_deadline=deadline,
        tier=tier,
    )


def sweep(orders: list[WorkOrder], now: datetime, ledger_for=None) -> list[WorkOrder]:
    """Time out any reviewable order past its SLA deadline."""
    timed_out = []
    for order in orders:
        if order.state not in SWEEPABLE:
            continue
        deadline = datetime.strptime(order.sla_deadline, "%Y-%m-%dT%H:%M:%SZ").replace(
            tzinfo=timezone.utc
        )
        if now >= deadline:
            hook = ledger_for(order) if ledger_for is not None else None
            transition(order, HitlState.TIMED_OUT, actor="sla_sweep",
                       note="sla deadline passed", ledger_append=hook)
            timed_out.append(order)
    return timed_out


def resolve_directive(order: WorkOrder, resume_requested: bool = False) -> str:
    """What the runtime should do with the instance once review concludes.

    approved -> finish with the governed disposition; rejected may send the
    work back (resume) or terminate; timed_out terminates unless re-queued.
    """
    if order.state is HitlState.APPROVED:
        return "complete"
    if order.state is HitlState.REJECTED:
        return "resume_at_step" if resume_requested else "terminate"
    if order.state is HitlState.TIMED_OUT:
        return "terminate"
    raise IllegalStateTransition(order.state.value, "resolution")


def quorum_met(orders: list[WorkOrder], quorum: Optional[int] = None) -> bool:
    """Parallel-mode resolution: resume when `quorum` orders approved
    (default: all)."""
    required = quorum if quorum is not None else len(orders)
    approved = sum(
        1 for o in orders if o.state in (HitlState.APPROVED, HitlState.RESUMED)
    )
    return approved >= required
