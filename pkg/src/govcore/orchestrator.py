"""Next-step selection for both execution modes.

A deterministic override layer runs before any model involvement: generate
is always followed by challenge; a surviving challenge is always followed by
govern; govern is terminal; max_steps and max_repeat force escalation. The
model chooser is consulted only in the residual space, and its choice is
validated against the legal transition table. Every decision is ledgered
before the step it selects executes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .epistemic import WorkflowEpistemicRecord
from .errors import ConstraintViolation, IllegalChoice, MissingDeliberate
from .primitives.kinds import CognitiveOutput, PrimitiveKind

# decided_by values; override_illegal_choice covers the forced-govern
# fallback after a failed re-ask.
OVERRIDE_POST_GENERATE = "override_post_generate"
OVERRIDE_POST_CHALLENGE_SURVIVED = "override_post_challenge_survived"
OVERRIDE_POST_GOVERN_TERMINATE = "override_post_govern_terminate"
OVERRIDE_MAX_STEPS = "override_max_steps"
OVERRIDE_MAX_REPEAT = "override_max_repeat"
OVERRIDE_ILLEGAL_CHOICE = "override_illegal_choice"
DECIDED_BY_MODEL = "model"
DECIDED_BY_DECLARED = "declared_sequence"

DEFAULT_MAX_STEPS = 24
DEFAULT_MAX_REPEAT = 4

# Reconstructed default; domains may override per-kind successor sets.
DEFAULT_TRANSITION_TABLE: dict[PrimitiveKind, frozenset] = {
    PrimitiveKind.RETRIEVE: frozenset(
        {
            PrimitiveKind.RETRIEVE,
            PrimitiveKind.CLASSIFY,
            PrimitiveKind.INVESTIGATE,
            PrimitiveKind.REFLECT,
        }
    ),
    PrimitiveKind.CLASSIFY: frozenset(
        {
            PrimitiveKind.RETRIEVE,
            PrimitiveKind.INVESTIGATE,
            PrimitiveKind.VERIFY,
            PrimitiveKind.REFLECT,
        }
    ),
    PrimitiveKind.INVESTIGATE: frozenset(
        {
            PrimitiveKind.RETRIEVE,
            PrimitiveKind.INVESTIGATE,
            PrimitiveKind.VERIFY,
            PrimitiveKind.REFLECT,
            PrimitiveKind.DELIBERATE,
        }
    ),
    PrimitiveKind.VERIFY: frozenset(
        {PrimitiveKind.DELIBERATE, PrimitiveKind.REFLECT, PrimitiveKind.INVESTIGATE}
    ),
    PrimitiveKind.REFLECT: frozenset(
        {
            PrimitiveKind.RETRIEVE,
            PrimitiveKind.INVESTIGATE,
            PrimitiveKind.VERIFY,
            PrimitiveKind.DELIBERATE,
            PrimitiveKind.GOVERN,
        }
    ),
    PrimitiveKind.DELIBERATE: frozenset(
        {PrimitiveKind.GENERATE, PrimitiveKind.CHALLENGE, PrimitiveKind.REFLECT}
    ),
    PrimitiveKind.CHALLENGE: frozenset({PrimitiveKind.REFLECT}),
    PrimitiveKind.GENERATE: frozenset({PrimitiveKind.CHALLENGE}),
    PrimitiveKind.GOVERN: frozenset(),  # terminal
}


@dataclass(frozen=True)
class TrajectoryConstraints:
    must_include: frozenset = frozenset()
    max_steps: int = DEFAULT_MAX_STEPS
    must_end_with: PrimitiveKind = PrimitiveKind.GOVERN
    max_repeat: dict = field(default_factory=dict)

    def repeat_limit(self, kind: PrimitiveKind) -> int:
        return self.max_repeat.get(kind.value, DEFAULT_MAX_REPEAT)

    def validate(self) -> None:
        if self.max_steps < len(self.must_include) + 1:
            raise ConstraintViolation(
                f"max_steps {self.max_steps} cannot cover "
                f"{len(self.must_include)} must_include kinds plus {self.must_end_with.value}"
            )


@dataclass
class OrchestratorDecision:
    chosen: PrimitiveKind
    step_name: str
    reasoning: str
    decided_by: str
    ledger_index: int = -1


@dataclass
class Termination:
    reasoning: str
    decided_by: str = OVERRIDE_POST_GOVERN_TERMINATE


@dataclass(frozen=True)
class GuardVerdict:
    trajectory: str  # continue | revise | escalate
    revision_target: Optional[str]
    basis: str  # genuine_vulnerability | authority_pressure | domain_mismatch
    detail: str = ""


@dataclass
class OrchestratorView:
    """What next_step sees of the instance."""

    mode: str  # workflow | agentic
    available: frozenset
    steps_executed: int = 0
    counts: dict = field(default_factory=dict)
    last_kind: Optional[PrimitiveKind] = None
    last_output: Optional[CognitiveOutput] = None
    last_reflect_trajectory: Optional[str] = None
    declared_sequence: list = field(default_factory=list)  # workflow mode
    routing_log: list = field(default_factory=list)

    def count(self, kind: PrimitiveKind) -> int:
        return self.counts.get(kind.value, 0)

    def step_name_for(self, kind: PrimitiveKind) -> str:
        return f"{kind.value}_{self.count(kind) + 1}"


Chooser = Callable[..., tuple[str, str]]


def next_step(
    mode: str,
    view: OrchestratorView,
    constraints: TrajectoryConstraints,
    table: dict,
    chooser: Optional[Chooser],
):
    """Select the next step or termination. Override precedence first."""
    last = view.last_kind

    if last is PrimitiveKind.GOVERN:
        return Termination("govern is terminal")

    if last is PrimitiveKind.GENERATE:
        return _decision(view, PrimitiveKind.CHALLENGE, OVERRIDE_POST_GENERATE,
                         "challenge is forced after generate")

    if last is PrimitiveKind.CHALLENGE and view.last_output is not None:
        if view.last_output.payload.get("survives"):
            return _decision(
                view, PrimitiveKind.GOVERN, OVERRIDE_POST_CHALLENGE_SURVIVED,
                "surviving challenge forces govern",
            )

    if view.steps_executed >= constraints.max_steps - 1:
        return _force_govern(view, constraints, OVERRIDE_MAX_STEPS,
                             f"step budget {constraints.max_steps} nearly exhausted")

    if mode == "workflow":
        return _next_declared(view, constraints)

    legal = _legal_set(view, constraints, table)
    if not legal:
        return _force_govern(view, constraints, OVERRIDE_MAX_REPEAT,
                             "no legal choices remain under max_repeat")

    if chooser is None:
        raise IllegalChoice("agentic mode requires a model chooser")
    choice, reasoning = chooser(view, sorted(k.value for k in legal))
    kind = _as_kind(choice)
    if kind is None or kind not in legal:
        note = (
            f"'{choice}' is outside the legal set "
            f"{sorted(k.value for k in legal)}; choose again"
        )
        choice, reasoning = chooser(view, sorted(k.value for k in legal), note=note)
        kind = _as_kind(choice)
        if kind is None or kind not in legal:
            return _force_govern(
                view, constraints, OVERRIDE_ILLEGAL_CHOICE,
                f"model chose '{choice}' outside the legal set twice",
            )
    return _decision(view, kind, DECIDED_BY_MODEL, reasoning)


def _as_kind(name: str) -> Optional[PrimitiveKind]:
    try:
        return PrimitiveKind(name)
    except ValueError:
        return None


def _decision(view, kind: PrimitiveKind, decided_by: str, reasoning: str):
    return OrchestratorDecision(
        chosen=kind,
        step_name=view.step_name_for(kind),
        reasoning=reasoning,
        decided_by=decided_by,
    )


def _force_govern(view, constraints, decided_by: str, reasoning: str):
    if constraints.must_end_with not in view.available:
        raise ConstraintViolation(
            f"must_end_with {constraints.must_end_with.value} is not available"
        )
    return _decision(view, constraints.must_end_with, decided_by, reasoning)


def _legal_set(view, constraints, table) -> set:
    if view.last_kind is None:
        legal = set(view.available)
    else:
        legal = set(table.get(view.last_kind, frozenset())) & set(view.available)
    if (
        view.last_kind is PrimitiveKind.REFLECT
        and view.last_reflect_trajectory == "escalate"
    ):
        legal &= {PrimitiveKind.GOVERN}
        return legal
    legal = {
        k for k in legal
        if k is constraints.must_end_with or view.count(k) < constraints.repeat_limit(k)
    }
    unmet = {
        k for k in constraints.must_include
        if view.count(k) == 0 and k is not constraints.must_end_with
    }
    budget = constraints.max_steps - 1 - view.steps_executed
    if unmet and len(unmet) >= budget:
        pressured = legal & unmet
        if pressured:
            legal = pressured
    return legal


def _next_declared(view, constraints):
    position = view.steps_executed
    if position >= len(view.declared_sequence):
        if view.count(constraints.must_end_with) == 0:
            return _force_govern(
                view, constraints, OVERRIDE_MAX_STEPS,
                "declared sequence exhausted without the required terminal step",
            )
        return Termination("declared sequence exhausted")
    step = view.declared_sequence[position]
    kind = PrimitiveKind(step["primitive"])
    if view.count(kind) >= constraints.repeat_limit(kind) and kind is not constraints.must_end_with:
        return _force_govern(
            view, constraints, OVERRIDE_MAX_REPEAT,
            f"declared step repeats {kind.value} past its limit",
        )
    return OrchestratorDecision(
        chosen=kind,
        step_name=step.get("step_name") or view.step_name_for(kind),
        reasoning="declared sequence",
        decided_by=DECIDED_BY_DECLARED,
    )


def post_challenge_guard(
    challenge_output: CognitiveOutput,
    prior_deliberate: Optional[CognitiveOutput],
    record: WorkflowEpistemicRecord,
) -> GuardVerdict:
    """Deterministic classification of a failed challenge.

    Vulnerabilities citing evidence or reasoning defects in the domain the
    determination rests on warrant revision; urgency or authority language,
    or an attack on a different epistemic domain, does not. Two consecutive
    revise cycles without a surviving challenge escalate.
    """
    if challenge_output.payload.get("survives"):
        raise ValueError("post-challenge guard requires a failed challenge")
    if prior_deliberate is None:
        raise MissingDeliberate("post-challenge guard requires a prior deliberate")

    vulnerabilities = challenge_output.payload["vulnerabilities"]
    if not vulnerabilities:
        return GuardVerdict("continue", None, "domain_mismatch",
                            "challenge listed no vulnerabilities")

    basis_text = (
        prior_deliberate.payload["warrant"]
        + " "
        + prior_deliberate.payload["situation_summary"]
    ).lower()
    genuine = []
    pressure = False
    for vuln in vulnerabilities:
        if vuln["kind"] in ("evidence_defect", "reasoning_defect"):
            target = vuln.get("target_domain")
            if target is None or target.lower() in basis_text:
                genuine.append(vuln)
        elif vuln["kind"] == "authority_pressure":
            pressure = True

    if record.post_challenge_revises >= 1:
        detail = "; ".join(v["description"] for v in genuine) or "repeated failed cycles"
        return GuardVerdict("escalate", None, "genuine_vulnerability", detail)
    if genuine:
        detail = "; ".join(
            v.get("target_domain") or v["description"] for v in genuine
        )
        return GuardVerdict("revise", "deliberate_disposition",
                            "genuine_vulnerability", detail)
    basis = "authority_pressure" if pressure else "domain_mismatch"
    detail = "; ".join(v["description"] for v in vulnerabilities)
    return GuardVerdict("continue", None, basis, detail)


def constrained_redeliberate(verdict: GuardVerdict, domain) -> dict:
    """Step parameters for the second deliberate after a revise verdict."""
    if verdict.trajectory != "revise":
        raise ValueError("constrained_redeliberate requires a revise verdict")
    constraint = (
        f"Revise {verdict.revision_target} only; the challenge found genuine "
        f"vulnerabilities in: {verdict.detail}"
    )
    return {"constraint": constraint}
