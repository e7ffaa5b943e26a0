"""The instance engine: one decision running end to end.

Wires the kernel loop to the orchestrator, primitive execution, epistemic
assessment, governance, safety, and the ledger. All instance mutation
happens on the kernel loop thread; completions re-enter through kernel
injection, which is the only cross-thread path.

Ledger ordering contract: the orchestrator decision for a step is appended
before the step executes; a govern step's determination follows its
step_completed entry; suspension appends the work order and the first HITL
transition before the terminal system entry.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from typing import Optional

from . import epistemic as epi
from . import governance as gov
from . import hitl
from . import kernel
from . import orchestrator as orch
from .clock import SystemClock
from .config import CaseInput, DomainConfig, WorkflowConfig
from .errors import ExhaustedRetries, IllegalStateTransition, MissingDeliberate
from .ledger import Ledger, fixed6
from .llm import ModelPolicy, execute
from .primitives.kinds import CognitiveOutput, PrimitiveKind
from .primitives.prompts import PromptState, render_prompt
from .safety import KillSwitch, RedactionMap, redact_fields, scan
from .triggers import evaluate_gate_trigger

logger = logging.getLogger(__name__)

ORCHESTRATOR_ID = "orchestrator"


def sanitize_for_ledger(value):
    """Map runtime values into the canonical ledger domain.

    Floats become six-decimal strings; None-valued keys are dropped.
    """
    if isinstance(value, bool) or isinstance(value, (str, int)):
        return value
    if isinstance(value, float):
        return fixed6(value)
    if isinstance(value, dict):
        return {
            k: sanitize_for_ledger(v) for k, v in value.items() if v is not None
        }
    if isinstance(value, list):
        return [sanitize_for_ledger(v) for v in value]
    if value is None:
        return ""
    return str(value)


@dataclass
class StepRecord:
    step_name: str
    kind: PrimitiveKind
    output: CognitiveOutput
    state: epi.StepEpistemicState
    attempts: list
    params: dict = field(default_factory=dict)


@dataclass
class RunResult:
    instance_id: str
    status: str
    tier: Optional[gov.GovernanceTier]
    disposition: Optional[str]
    steps: int
    ledger_head: str


class InstanceRuntime:
    """Owns one workflow instance for its in-process lifetime."""

    def __init__(
        self,
        instance_id: str,
        case: CaseInput,
        domain: DomainConfig,
        workflow: WorkflowConfig,
        backend,
        chooser=None,
        ledger: Optional[Ledger] = None,
        clock=None,
        kill_switch: Optional[KillSwitch] = None,
        policy: Optional[ModelPolicy] = None,
        synchronous: bool = True,
        on_update=None,
    ):
        self.instance_id = instance_id
        self.case = case
        self.domain = domain
        self.workflow = workflow
        self.backend = backend
        self.chooser = chooser
        self.ledger = ledger if ledger is not None else Ledger()
        self.clock = clock or SystemClock()
        self.kill_switch = kill_switch
        self.policy = policy or ModelPolicy()
        self.synchronous = synchronous
        self.on_update = on_update

        self.status = "created"
        self.record = epi.WorkflowEpistemicRecord()
        self.steps: list[StepRecord] = []
        self.outputs_by_step: dict[str, CognitiveOutput] = {}
        self.step_attempts: dict[str, list] = {}
        self.tier_lock: Optional[gov.TierLock] = None
        self.determination: Optional[gov.GovernDetermination] = None
        self.work_order: Optional[hitl.WorkOrder] = None
        self.chooser_calls = 0
        self.rendered_bundles: list = []  # kept for prompt hygiene tests

        self.redaction_map = RedactionMap(scope=instance_id)
        self.case_view = redact_fields(
            case.fields, domain.pii_policy, self.redaction_map
        )
        self._case_subject = json.dumps(self.case_view, sort_keys=True, indent=1)

        self.view = orch.OrchestratorView(
            mode=workflow.mode,
            available=workflow.available_primitives,
            declared_sequence=workflow.declared_steps,
        )
        self._model: Optional[kernel.WorkflowModel] = None
        self._pending_decision: Optional[orch.OrchestratorDecision] = None
        self._inflight: Optional[dict] = None
        self._pending_guidance = ""
        self._pending_deliberate_params: Optional[dict] = None
        self._pending_guard: Optional[orch.GuardVerdict] = None
        self._halt_reason: Optional[str] = None
        self._lock = threading.Lock()

    # -- ledger helpers -------------------------------------------------------

    def _append(self, entry_type: str, content: dict):
        full = dict(content)
        full["entry_type"] = entry_type
        full["index"] = self.ledger.next_index()
        full.setdefault("timestamp", self.clock.isoformat())
        entry = self.ledger.append(entry_type, sanitize_for_ledger(full))
        if self.on_update is not None:
            self.on_update(self, entry)
        return entry

    def _hitl_hook(self, entry_type: str, content: dict):
        content = dict(content)
        content.pop("timestamp", None)
        return self._append(entry_type, content)

    # -- lifecycle ------------------------------------------------------------

    def run(self) -> RunResult:
        """Execute from intake to termination or suspension."""
        self.status = "running"
        self._append(
            "system",
            {
                "event": "instance_started",
                "instance_id": self.instance_id,
                "case_id": self.case.case_id,
                "domain_id": self.domain.domain_id,
                "workflow_id": self.workflow.workflow_id,
                "mode": self.workflow.mode,
                "backend": getattr(self.backend, "identity", "unknown"),
            },
        )
        findings = scan(self.case_view, self.domain.guardrails)
        for finding in findings:
            self._append("guardrail_event", finding.to_content())
            if finding.severity == "critical":
                self.record.guardrail_events.append(finding.to_content())

        self._model = self._build_model()
        report = kernel.run_to_quiescence(self._model, self._executor)
        if self.status == "running":
            # kernel quiesced without an explicit finalization
            self.status = "suspended" if report.status == "suspended" else "terminated"
        return self.result()

    def result(self) -> RunResult:
        return RunResult(
            instance_id=self.instance_id,
            status=self.status,
            tier=self.tier_lock.tier if self.tier_lock else None,
            disposition=self.determination.disposition if self.determination else None,
            steps=len(self.steps),
            ledger_head=self.ledger.head_hash,
        )

    def _build_model(self) -> kernel.WorkflowModel:
        model = kernel.WorkflowModel()
        orchestrator = kernel.StepComponent(
            ORCHESTRATOR_ID, "orchestrator", counts_as_step=False
        )
        orchestrator.set_active()
        model.add_component(orchestrator, routes_to=None)
        for kind in sorted(self.workflow.available_primitives, key=lambda k: k.value):
            model.add_component(
                kernel.StepComponent(kind.value, kind.value),
                routes_to=ORCHESTRATOR_ID,
            )
        return model

    # -- kernel executor ------------------------------------------------------

    def _executor(self, component: kernel.StepComponent):
        if component.step_id == ORCHESTRATOR_ID:
            return self._orchestrate(component)
        return self._dispatch_step(component)

    def _orchestrate(self, component):
        if self._inflight is not None:
            self._process_completion()
            if self.status != "running":
                return kernel.Completed(activate=None)

        chooser = self._counting_chooser() if self.chooser is not None else None
        decision = orch.next_step(
            self.workflow.mode,
            self.view,
            self.workflow.constraints,
            self.domain.transition_table,
            chooser,
        )
        if isinstance(decision, orch.Termination):
            self._append(
                "orchestrator_decision",
                {
                    "chosen": "TERMINATE",
                    "step_name": "",
                    "decided_by": decision.decided_by,
                    "reasoning": decision.reasoning,
                },
            )
            self._finalize()
            return kernel.Completed(activate=None)

        entry = self._append(
            "orchestrator_decision",
            {
                "chosen": decision.chosen.value,
                "step_name": decision.step_name,
                "decided_by": decision.decided_by,
                "reasoning": decision.reasoning,
            },
        )
        decision.ledger_index = entry.index
        self.view.routing_log.append(
            f"{decision.step_name} ({decision.decided_by})"
        )
        self._pending_decision = decision
        return kernel.Completed(activate=decision.chosen.value)

    def _counting_chooser(self):
        def wrapped(view, legal, note=None):
            self.chooser_calls += 1
            return self.chooser(view, legal, note=note)

        return wrapped

    def _dispatch_step(self, component):
        decision = self._pending_decision
        if self.kill_switch is not None:
            halted = self.kill_switch.check(self.domain.domain_id, self.instance_id)
            if halted is not None:
                self._append(
                    "system",
                    {
                        "event": "halted",
                        "scope": halted.scope,
                        "reason": halted.reason,
                        "before_step": decision.step_name if decision else "",
                    },
                )
                self.status = "halted"
                self._store_update()
                return kernel.Completed(route=False)

        kind = decision.chosen
        params = self._params_for(kind, decision)
        bundle = render_prompt(kind, self.domain, self._prompt_state(), params)
        self.rendered_bundles.append((decision.step_name, bundle))

        def work():
            try:
                output, attempts = execute(
                    kind, bundle, self.policy, self.backend, self.domain
                )
                result = {"ok": True, "output": output, "attempts": attempts}
            except ExhaustedRetries as exc:
                result = {"ok": False, "error": str(exc), "attempts": exc.attempts}
            except Exception as exc:  # surfaced as step failure, never swallowed
                logger.exception("step %s failed", decision.step_name)
                result = {"ok": False, "error": str(exc), "attempts": 0}
            with self._lock:
                self._inflight = {
                    "decision": decision,
                    "params": params,
                    "result": result,
                }
            self._model.inject(kernel.InjectedEvent(target=kind.value, payload="done"))

        component.set_awaiting()  # before work(), which may inject immediately
        if self.synchronous:
            work()
        else:
            threading.Thread(target=work, daemon=True).start()
        return kernel.Awaiting()

    # -- completion processing --------------------------------------------------

    def _process_completion(self):
        with self._lock:
            inflight = self._inflight
            self._inflight = None
        decision = inflight["decision"]
        result = inflight["result"]
        kind = decision.chosen

        if not result["ok"]:
            self._append(
                "system",
                {
                    "event": "step_failed",
                    "step_name": decision.step_name,
                    "error": str(result["error"])[:500],
                    "attempts": result["attempts"],
                },
            )
            self._handle_step_failure(decision)
            return

        output: CognitiveOutput = result["output"]
        state = epi.assess_step(
            decision.step_name,
            kind,
            output,
            self.record,
            self.outputs_by_step,
            step_context=inflight["params"],
            compatibility_map=self.domain.compatibility_map,
        )
        step = StepRecord(
            decision.step_name, kind, output, state, result["attempts"], inflight["params"]
        )
        self.steps.append(step)
        self.outputs_by_step[decision.step_name] = output
        self.step_attempts[decision.step_name] = result["attempts"]
        self.record.add(state)
        self._bookkeep(step)
        self._append("step_completed", self._step_content(step))

        for expr in self.domain.gate_triggers:
            if evaluate_gate_trigger(expr, state):
                self._append(
                    "governance_action",
                    {
                        "action": "gate_trigger_fired",
                        "step_name": step.step_name,
                        "trigger": expr,
                    },
                )

        if kind is PrimitiveKind.GOVERN:
            self._determine(step)
        elif self.workflow.mode == "workflow":
            self._check_transition_condition(step)
        self._store_update()

    def _step_content(self, step: StepRecord) -> dict:
        state = step.state
        content = {
            "step_name": step.step_name,
            "primitive": step.kind.value,
            "confidence": step.output.confidence,
            "salvage_stage": step.output.salvage_stage,
            "attempts": len(step.attempts),
            "payload": step.output.payload,
            "citations": list(step.output.citations),
            "epistemic": {
                "mechanical": state.mechanical.present(),
                "judgment": (
                    {
                        "reasoning_quality": state.judgment.reasoning_quality,
                        "outcome_certainty": state.judgment.outcome_certainty,
                    }
                    if state.judgment
                    else {}
                ),
                "flags": [
                    {
                        "kind": f.kind,
                        "severity": f.severity,
                        "penalty": f.penalty,
                        "source_steps": list(f.source_steps),
                        "note": f.note,
                    }
                    for f in state.flags
                ],
                "overall": state.overall,
                "warranted": state.warranted,
            },
        }
        return content

    def _bookkeep(self, step: StepRecord):
        kind = step.kind
        previous_kind = self.view.last_kind
        previous_output = self.view.last_output
        self.view.counts[kind.value] = self.view.counts.get(kind.value, 0) + 1
        self.view.steps_executed += 1
        self.view.last_kind = kind
        self.view.last_output = step.output

        if kind is PrimitiveKind.CHALLENGE:
            self.record.challenge_cycle_count += 1
            if step.output.payload["survives"]:
                self.record.challenge_survived = True
        elif kind is PrimitiveKind.REFLECT:
            post_challenge = (
                previous_kind is PrimitiveKind.CHALLENGE
                and previous_output is not None
                and not previous_output.payload["survives"]
            )
            trajectory = step.output.payload["trajectory"]
            if post_challenge:
                verdict = self._pending_guard
                self.record.reflect_counts["post_challenge"] += 1
                if verdict is not None and verdict.trajectory != trajectory:
                    self._append(
                        "system",
                        {
                            "event": "guard_override",
                            "step_name": step.step_name,
                            "model_trajectory": trajectory,
                            "guard_trajectory": verdict.trajectory,
                            "basis": verdict.basis,
                        },
                    )
                effective = verdict.trajectory if verdict is not None else trajectory
                if effective == "revise":
                    self.record.post_challenge_revises += 1
                    self._pending_deliberate_params = orch.constrained_redeliberate(
                        verdict
                        if verdict is not None and verdict.trajectory == "revise"
                        else orch.GuardVerdict(
                            "revise",
                            step.output.payload.get("revision_target", "deliberate_disposition"),
                            "genuine_vulnerability",
                        ),
                        self.domain,
                    )
                self.view.last_reflect_trajectory = effective
            else:
                self.record.reflect_counts["gap_filling"] += 1
                self.view.last_reflect_trajectory = trajectory
            self._pending_guard = None
            self._pending_guidance = step.output.payload.get("template_guidance", "")
        if (
            kind is PrimitiveKind.CHALLENGE
            and not step.output.payload["survives"]
        ):
            prior_deliberate = self._latest_output(PrimitiveKind.DELIBERATE)
            self._pending_guard = orch.post_challenge_guard(
                step.output, prior_deliberate, self.record
            )

    def _latest_output(self, kind: PrimitiveKind) -> Optional[CognitiveOutput]:
        for step in reversed(self.steps):
            if step.kind is kind:
                return step.output
        return None

    def _handle_step_failure(self, decision):
        """Governance sees a failed step as an insufficient record."""
        self.record.add(
            epi.StepEpistemicState(
                step_id=decision.step_name,
                kind=decision.chosen,
                mechanical=epi.MechanicalSignals(citation_rate=0.0),
                judgment=None,
                flags=[],
                overall=0.0,
                warranted=False,
                confidence=0.0,
            )
        )
        self.view.counts[decision.chosen.value] = (
            self.view.counts.get(decision.chosen.value, 0) + 1
        )
        self.view.steps_executed += 1
        self.view.last_kind = decision.chosen
        self.view.last_output = None
        try:
            self._finish_without_model_govern()
        except MissingDeliberate:
            self.tier_lock, _ = gov.apply_tier(
                self.tier_lock,
                gov.GovernanceTier.HOLD,
                "step failure without a deliberate on record",
                ledger_index=self.ledger.next_index(),
                domain_default=self.domain.default_tier,
            )
            self._append(
                "system",
                {
                    "event": "instance_terminated",
                    "status": "terminated",
                    "reason": "step_failure_insufficient_record",
                    "tier": self.tier_lock.tier.value,
                },
            )
            self.status = "terminated"
            self._store_update()

    def _finish_without_model_govern(self):
        gate = gov.quality_gate(
            self.record,
            self.step_attempts,
            gov.QualityGateConfig(self.domain.confidence_floors),
        )
        determination = gov.evaluate_govern(
            self.record,
            {s.step_name: (s.kind, s.output) for s in self.steps},
            self.domain,
            model_output=None,
            gate_proposal=gate,
        )
        self._apply_determination(determination)
        self._finalize()

    # -- governance ---------------------------------------------------------------

    def _determine(self, step: StepRecord):
        gate = gov.quality_gate(
            self.record,
            self.step_attempts,
            gov.QualityGateConfig(self.domain.confidence_floors),
        )
        try:
            determination = gov.evaluate_govern(
                self.record,
                {s.step_name: (s.kind, s.output) for s in self.steps},
                self.domain,
                model_output=step.output,
                gate_proposal=gate,
            )
        except MissingDeliberate:
            self._append(
                "system",
                {"event": "governance_error", "error": "no deliberate output on record"},
            )
            self.status = "terminated"
            self._store_update()
            return
        if (
            determination.model_proposed_tier is not None
            and determination.model_proposed_tier.rank < determination.rubric_tier.rank
        ):
            self._append(
                "governance_action",
                {
                    "action": "tier_proposal_noop",
                    "proposed": determination.model_proposed_tier.value,
                    "standing": determination.rubric_tier.value,
                    "source": "govern_model",
                },
            )
        self._apply_determination(determination)

    def _apply_determination(self, determination: gov.GovernDetermination):
        self.determination = determination
        entry = self._append(
            "governance_action",
            {
                "action": "determination",
                "tier_applied": determination.tier_applied.value,
                "rubric_tier": determination.rubric_tier.value,
                "disposition": determination.disposition,
                "rules_fired": list(determination.rubric_rules_fired),
                "tier_rationale": determination.tier_rationale,
                "record_label": self.record.label(),
            },
        )
        self.tier_lock, _ = gov.apply_tier(
            self.tier_lock,
            determination.tier_applied,
            determination.tier_rationale,
            ledger_index=entry.index,
            domain_default=self.domain.default_tier,
        )

    def _finalize(self):
        """Terminal routing after govern: complete, or suspend on GATE/HOLD."""
        if self.determination is None:
            self._append(
                "system", {"event": "instance_terminated", "status": "terminated"}
            )
            self.status = "terminated"
            self._store_update()
            return
        tier = self.tier_lock.tier
        if tier in gov.SUSPENDING_TIERS:
            order_seq = 1 + sum(
                1 for e in self.ledger.entries if e.entry_type == "work_order"
            )
            order = hitl.make_work_order(
                order_id=f"wo-{self.instance_id}-{order_seq}",
                instance_id=self.instance_id,
                tier=tier,
                payload={
                    "case_id": self.case.case_id,
                    "disposition_pending": self.determination.disposition,
                    "record_label": self.record.label(),
                    "flag_count": sum(len(s.flags) for s in self.record.steps),
                },
                now=self.clock.now(),
                sla_hours=self.domain.sla_hours,
            )
            self.work_order = order
            self._append(
                "work_order",
                {
                    "order_id": order.order_id,
                    "instance_id": order.instance_id,
                    "kind": order.kind,
                    "mode": order.mode,
                    "tier": tier.value,
                    "sla_deadline": order.sla_deadline,
                    "payload": order.payload,
                },
            )
            hitl.transition(
                order,
                hitl.HitlState.PENDING_REVIEW,
                actor="governance",
                note="suspended pending review",
                ledger_append=self._hitl_hook,
            )
            if self._model is not None:
                self._model.pending_work_order = order.order_id
            self._append(
                "system",
                {
                    "event": "instance_suspended",
                    "status": "suspended",
                    "tier": tier.value,
                    "disposition_pending": self.determination.disposition,
                },
            )
            self.status = "suspended"
        else:
            self._append(
                "system",
                {
                    "event": "instance_completed",
                    "status": "completed",
                    "tier": tier.value,
                    "disposition": self.determination.disposition,
                },
            )
            self.status = "completed"
        self._store_update()

    # -- hitl resolution ------------------------------------------------------

    def review_transition(self, to: hitl.HitlState, actor: str, role: str, note: str = ""):
        if self.work_order is None:
            raise IllegalStateTransition("no_work_order", to.value)
        hitl.transition(
            self.work_order, to, actor=actor, role=role, note=note,
            ledger_append=self._hitl_hook,
        )
        self._store_update()
        return self.work_order

    def resolve(self, resume_requested: bool = False, actor: str = "system") -> str:
        """Resume or terminate after review concludes; every path is ledgered."""
        directive = hitl.resolve_directive(self.work_order, resume_requested)
        if directive == "complete":
            hitl.transition(
                self.work_order, hitl.HitlState.RESUMED, actor=actor,
                ledger_append=self._hitl_hook,
            )
            if self._model is not None:
                self._model.pending_work_order = None
            self._append(
                "system",
                {
                    "event": "instance_completed",
                    "status": "completed",
                    "tier": self.tier_lock.tier.value,
                    "disposition": self.determination.disposition,
                    "resumed_from": "review",
                },
            )
            self.status = "completed"
        elif directive == "terminate":
            hitl.transition(
                self.work_order, hitl.HitlState.TERMINATED, actor=actor,
                ledger_append=self._hitl_hook,
            )
            if self._model is not None:
                self._model.pending_work_order = None
            self._append(
                "system",
                {"event": "instance_terminated", "status": "terminated",
                 "tier": self.tier_lock.tier.value},
            )
            self.status = "terminated"
        else:  # resume_at_step
            hitl.transition(
                self.work_order, hitl.HitlState.RESUMED, actor=actor,
                note="re-entering with reviewer instructions",
                ledger_append=self._hitl_hook,
            )
            if self._model is not None:
                self._model.pending_work_order = None
            self.status = "running"
        self._store_update()
        return self.status

    def reenter(self, kind_name: str, note: str) -> RunResult:
        """Re-enter at a reviewer-selected step after a rejected+resume."""
        if self.backend is None:
            raise IllegalStateTransition("restored_without_backend", "reenter")
        kind = PrimitiveKind(kind_name)
        self._append(
            "system",
            {"event": "instance_resumed", "at_step": kind.value, "note": note},
        )
        self.determination = None
        self.work_order = None
        self._pending_guidance = note
        decision = orch.OrchestratorDecision(
            chosen=kind,
            step_name=self.view.step_name_for(kind),
            reasoning=f"reviewer re-entry: {note}",
            decided_by="reviewer_directive",
        )
        entry = self._append(
            "orchestrator_decision",
            {
                "chosen": decision.chosen.value,
                "step_name": decision.step_name,
                "decided_by": decision.decided_by,
                "reasoning": decision.reasoning,
            },
        )
        decision.ledger_index = entry.index
        self._pending_decision = decision
        model = self._build_model()
        model.component(ORCHESTRATOR_ID).set_idle()
        model.component(kind.value).set_active()
        self._model = model
        self.status = "running"
        report = kernel.run_to_quiescence(model, self._executor)
        if self.status == "running":
            self.status = "suspended" if report.status == "suspended" else "terminated"
        return self.result()

    @staticmethod
    def restore_suspended(
        instance_id: str,
        case: CaseInput,
        domain: DomainConfig,
        workflow: WorkflowConfig,
        ledger: Ledger,
        clock=None,
        on_update=None,
    ) -> "InstanceRuntime":
        """Rebuild enough state from the ledger to resolve a suspended
        instance after a restart: determination, tier lock, work order."""
        runtime = InstanceRuntime(
            instance_id, case, domain, workflow,
            backend=None, ledger=ledger, clock=clock, on_update=on_update,
        )
        runtime.status = "suspended"
        order = None
        for entry in ledger.entries:
            content = entry.content
            if entry.entry_type == "governance_action" and content.get("action") == "determination":
                runtime.determination = gov.GovernDetermination(
                    tier_applied=gov.GovernanceTier(content["tier_applied"]),
                    disposition=content["disposition"],
                    tier_rationale=content["tier_rationale"],
                    rubric_tier=gov.GovernanceTier(content["rubric_tier"]),
                )
                runtime.tier_lock = gov.TierLock(
                    gov.GovernanceTier(content["tier_applied"]),
                    entry.index,
                    content["tier_rationale"],
                )
            elif entry.entry_type == "work_order":
                order = hitl.WorkOrder(
                    order_id=content["order_id"],
                    instance_id=content["instance_id"],
                    kind=content["kind"],
                    mode=content["mode"],
                    payload=dict(content.get("payload", {})),
                    sla_deadline=content["sla_deadline"],
                    tier=gov.GovernanceTier(content["tier"]),
                )
            elif entry.entry_type == "hitl_transition" and order is not None:
                if content.get("order_id") == order.order_id:
                    order.state = hitl.HitlState(content["to"])
                    if order.state is hitl.HitlState.ASSIGNED:
                        order.assignee = content.get("actor", "")
            elif entry.entry_type == "step_completed":
                runtime.view.steps_executed += 1
        runtime.work_order = order
        if order is not None and order.state is hitl.HitlState.SUSPENDED:
            # crashed between dispatch and the queue transition: finish it
            hitl.transition(
                order, hitl.HitlState.PENDING_REVIEW, actor="recovery",
                note="dispatch completed during crash recovery",
                ledger_append=runtime._hitl_hook,
            )
        return runtime

    # -- prompt assembly --------------------------------------------------------

    def _prompt_state(self) -> PromptState:
        context_lines = [f"Goal: {self.workflow.goal}".strip()]
        context_lines.append("Case record (redacted):")
        context_lines.append(self._case_subject)
        for step in self.steps:
            context_lines.append(self._step_summary(step))
        reasoning_lines = [
            "Reasoning state (accumulated; case evidence lives with prior steps):"
        ]
        for step in self.steps:
            reasoning_lines.append(self._step_summary(step))
            if step.kind is PrimitiveKind.CHALLENGE:
                for vuln in step.output.payload["vulnerabilities"]:
                    reasoning_lines.append(
                        f"  vulnerability[{vuln['kind']}/{vuln['severity']}]: "
                        f"{vuln['description']}"
                    )
        if self._pending_guidance:
            reasoning_lines.append(f"Guidance pending: {self._pending_guidance}")
        return PromptState(
            case_subject=self._case_subject,
            context_text="\n".join(context_lines),
            reasoning_text="\n".join(reasoning_lines),
        )

    def _step_summary(self, step: StepRecord) -> str:
        payload = step.output.payload
        key = {
            PrimitiveKind.RETRIEVE: lambda: f"sources={payload['sources_queried']}",
            PrimitiveKind.CLASSIFY: lambda: f"category={payload['category']}",
            PrimitiveKind.INVESTIGATE: lambda: f"finding={payload['finding'][:160]}",
            PrimitiveKind.VERIFY: lambda: (
                f"conforms={payload['conforms']} violations="
                f"{[v['rule_id'] for v in payload['violations']]}"
            ),
            PrimitiveKind.CHALLENGE: lambda: (
                f"survives={payload['survives']} "
                f"assessment={payload['overall_assessment'][:160]}"
            ),
            PrimitiveKind.REFLECT: lambda: (
                f"trajectory={payload['trajectory']} "
                f"guidance={payload.get('template_guidance', '')[:120]}"
            ),
            PrimitiveKind.DELIBERATE: lambda: (
                f"action={payload['recommended_action']} warrant={payload['warrant'][:160]}"
            ),
            PrimitiveKind.GOVERN: lambda: (
                f"tier={payload['tier_applied']} disposition={payload['disposition']}"
            ),
            PrimitiveKind.GENERATE: lambda: f"format={payload['format']}",
        }[step.kind]()
        return (
            f"[{step.step_name}] {step.kind.value}: {key} "
            f"(confidence={step.output.confidence:.2f})"
        )

    def _params_for(self, kind: PrimitiveKind, decision) -> dict:
        params: dict = {}
        if self.workflow.mode == "workflow":
            position = self.view.steps_executed
            if position < len(self.workflow.declared_steps):
                declared = self.workflow.declared_steps[position]
                if declared["primitive"] == kind.value:
                    params.update(declared["params"])
        if kind is PrimitiveKind.RETRIEVE and "sources" not in params:
            retrieved = {
                s
                for step in self.steps
                if step.kind is PrimitiveKind.RETRIEVE
                for s in step.output.payload["sources_queried"]
            }
            remaining = [
                name for name in self.domain.knowledge_sources if name not in retrieved
            ]
            params["sources"] = remaining[:1] if remaining else sorted(
                self.domain.knowledge_sources
            )
        elif kind is PrimitiveKind.CLASSIFY and "categories" not in params:
            params["categories"] = ", ".join(sorted(self.domain.compatibility_map))
        elif kind is PrimitiveKind.INVESTIGATE and "question" not in params:
            params["question"] = (
                self._pending_guidance
                or f"Resolve the open questions bearing on: {self.workflow.goal}"
            )
        elif kind is PrimitiveKind.VERIFY and "rules" not in params:
            params["rules"] = list(self.domain.verification_rules)
        elif kind is PrimitiveKind.DELIBERATE:
            if self._pending_deliberate_params:
                params.update(self._pending_deliberate_params)
                self._pending_deliberate_params = None
        elif kind is PrimitiveKind.REFLECT and self._pending_guard_focus():
            params["focus"] = self._pending_guard_focus()
        return params

    def _pending_guard_focus(self) -> str:
        if self._pending_guard is None:
            return ""
        verdict = self._pending_guard
        return (
            f"post-challenge guard analysis: basis={verdict.basis}; {verdict.detail}"
        )

    def _check_transition_condition(self, step: StepRecord):
        position = self.view.steps_executed - 1
        if position >= len(self.workflow.declared_steps):
            return
        declared = self.workflow.declared_steps[position]
        condition = declared.get("transition_condition")
        if condition and not evaluate_gate_trigger(condition, step.state):
            # condition failed: route straight to governance review
            self._append(
                "governance_action",
                {
                    "action": "transition_condition_failed",
                    "step_name": step.step_name,
                    "condition": condition,
                },
            )
            self.view.declared_sequence = self.view.declared_sequence[
                : self.view.steps_executed
            ]

    # -- persistence hook -------------------------------------------------------

    def _store_update(self):
        if self.on_update is not None:
            self.on_update(self, None)

    def summary(self) -> dict:
        order = self.work_order
        return {
            "instance_id": self.instance_id,
            "case_id": self.case.case_id,
            "domain": self.domain.domain_id,
            "mode": self.workflow.mode,
            "status": self.status,
            "tier": self.tier_lock.tier.value if self.tier_lock else None,
            "disposition": (
                self.determination.disposition if self.determination else None
            ),
            "record_label": self.record.label(),
            "steps": len(self.steps),
            "flags": [
                {"kind": f.kind, "severity": f.severity, "step": s.step_id}
                for s in self.record.steps
                for f in s.flags
            ],
            "hitl_state": order.state.value if order else None,
            "work_order": (
                {
                    "order_id": order.order_id,
                    "mode": order.mode,
                    "kind": order.kind,
                    "state": order.state.value,
                    "sla_deadline": order.sla_deadline,
                    "assignee": order.assignee,
                }
                if order
                else None
            ),
            "ledger_entries": self.ledger.next_index(),
            "ledger_head": self.ledger.head_hash,
        }
