"""Discrete-event execution core.

Each step is an atomic component with a phase and a time advance; the
workflow instance is a coupled model of those components. Suspension is a
component waiting at an infinite time advance; resumption is an external
event injected into it. The event loop is single-threaded: injection is the
only operation callable from other threads, and it lands in a serialized
queue drained between scheduling rounds.

Scheduling uses logical time only. Wall-clock durations belong in entry
metadata, never in the schedule, so replays of the same injection sequence
produce the same step order.
"""

from __future__ import annotations

import heapq
import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional

from .errors import IllegalPhase, MultipleActive, StepLimitExceeded, UnknownTarget

INFINITY = math.inf

# Kernel-level cap on executed steps, distinct from workflow max_steps;
# guards against orchestrator livelock.
STEP_CAP = 64


class Phase(str, Enum):
    IDLE = "idle"
    ACTIVE = "active"
    AWAITING_RESULT = "awaiting_result"
    DONE = "done"


class _Terminated:
    def __repr__(self) -> str:  # pragma: no cover
        return "TERMINATED"


TERMINATED = _Terminated()


@dataclass
class StepComponent:
    """One atomic component. Only the active phase has a finite time advance."""

    step_id: str
    primitive: str
    phase: Phase = Phase.IDLE
    time_advance: float = INFINITY
    counts_as_step: bool = True
    pending_result: Any = None

    def set_active(self) -> None:
        self.phase = Phase.ACTIVE
        self.time_advance = 0.0

    def set_awaiting(self) -> None:
        self.phase = Phase.AWAITING_RESULT
        self.time_advance = INFINITY

    def set_idle(self) -> None:
        self.phase = Phase.IDLE
        self.time_advance = INFINITY

    def set_done(self) -> None:
        self.phase = Phase.DONE
        self.time_advance = INFINITY


@dataclass(frozen=True)
class InjectedEvent:
    target: str
    payload: Any
    sequence: Optional[int] = None


@dataclass
class Completed:
    """Executor outcome: work finished synchronously.

    route=False completes without activating anything (halt paths)."""

    payload: Any = None
    activate: Optional[str] = None
    route: bool = True


class Awaiting:
    """Executor outcome: completion will arrive later via inject()."""


@dataclass
class TerminalReport:
    status: str  # "terminated" | "suspended"
    executed_steps: list[str] = field(default_factory=list)
    clock: int = 0
    pending_work_order: Optional[str] = None


class WorkflowModel:
    """Coupled model: ordered components plus a routing map.

    ``couplings`` maps a component to the component activated by its
    completion; orchestrator decisions override the route per completion by
    carrying an ``__activate__`` key in the payload.
    """

    def __init__(self) -> None:
        self.components: dict[str, StepComponent] = {}
        self.couplings: dict[str, Optional[str]] = {}
        self.clock = 0
        self.pending_work_order: Optional[str] = None
        self._queue: list[tuple[int, int, InjectedEvent]] = []
        self._lock = threading.Lock()
        self._arrived = threading.Condition(self._lock)
        self._seq = 0
        self._arrivals = 0
        self._last_processed_seq = 0

    def add_component(
        self, component: StepComponent, routes_to: Optional[str] = None
    ) -> StepComponent:
        self.components[component.step_id] = component
        self.couplings[component.step_id] = routes_to
        return self

    def component(self, step_id: str) -> StepComponent:
        try:
            return self.components[step_id]
        except KeyError:
            raise UnknownTarget(step_id) from None

    def inject(self, event: InjectedEvent) -> dict:
        """Queue a completion for an awaiting component. Thread-safe.

        Events are processed in strict sequence order when the loop drains
        the queue, regardless of arrival thread.
        """
        component = self.component(event.target)
        if component.phase is not Phase.AWAITING_RESULT:
            raise IllegalPhase(
                f"{event.target} is {component.phase.value}, not awaiting_result"
            )
        with self._lock:
            if event.sequence is None:
                self._seq += 1
                event = InjectedEvent(event.target, event.payload, self._seq)
            else:
                self._seq = max(self._seq, event.sequence)
            self._arrivals += 1
            heapq.heappush(self._queue, (event.sequence, self._arrivals, event))
            self._arrived.notify_all()
        return {"accepted": True, "sequence": event.sequence}

    def has_pending_events(self) -> bool:
        with self._lock:
            return bool(self._queue)

    def wait_for_event(self, timeout: Optional[float] = None) -> bool:
        """Block until an injection arrives. Used while a completion is in
        flight on another thread."""
        with self._lock:
            if self._queue:
                return True
            return self._arrived.wait(timeout)

    def drain(self) -> list[InjectedEvent]:
        with self._lock:
            events = [heapq.heappop(self._queue)[2] for _ in range(len(self._queue))]
        for event in events:
            if event.sequence <= self._last_processed_seq:
                raise IllegalPhase(
                    f"injection sequence {event.sequence} does not increase"
                )
            self._last_processed_seq = event.sequence
        return events

    def assert_single_active(self) -> None:
        active = [c.step_id for c in self.components.values() if c.phase is Phase.ACTIVE]
        if len(active) > 1:
            raise MultipleActive(", ".join(active))


def schedule(model: WorkflowModel):
    """Return the unique component with minimal finite time advance.

    TERMINATED when every component reports INFINITY and nothing is queued.
    """
    finite = [
        c for c in model.components.values() if c.time_advance != INFINITY
    ]
    if not finite:
        if model.has_pending_events():
            return None  # drain first
        return TERMINATED
    zeros = [c for c in finite if c.time_advance == 0.0]
    if len(zeros) > 1:
        raise MultipleActive(", ".join(c.step_id for c in zeros))
    return min(finite, key=lambda c: c.time_advance).step_id


Executor = Callable[[StepComponent], Any]


def run_to_quiescence(
    model: WorkflowModel,
    executor: Executor,
    step_cap: int = STEP_CAP,
    wait_timeout: Optional[float] = 300.0,
) -> TerminalReport:
    """Drive the model until it terminates or suspends.

    Repeatedly drains injections, schedules the single active component, and
    invokes the executor. A suspension is every component at INFINITY with a
    work order pending.
    """
    report = TerminalReport(status="terminated")
    while True:
        for event in model.drain():
            component = model.component(event.target)
            component.pending_result = event.payload
            component.set_active()
            model.assert_single_active()

        nxt = schedule(model)
        if nxt is None:
            continue
        if nxt is TERMINATED:
            if model.pending_work_order is not None:
                report.status = "suspended"
                break
            awaiting = any(
                c.phase is Phase.AWAITING_RESULT for c in model.components.values()
            )
            if awaiting:
                # a completion is in flight on another thread
                model.wait_for_event(timeout=wait_timeout)
                continue
            report.status = "terminated"
            break

        component = model.component(nxt)
        if component.pending_result is not None:
            payload = component.pending_result
            component.pending_result = None
            _complete(model, component, payload, report, step_cap)
        else:
            outcome = executor(component)
            if isinstance(outcome, Completed):
                component.set_idle()
                _complete(model, component, outcome.payload, report, step_cap,
                          activate=outcome.activate, route=outcome.route)
            elif isinstance(outcome, Awaiting) or outcome is Awaiting:
                component.set_awaiting()
            else:
                raise TypeError(f"executor returned {outcome!r}")
        model.assert_single_active()

    report.clock = model.clock
    report.pending_work_order = model.pending_work_order
    return report


def _complete(
    model: WorkflowModel,
    component: StepComponent,
    payload: Any,
    report: TerminalReport,
    step_cap: int,
    activate: Optional[str] = None,
    route: bool = True,
) -> None:
    component.set_idle()
    model.clock += 1
    if component.counts_as_step:
        report.executed_steps.append(component.step_id)
        if len(report.executed_steps) > step_cap:
            raise StepLimitExceeded(
                f"kernel safety cap of {step_cap} executed steps reached"
            )
    if not route:
        return
    if activate is None and isinstance(payload, dict):
        activate = payload.get("__activate__")
    if activate is None:
        activate = model.couplings.get(component.step_id)
    if activate is not None:
        model.component(activate).set_active()
