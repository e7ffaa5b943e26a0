"""REST API, SSE trace streaming, reviewer endpoints, and the QA sampler.

The HTTP layer never mutates instances directly: reviewer actions submit
HITL transitions through the runtime, and the tier lock is only ever touched
by governance paths. Each instance runs on its own thread; the API reads
store snapshots and ledger files.

Auth is a static bearer-token scheme with two roles. Tokens come from
GOVCORE_OPERATOR_TOKEN / GOVCORE_REVIEWER_TOKEN (development defaults are
"operator-token" and "reviewer-token").
"""

from __future__ import annotations

import asyncio
import json
import os
import random
import threading
import uuid
from datetime import datetime, timezone
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.responses import (
    HTMLResponse,
    JSONResponse,
    PlainTextResponse,
    StreamingResponse,
)

from .clock import SimulatedClock, SystemClock
from .errors import GovcoreError, IllegalStateTransition, UnauthorizedActor
from .hitl import HitlState, sweep as hitl_sweep
from .ledger import verify_entries
from .llm import ScriptedBackend, ScriptedChooser
from .replay import data_file, load_bundle
from .runtime import InstanceRuntime
from .safety import KillSwitch
from .store import InstanceStore

DEFAULT_DOMAIN_FILE = "prior_auth_appeal.yaml"
DEFAULT_WORKFLOW_FILE = "appeal_agentic.yaml"


def _tokens_from_env() -> dict:
    return {
        os.environ.get("GOVCORE_OPERATOR_TOKEN", "operator-token"): "operator",
        os.environ.get("GOVCORE_REVIEWER_TOKEN", "reviewer-token"): "reviewer",
    }


def trace_event(entry) -> Optional[tuple[str, dict]]:
    """Map a ledger entry to its SSE trace event, if it has one."""
    content = entry.content
    if entry.entry_type == "orchestrator_decision":
        return "orchestrator_decision", content
    if entry.entry_type == "step_completed":
        return "step_completed", content
    if entry.entry_type == "governance_action":
        if content.get("action") == "determination":
            return "governance_action", content
        return None
    if entry.entry_type == "hitl_transition":
        if content.get("to") == "resumed":
            return "resumed", content
        return None
    if entry.entry_type == "system":
        event = content.get("event")
        if event == "instance_suspended":
            return "suspended", content
        if event == "instance_resumed":
            return "resumed", content
        if event in ("instance_completed", "instance_terminated", "halted"):
            return "completed", content
    return None


def qa_sample(instance_ids: list[str], rate: float, seed: int) -> list[str]:
    """Deterministic selection of completed SPOT_CHECK instances for QA."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must be in [0, 1]")
    ordered = sorted(instance_ids)
    k = int(round(rate * len(ordered)))
    return sorted(random.Random(seed).sample(ordered, k))


class ServiceState:
    def __init__(self, data_dir: str, fixture_dir: Optional[str] = None):
        self.store = InstanceStore(data_dir)
        self.fixture_dir = fixture_dir
        self.runtimes: dict[str, InstanceRuntime] = {}
        self.kill_switch = KillSwitch()
        self.created_at: dict[str, str] = {}
        self.lock = threading.Lock()
        self.store.recover()

    def now(self) -> str:
        return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")

    def persist(self, runtime: InstanceRuntime, _entry=None) -> None:
        created = self.created_at.setdefault(runtime.instance_id, self.now())
        self.store.upsert(runtime.summary(), created, self.now())

    def launch(self, case_id: str, domain_file: str, workflow_file: str,
               use_sim_clock: bool) -> str:
        domain, workflow, case, script = load_bundle(
            case_id,
            domain_file=domain_file,
            workflow_file=workflow_file,
            data_dir=self.fixture_dir,
        )
        instance_id = f"inst-{uuid.uuid4().hex[:12]}"
        runtime = InstanceRuntime(
            instance_id=instance_id,
            case=case,
            domain=domain,
            workflow=workflow,
            backend=ScriptedBackend(script),
            chooser=ScriptedChooser(script.chooser, case_id=case_id),
            ledger=self.store.open_ledger(instance_id),
            clock=SimulatedClock() if use_sim_clock else SystemClock(),
            kill_switch=self.kill_switch,
            on_update=self.persist,
        )
        with self.lock:
            self.runtimes[instance_id] = runtime

        def run_guarded():
            try:
                runtime.run()
            except Exception as exc:  # surface, never lose the instance row
                runtime.status = "terminated"
                try:
                    runtime._append(
                        "system",
                        {"event": "instance_terminated", "status": "terminated",
                         "reason": f"run error: {exc}"[:300]},
                    )
                except Exception:
                    self.persist(runtime)

        thread = threading.Thread(target=run_guarded, daemon=True)
        thread.start()
        thread.join(timeout=30.0)  # scripted runs are fast; keep API simple
        return instance_id

    def runtime_for(self, instance_id: str) -> InstanceRuntime:
        with self.lock:
            runtime = self.runtimes.get(instance_id)
        if runtime is not None:
            return runtime
        summary = self.store.get(instance_id)
        if summary is None:
            raise KeyError(instance_id)
        if summary.get("status") != "suspended":
            raise IllegalStateTransition(summary.get("status") or "unknown", "review")
        domain, workflow, case, _ = load_bundle(
            summary["case_id"],
            domain_file=DEFAULT_DOMAIN_FILE,
            workflow_file=DEFAULT_WORKFLOW_FILE,
            data_dir=self.fixture_dir,
        )
        runtime = InstanceRuntime.restore_suspended(
            instance_id,
            case,
            domain,
            workflow,
            self.store.open_ledger(instance_id),
            on_update=self.persist,
        )
        with self.lock:
            self.runtimes[instance_id] = runtime
        return runtime


def create_app(
    data_dir: str,
    tokens: Optional[dict] = None,
    fixture_dir: Optional[str] = None,
    heartbeat_seconds: float = 15.0,
    poll_seconds: float = 0.05,
    sim_clock_for_scripted: bool = True,
) -> FastAPI:
    state = ServiceState(data_dir, fixture_dir=fixture_dir)
    token_roles = tokens if tokens is not None else _tokens_from_env()
    app = FastAPI(title="govcore", version="0.1.0")
    app.state.service = state

    def role_of(request: Request) -> str:
        header = request.headers.get("authorization", "")
        if not header.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="bearer token required")
        role = token_roles.get(header[len("Bearer "):])
        if role is None:
            raise HTTPException(status_code=401, detail="unknown token")
        return role

    def require_reviewer(request: Request) -> str:
        role = role_of(request)
        if role != "reviewer":
            raise HTTPException(status_code=403, detail="reviewer role required")
        return role

    def summary_or_404(instance_id: str) -> dict:
        summary = state.store.get(instance_id)
        if summary is None:
            raise HTTPException(status_code=404, detail="unknown instance")
        return summary

    @app.post("/api/start")
    def start(body: dict, role: str = Depends(role_of)):
        case_id = body.get("case_id")
        if not case_id:
            raise HTTPException(status_code=422, detail="case_id required")
        backend = body.get("backend", "scripted")
        if backend != "scripted":
            raise HTTPException(
                status_code=422, detail="this deployment starts scripted runs only"
            )
        try:
            instance_id = state.launch(
                case_id,
                body.get("domain_file", DEFAULT_DOMAIN_FILE),
                body.get("workflow_file", DEFAULT_WORKFLOW_FILE),
                use_sim_clock=sim_clock_for_scripted,
            )
        except FileNotFoundError as exc:
            raise HTTPException(status_code=404, detail=f"unknown case: {exc}")
        return {
            "instance_id": instance_id,
            "stream_url": f"/instances/{instance_id}/trace",
        }

    @app.get("/api/instances")
    def list_instances(role: str = Depends(role_of)):
        return {"instances": state.store.list()}

    @app.get("/api/instances/{instance_id}")
    def get_instance(instance_id: str, role: str = Depends(role_of)):
        summary = summary_or_404(instance_id)
        entries = state.store.read_entries(instance_id)
        summary["ledger"] = [e.to_record() for e in entries]
        return summary

    @app.get("/api/instances/{instance_id}/export")
    def export_ledger(instance_id: str, role: str = Depends(role_of)):
        """Stream the ledger in its on-disk form: one canonical JSON entry
        per line."""
        summary_or_404(instance_id)
        lines = [
            json.dumps(e.to_record(), sort_keys=True, separators=(",", ":"))
            for e in state.store.read_entries(instance_id)
        ]
        body = "\n".join(lines) + ("\n" if lines else "")
        return PlainTextResponse(body, media_type="application/x-ndjson")

    @app.get("/api/instances/{instance_id}/verify")
    def verify_instance(instance_id: str, role: str = Depends(role_of)):
        summary_or_404(instance_id)
        entries = state.store.read_entries(instance_id)
        verification = verify_entries(entries)
        return {
            "chain_valid": verification.chain_valid,
            "first_broken_index": verification.first_broken_index,
            "entries_checked": verification.entries_checked,
        }

    @app.get("/api/instances/{instance_id}/redaction-map")
    def redaction_map(instance_id: str, role: str = Depends(require_reviewer)):
        summary_or_404(instance_id)
        with state.lock:
            runtime = state.runtimes.get(instance_id)
        if runtime is None:
            raise HTTPException(
                status_code=404, detail="redaction map not available for this instance"
            )
        return {"scope": instance_id, "tokens": runtime.redaction_map.tokens}

    @app.post("/api/instances/{instance_id}/review/{action}")
    def review(instance_id: str, action: str, body: Optional[dict] = None,
               role: str = Depends(require_reviewer)):
        summary_or_404(instance_id)
        body = body or {}
        actor = body.get("actor", "reviewer")
        note = body.get("note", "")
        try:
            runtime = state.runtime_for(instance_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown instance")
        except IllegalStateTransition as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        try:
            if action == "accept":
                runtime.review_transition(HitlState.ASSIGNED, actor, "reviewer", note)
                runtime.review_transition(HitlState.UNDER_REVIEW, actor, "reviewer", note)
            elif action == "approve":
                runtime.review_transition(HitlState.APPROVED, actor, "reviewer", note)
                runtime.resolve(actor=actor)
            elif action == "reject":
                resume = bool(body.get("resume"))
                if resume and runtime.backend is None:
                    raise HTTPException(
                        status_code=409,
                        detail="re-entry is unavailable for instances restored "
                               "after a restart; requeue or terminate instead",
                    )
                runtime.review_transition(HitlState.REJECTED, actor, "reviewer", note)
                status = runtime.resolve(resume_requested=resume, actor=actor)
                if status == "running":
                    reenter_step = body.get("reenter_step", "deliberate")
                    runtime.reenter(reenter_step, note or "reviewer instructions")
            elif action in ("requeue", "reassign"):
                # the nine-state table's only path back is timed_out ->
                # pending_review; reassignment happens by re-accepting
                runtime.review_transition(
                    HitlState.PENDING_REVIEW, actor, "reviewer", note
                )
            else:
                raise HTTPException(status_code=404, detail=f"unknown action {action}")
        except IllegalStateTransition as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except UnauthorizedActor as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        except GovcoreError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return state.store.get(instance_id)

    @app.post("/api/sweep")
    def run_sweep(role: str = Depends(role_of)):
        timed_out = []
        with state.lock:
            runtimes = list(state.runtimes.values())
        for runtime in runtimes:
            if runtime.work_order is None:
                continue
            swept = hitl_sweep(
                [runtime.work_order],
                datetime.now(timezone.utc),
                ledger_for=lambda order: runtime._hitl_hook,
            )
            if swept:
                runtime._store_update()
                timed_out.extend(o.order_id for o in swept)
        return {"timed_out": timed_out}

    @app.get("/api/qa/sample")
    def qa(rate: float = 0.1, seed: int = 7, role: str = Depends(role_of)):
        candidates = [
            s["instance_id"]
            for s in state.store.list()
            if s.get("status") == "completed" and s.get("tier") == "SPOT_CHECK"
        ]
        try:
            sampled = qa_sample(candidates, rate, seed)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        now = state.now()
        for instance_id in sampled:
            summary = state.store.get(instance_id)
            summary["qa_sampled"] = True
            state.store.upsert(summary, summary.get("created_at") or now, now)
        return {"sampled": sampled, "rate": rate, "seed": seed}

    async def sse_stream(instance_id: str, after: int):
        last_sent = after
        elapsed = 0.0
        while True:
            entries = state.store.read_entries(instance_id, after=last_sent)
            for entry in entries:
                last_sent = entry.index
                mapped = trace_event(entry)
                if mapped is None:
                    continue
                event_type, content = mapped
                data = json.dumps(
                    {"sequence": entry.index, "payload": content}, sort_keys=True
                )
                yield f"id: {entry.index}\nevent: {event_type}\ndata: {data}\n\n"
                if event_type == "completed":
                    return
            await asyncio.sleep(poll_seconds)
            elapsed += poll_seconds
            if elapsed >= heartbeat_seconds:
                elapsed = 0.0
                yield ": keepalive\n\n"

    @app.get("/instances/{instance_id}/trace")
    def trace(instance_id: str, request: Request, role: str = Depends(role_of)):
        summary_or_404(instance_id)
        accept = request.headers.get("accept", "")
        if "text/event-stream" in accept:
            last_id = request.headers.get(
                "last-event-id", request.query_params.get("last_event_id", "")
            )
            after = int(last_id) if str(last_id).strip().isdigit() else -1
            return StreamingResponse(
                sse_stream(instance_id, after), media_type="text/event-stream"
            )
        entries = state.store.read_entries(instance_id)
        rows = []
        for entry in entries:
            mapped = trace_event(entry)
            if mapped is None:
                continue
            event_type, content = mapped
            indent = "&nbsp;&nbsp;" if event_type == "orchestrator_decision" else ""
            rows.append(
                f"<tr><td>{entry.index}</td><td>{indent}{event_type}</td>"
                f"<td><code>{json.dumps(content, sort_keys=True)[:240]}</code></td></tr>"
            )
        html = (
            "<html><head><title>trace</title></head><body>"
            f"<h1>Trace {instance_id}</h1>"
            "<table border='1'><tr><th>#</th><th>event</th><th>payload</th></tr>"
            + "".join(rows)
            + "</table></body></html>"
        )
        return HTMLResponse(html)

    @app.exception_handler(GovcoreError)
    def govcore_error(_request, exc):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    return app
