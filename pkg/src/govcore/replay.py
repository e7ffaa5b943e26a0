"""Deterministic replay of scripted cases.

A replay binds a packaged case, its trajectory script, a simulated clock,
and a deterministic instance id, so two runs of the same script produce
byte-identical ledger files.
"""

from __future__ import annotations

import os
from importlib import resources
from typing import Optional

from .clock import SimulatedClock
from .config import CaseInput, DomainConfig, WorkflowConfig, load_case, load_domain, load_workflow
from .ledger import Ledger
from .llm import ScriptedBackend, ScriptedChooser, TrajectoryScript
from .runtime import InstanceRuntime, RunResult
from .safety import KillSwitch


def packaged_data_dir() -> str:
    return str(resources.files("govcore") / "data")


def data_file(*parts: str, data_dir: Optional[str] = None) -> str:
    return os.path.join(data_dir or packaged_data_dir(), *parts)


def load_bundle(
    case_id: str,
    domain_file: str = "prior_auth_appeal.yaml",
    workflow_file: str = "appeal_agentic.yaml",
    data_dir: Optional[str] = None,
) -> tuple[DomainConfig, WorkflowConfig, CaseInput, TrajectoryScript]:
    domain = load_domain(data_file("domains", domain_file, data_dir=data_dir))
    workflow = load_workflow(data_file("workflows", workflow_file, data_dir=data_dir))
    case = load_case(data_file("cases", f"{case_id}.json", data_dir=data_dir), domain)
    script = TrajectoryScript.from_file(
        data_file("scripts", f"{case_id}.json", data_dir=data_dir)
    )
    return domain, workflow, case, script


def replay_case(
    case_id: str,
    instance_id: Optional[str] = None,
    ledger_path: Optional[str] = None,
    data_dir: Optional[str] = None,
    domain: Optional[DomainConfig] = None,
    kill_switch: Optional[KillSwitch] = None,
    on_update=None,
    ledger: Optional[Ledger] = None,
) -> tuple[RunResult, InstanceRuntime]:
    """Run one scripted case to quiescence under the simulated clock."""
    loaded_domain, workflow, case, script = load_bundle(case_id, data_dir=data_dir)
    if domain is not None:
        loaded_domain = domain
    runtime = InstanceRuntime(
        instance_id=instance_id or f"replay-{case_id}",
        case=case,
        domain=loaded_domain,
        workflow=workflow,
        backend=ScriptedBackend(script),
        chooser=ScriptedChooser(script.chooser, case_id=case_id),
        ledger=ledger if ledger is not None else Ledger(path=ledger_path),
        clock=SimulatedClock(),
        kill_switch=kill_switch,
        on_update=on_update,
    )
    result = runtime.run()
    return result, runtime
