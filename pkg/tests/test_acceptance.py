"""Acceptance suite: one test per criterion, at its stated tolerance.

Each test prints a PASS line once its assertions hold (visible under
`pytest tests/test_acceptance.py -s -v`). Criterion 12 belongs to the
reviewer console and lives in frontend/test; the backend half of its
contract is exercised in test_service.py.
"""

from __future__ import annotations

import copy
import itertools
import json
import os
import random
import subprocess
import sys
import time

import pytest

from conftest import make_output
from govcore.bench import run_bench
from govcore.epistemic import CoherenceFlag, MechanicalSignals, compute_overall
from govcore.errors import IllegalStateTransition
from govcore.governance import GovernanceTier, apply_tier
from govcore.hitl import HitlState, LEGAL_TRANSITIONS, transition
from govcore.ledger import Ledger, read_ledger_file, verify_entries
from govcore.orchestrator import (
    DEFAULT_TRANSITION_TABLE,
    OrchestratorView,
    Termination,
    TrajectoryConstraints,
    next_step,
)
from govcore.primitives.kinds import PrimitiveKind
from govcore.replay import load_bundle, replay_case
from govcore.runtime import InstanceRuntime
from govcore.store import InstanceStore, derive_status

from test_hitl import order_in, role_for
from test_ledger import build_random_ledger, mutate_entry
from test_runtime import A001_SEQUENCE, B001_SEQUENCE, G005_SEQUENCE, kinds_of

A001_GOLD_TERMINAL_HASH = (
    "ab58e09b7c138f7952ad97b188291721eb3884b4a6bbf853082a4a68990172f5"
)


def ok(line: str) -> None:
    print(f"[PASS] {line}")


def test_criterion_01_ledger_tamper_detection():
    rng = random.Random(20260810)
    started = time.monotonic()
    for trial in range(1000):
        ledger = build_random_ledger(rng, rng.randint(5, 50))
        clean = ledger.verify()
        assert clean.chain_valid, f"trial {trial}: untampered ledger reported invalid"
        idx = rng.randrange(len(ledger.entries))
        entries = list(ledger.entries)
        entries[idx] = mutate_entry(entries[idx], rng)
        verification = verify_entries(entries)
        assert not verification.chain_valid, f"trial {trial}: mutation missed"
        assert verification.first_broken_index <= idx, (
            f"trial {trial}: broken index {verification.first_broken_index} > {idx}"
        )
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"tamper sweep took {elapsed:.1f}s (budget 10s)"
    ok(f"criterion 1: 1000/1000 tampered ledgers detected at or before the "
       f"mutation; untampered all valid; {elapsed:.1f}s")


def test_criterion_02_deterministic_replay(tmp_path):
    paths = [str(tmp_path / f"a001-{i}.ndjson") for i in (1, 2)]
    heads = []
    for path in paths:
        result, _ = replay_case("A001", ledger_path=path)
        heads.append(result.ledger_head)
    first, second = (open(p, "rb").read() for p in paths)
    assert first == second, "replay ledger files differ"
    assert heads[0] == heads[1]
    assert heads[0] == A001_GOLD_TERMINAL_HASH, (
        f"terminal hash {heads[0]} does not match the committed gold hash"
    )
    ok("criterion 2: A001 replays byte-identical; terminal hash matches gold")


def test_criterion_03_governance_monotonicity():
    tiers = list(GovernanceTier)
    rng = random.Random(77)
    for trial in range(10_000):
        default = rng.choice(tiers)
        lock = None
        proposed = [default]
        for i in range(rng.randint(1, 10)):
            proposal = rng.choice(tiers)
            proposed.append(proposal)
            lock, _ = apply_tier(lock, proposal, "p", i, domain_default=default)
            assert lock.tier.rank >= max(
                t.rank for t in proposed[:-1]
            ), f"trial {trial}: tier regressed"
        assert lock.tier.rank == max(t.rank for t in proposed), (
            f"trial {trial}: final {lock.tier} != max proposed"
        )
    ok("criterion 3: 10000/10000 tier sequences end at the maximum proposed")


def test_criterion_04_warranted_rule_exhaustion():
    flag_kinds = ["CD_MISMATCH", "VD_TENSION", "CONFIDENCE_DROP"]
    checked = 0
    for tenths, size in itertools.product(range(11), range(4)):
        for subset in itertools.combinations(flag_kinds, size):
            flags = [CoherenceFlag.make(k, ("a", "b")) for k in subset]
            overall, warranted = compute_overall(
                MechanicalSignals(citation_rate=tenths / 10), None, flags
            )
            critical = any(f.severity == "critical" for f in flags)
            assert warranted == (overall >= 0.5 and not critical), (
                f"grid point overall={overall} flags={subset}"
            )
            checked += 1
    ok(f"criterion 4: warranted rule holds on all {checked} grid points")


def test_criterion_05_hitl_legality_matrix():
    legal_seen = 0
    illegal_seen = 0
    for source in HitlState:
        for target in HitlState:
            order = order_in(source)
            if (source, target) in LEGAL_TRANSITIONS:
                entries = []
                transition(order, target, actor="rev", role=role_for(target),
                           ledger_append=lambda t, c: entries.append((t, c)))
                assert order.state is target
                assert len(entries) == 1 and entries[0][0] == "hitl_transition"
                legal_seen += 1
            else:
                with pytest.raises(IllegalStateTransition):
                    transition(order, target, actor="rev", role=role_for(target))
                illegal_seen += 1
    assert legal_seen == len(LEGAL_TRANSITIONS) == 13
    assert legal_seen + illegal_seen == 81
    ok(f"criterion 5: 81-pair matrix exact; {legal_seen} legal each ledgered, "
       f"{illegal_seen} illegal each raised")


def test_criterion_06_orchestrator_overrides_randomized():
    rng = random.Random(0xC0FFEE)
    constraints = TrajectoryConstraints(max_steps=24)
    override_fires = 0

    class RandomChooser:
        def __init__(self):
            self.calls = 0

        def __call__(self, view, legal, note=None):
            self.calls += 1
            return rng.choice(legal), "random walk"

    for trial in range(200):
        view = OrchestratorView(mode="agentic", available=frozenset(PrimitiveKind))
        chooser = RandomChooser()
        trajectory = []
        while True:
            before = chooser.calls
            decision = next_step(
                "agentic", view, constraints, DEFAULT_TRANSITION_TABLE, chooser
            )
            if isinstance(decision, Termination):
                assert view.last_kind is PrimitiveKind.GOVERN
                assert chooser.calls == before
                break
            last = view.last_kind
            if last is PrimitiveKind.GENERATE:
                assert decision.chosen is PrimitiveKind.CHALLENGE
                assert chooser.calls == before, "chooser consulted during override"
                override_fires += 1
            if (
                last is PrimitiveKind.CHALLENGE
                and view.last_output.payload["survives"]
            ):
                assert decision.chosen is PrimitiveKind.GOVERN
                assert chooser.calls == before
                override_fires += 1
            kind = decision.chosen
            trajectory.append(kind)
            view.counts[kind.value] = view.counts.get(kind.value, 0) + 1
            view.steps_executed += 1
            view.last_kind = kind
            if kind is PrimitiveKind.CHALLENGE:
                view.last_output = make_output(
                    "challenge", survives=rng.random() < 0.5
                )
            elif kind is PrimitiveKind.REFLECT:
                view.last_reflect_trajectory = "continue"
                view.last_output = make_output("reflect")
            else:
                view.last_output = None
            assert len(trajectory) <= constraints.max_steps
        assert trajectory[-1] is PrimitiveKind.GOVERN
        assert PrimitiveKind.GOVERN not in trajectory[:-1]
    assert override_fires > 0
    ok(f"criterion 6: overrides held on 200/200 randomized trajectories "
       f"({override_fires} override firings, zero chooser calls during any)")


def test_criterion_07_trajectory_replays():
    budgets = {}
    started = time.monotonic()
    result, runtime = replay_case("A001")
    budgets["A001"] = time.monotonic() - started
    assert kinds_of(runtime) == A001_SEQUENCE and len(runtime.steps) == 13
    assert (result.disposition, result.tier) == ("OVERTURN", GovernanceTier.SPOT_CHECK)

    started = time.monotonic()
    result, runtime = replay_case("G005")
    budgets["G005"] = time.monotonic() - started
    assert kinds_of(runtime) == G005_SEQUENCE
    assert runtime.record.reflect_counts["gap_filling"] == 3
    assert (result.disposition, result.tier) == ("OVERTURN", GovernanceTier.SPOT_CHECK)

    started = time.monotonic()
    result, runtime = replay_case("B001")
    budgets["B001"] = time.monotonic() - started
    assert kinds_of(runtime) == B001_SEQUENCE
    assert runtime.record.challenge_cycle_count == 2
    assert not runtime.record.challenge_survived
    assert result.tier is GovernanceTier.GATE and result.status == "suspended"

    assert all(t < 5.0 for t in budgets.values()), budgets
    ok("criterion 7: A001 (13 steps, OVERTURN/SPOT_CHECK), G005 (3 "
       "reflect-retrieve interleaves, OVERTURN/SPOT_CHECK), B001 (2 failed "
       "challenge cycles, GATE); each replay under 5s")


def test_criterion_08_benchmark_metrics():
    cc = run_bench("cc_scripted")
    assert (cc.correct, cc.total) == (10, 11)
    assert cc.silent_errors == 0
    assert cc.spot_check_fraction == pytest.approx(5 / 11)
    react = run_bench("react")
    assert (react.correct, react.silent_errors) == (6, 5)
    ps = run_bench("plan_and_solve")
    assert (ps.correct, ps.silent_errors) == (5, 6)
    ok("criterion 8: CC 10/11 (91%), 0 silent, SPOT_CHECK 5/11; "
       "ReAct 6/11 with 5 silent; Plan-and-Solve 5/11 with 6 silent")


def test_criterion_09_guardrail_governance_coupling(appeal_domain):
    result, runtime = replay_case("G004")
    assert result.tier is GovernanceTier.HOLD
    determination = next(
        e.content for e in runtime.ledger.entries
        if e.entry_type == "governance_action"
        and e.content.get("action") == "determination"
    )
    assert "critical_guardrail_event" in determination["rules_fired"]

    stripped = copy.deepcopy(appeal_domain)
    stripped.guardrails = [
        g for g in stripped.guardrails if g.pattern_id != "force_approve"
    ]
    downgraded, _ = replay_case("G004", domain=stripped)
    assert downgraded.tier.rank < GovernanceTier.HOLD.rank
    ok(f"criterion 9: G004 ends HOLD with the force_approve pattern; removing "
       f"the pattern downgrades to {downgraded.tier.value}")


def test_criterion_10_quality_gate_attempt_semantics():
    from govcore.clock import SimulatedClock
    from govcore.llm import ScriptedBackend, ScriptedChooser, TrajectoryScript

    def rerun_with_deliberate(outputs):
        domain, workflow, case, script = load_bundle("C004")
        raw = {"case_id": "C004", "chooser": script.chooser,
               "steps": [{"step_name": s.step_name, "primitive": s.primitive,
                          "outputs": list(s.outputs)} for s in script.steps]}
        raw["steps"][9]["outputs"] = outputs
        runtime = InstanceRuntime(
            instance_id="qg", case=case, domain=domain, workflow=workflow,
            backend=ScriptedBackend(TrajectoryScript.from_dict(raw)),
            chooser=ScriptedChooser(raw["chooser"], case_id="C004"),
            ledger=Ledger(), clock=SimulatedClock(),
        )
        return runtime.run(), runtime

    domain, workflow, case, script = load_bundle("C004")
    good = dict(script.steps[9].outputs[0])
    recovered, runtime = rerun_with_deliberate(["garbage", "{broken", good])
    assert recovered.tier is GovernanceTier.SPOT_CHECK
    assert len(runtime.step_attempts["deliberate_1"]) == 3

    low = dict(good)
    low["confidence"] = 0.65  # floor 0.7
    escalated, _ = rerun_with_deliberate([low])
    assert escalated.tier is GovernanceTier.GATE
    ok("criterion 10: recovered parse failures do not escalate; a final "
       "confidence below the floor escalates to GATE")


def test_criterion_11_crash_durability(tmp_path):
    runner = os.path.join(os.path.dirname(__file__), "_crash_runner.py")
    rng = random.Random(6)
    # total appends per case, so kill points cover the whole run including
    # the suspension window
    totals = {}
    for case_id in ("A001", "D001", "G004", "B001"):
        result, runtime = replay_case(case_id)
        totals[case_id] = runtime.ledger.next_index()
    # 12 trials pinned to the terminal window (where suspension dispatch
    # lands), 8 sampled over each full run
    trials = []
    for case_id, total in totals.items():
        trials.extend((case_id, k) for k in (total, total - 2, total - 5))
    while len(trials) < 20:
        case_id = rng.choice(["A001", "D001", "G004", "B001"])
        trials.append((case_id, rng.randint(1, totals[case_id])))
    checked = 0
    resumable_checked = 0
    for trial, (case_id, crash_after) in enumerate(trials):
        data_dir = str(tmp_path / f"run{trial}")
        os.makedirs(data_dir, exist_ok=True)
        proc = subprocess.run(
            [sys.executable, runner, data_dir, case_id, str(crash_after)],
            capture_output=True, text=True, timeout=60,
        )
        assert proc.returncode == 42, (
            f"trial {trial}: runner did not crash as scripted: {proc.stderr}"
        )
        instance_id = f"crash-{case_id}"
        store = InstanceStore(data_dir)
        try:
            store.recover()
            row = store.get(instance_id)
            entries = store.read_entries(instance_id)
            assert len(entries) == crash_after, "fsynced appends lost or excess"
            assert verify_entries(entries).chain_valid, "ledger corrupt after crash"
            derived = derive_status(entries)
            assert row["status"] == derived["status"]
            assert row["tier"] == derived["tier"]
            assert row["steps"] == derived["steps"]
            checked += 1
            if derived["status"] == "suspended":
                domain, workflow, case, _ = load_bundle(case_id)
                restored = InstanceRuntime.restore_suspended(
                    instance_id, case, domain, workflow,
                    store.open_ledger(instance_id),
                )
                restored.review_transition(HitlState.ASSIGNED, "rev", "reviewer")
                restored.review_transition(HitlState.UNDER_REVIEW, "rev", "reviewer")
                restored.review_transition(HitlState.APPROVED, "rev", "reviewer")
                assert restored.resolve(actor="rev") == "completed"
                resumable_checked += 1
        finally:
            store.close()
    assert checked == 20
    ok(f"criterion 11: 20/20 randomized kill points recovered consistently "
       f"({resumable_checked} suspended instances resumed after restart)")
