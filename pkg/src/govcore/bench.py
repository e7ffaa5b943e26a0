"""Benchmark harness: replay the 11-case balanced set and score it.

Disposition correctness is scored against ground truth only; the governance
tier is evaluated separately and never enters the accuracy score. A silent
error is an incorrect determination that would execute without review: for
governed systems, wrong at AUTO or SPOT_CHECK; for ungoverned baselines,
wrong at all. Baselines replay from recorded outcome fixtures, not live
prompts.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

from .errors import GovcoreError
from .replay import data_file, replay_case

GOVERNED_SYSTEMS = {"cc_scripted"}
BASELINE_SYSTEMS = {"react", "plan_and_solve"}
NON_BLOCKING_TIERS = {"AUTO", "SPOT_CHECK"}

CATEGORY_ORDER = ["OVERTURN", "UPHOLD", "REMAND", "PARTIAL", "CONTESTED"]


class MissingScript(GovcoreError):
    pass


@dataclass
class BenchRow:
    case_id: str
    system: str
    category: str
    ground_truth: str
    disposition: str
    tier: Optional[str]
    correct: bool
    silent_error: bool


@dataclass
class BenchResult:
    system: str
    rows: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.rows)

    @property
    def correct(self) -> int:
        return sum(1 for r in self.rows if r.correct)

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def silent_errors(self) -> int:
        return sum(1 for r in self.rows if r.silent_error)

    def tier_fraction(self, tier: str) -> float:
        if not self.total:
            return 0.0
        return sum(1 for r in self.rows if r.tier == tier) / self.total

    @property
    def spot_check_fraction(self) -> float:
        return self.tier_fraction("SPOT_CHECK")

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "correct": self.correct,
            "total": self.total,
            "accuracy": round(self.accuracy, 4),
            "silent_errors": self.silent_errors,
            "spot_check_fraction": round(self.spot_check_fraction, 4),
            "rows": [
                {
                    "case_id": r.case_id,
                    "category": r.category,
                    "ground_truth": r.ground_truth,
                    "disposition": r.disposition,
                    "tier": r.tier,
                    "correct": r.correct,
                    "silent_error": r.silent_error,
                }
                for r in self.rows
            ],
        }


def score_row(
    case_id: str,
    system: str,
    category: str,
    ground_truth: str,
    disposition: str,
    tier: Optional[str],
) -> BenchRow:
    correct = disposition == ground_truth
    if system in GOVERNED_SYSTEMS:
        silent = (not correct) and (tier in NON_BLOCKING_TIERS)
    else:
        silent = not correct
    return BenchRow(case_id, system, category, ground_truth, disposition, tier,
                    correct, silent)


def load_manifest(data_dir: Optional[str] = None) -> list[dict]:
    with open(data_file("bench", "manifest.json", data_dir=data_dir)) as fh:
        return json.load(fh)["cases"]


def run_bench(system: str, data_dir: Optional[str] = None) -> BenchResult:
    manifest = load_manifest(data_dir)
    result = BenchResult(system=system)
    if system in GOVERNED_SYSTEMS:
        for entry in manifest:
            case_id = entry["case_id"]
            try:
                run, _ = replay_case(
                    case_id, instance_id=f"bench-{case_id}", data_dir=data_dir
                )
            except FileNotFoundError as exc:
                raise MissingScript(f"{case_id}: {exc}") from exc
            result.rows.append(
                score_row(
                    case_id,
                    system,
                    entry["category"],
                    entry["ground_truth"],
                    run.disposition or "",
                    run.tier.value if run.tier else None,
                )
            )
    elif system in BASELINE_SYSTEMS:
        with open(data_file("bench", "baseline_outcomes.json", data_dir=data_dir)) as fh:
            outcomes = json.load(fh)[system]
        for entry in manifest:
            case_id = entry["case_id"]
            if case_id not in outcomes:
                raise MissingScript(f"no recorded outcome for {case_id} ({system})")
            result.rows.append(
                score_row(
                    case_id,
                    system,
                    entry["category"],
                    entry["ground_truth"],
                    outcomes[case_id],
                    None,
                )
            )
    else:
        raise ValueError(f"unknown system {system!r}")
    return result


def tier_calibration(result: BenchResult) -> dict:
    """Per-tier fractions plus a degenerate-posture warning.

    A run that routes everything to GATE keeps the governance property but
    eliminates reviewer workload reduction; that is a calibration failure,
    not a win.
    """
    tiers = ["AUTO", "SPOT_CHECK", "GATE", "HOLD"]
    fractions = {tier: result.tier_fraction(tier) for tier in tiers}
    warnings = []
    if result.total and fractions["GATE"] + fractions["HOLD"] >= 1.0:
        warnings.append(
            "degenerate posture: every case routed to a suspending tier"
        )
    non_silent_errors = [
        r.case_id for r in result.rows if not r.correct and not r.silent_error
    ]
    return {
        "fractions": fractions,
        "warnings": warnings,
        "non_silent_errors": non_silent_errors,
    }


def emit_report(results: list[BenchResult], fmt: str = "text") -> str:
    if fmt == "json":
        payload = {r.system: r.to_dict() for r in results}
        for result in results:
            if result.system in GOVERNED_SYSTEMS:
                payload[result.system]["calibration"] = tier_calibration(result)
        return json.dumps(payload, indent=2, sort_keys=True)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(
            ["case_id", "category", "system", "ground_truth", "disposition",
             "tier", "correct", "silent_error"]
        )
        for result in results:
            for row in _ordered(result.rows):
                writer.writerow(
                    [row.case_id, row.category, row.system, row.ground_truth,
                     row.disposition, row.tier or "", row.correct, row.silent_error]
                )
        for result in results:
            writer.writerow(
                ["TOTAL", "", result.system, "", "",
                 "", f"{result.correct}/{result.total}", result.silent_errors]
            )
        return buf.getvalue()
    if fmt == "text":
        lines = []
        header = f"{'case':6s} {'cat':10s} {'gt':9s}"
        for result in results:
            header += f" | {result.system}"
        lines.append(header)
        by_system = {r.system: {row.case_id: row for row in r.rows} for r in results}
        for row in _ordered(results[0].rows):
            line = f"{row.case_id:6s} {row.category:10s} {row.ground_truth:9s}"
            for result in results:
                cell = by_system[result.system].get(row.case_id)
                mark = "ok " if cell and cell.correct else "X  "
                tier = f"/{cell.tier}" if cell and cell.tier else ""
                line += f" | {cell.disposition if cell else '?'}{tier} {mark}"
            lines.append(line)
        for result in results:
            lines.append(
                f"{result.system}: {result.correct}/{result.total} correct, "
                f"{result.silent_errors} silent errors, "
                f"spot_check {result.spot_check_fraction:.0%}"
            )
        return "\n".join(lines)
    raise ValueError(f"unknown report format {fmt!r}")


def _ordered(rows: list[BenchRow]) -> list[BenchRow]:
    return sorted(
        rows, key=lambda r: (CATEGORY_ORDER.index(r.category), r.case_id)
    )
