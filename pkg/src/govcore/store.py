"""Durable instance store: SQLite rows plus per-instance append-only ledger
files.

The ledger file is the source of truth; every append is fsynced before the
call returns, and the SQLite row is derived state. After a crash, recovery
replays each ledger tail and rewrites the row so the reported status is
consistent with what was durably written. An instance whose ledger ends
mid-run (no terminal entry, no open work order) is reported terminated with
an interruption note; a suspended tail stays suspended and resumable.
"""

from __future__ import annotations

import json
import os
import sqlite3
import threading
from typing import Optional

from .ledger import Ledger, LedgerEntry, read_ledger_file

_SCHEMA = """
CREATE TABLE IF NOT EXISTS instances (
    instance_id TEXT PRIMARY KEY,
    case_id TEXT,
    domain TEXT,
    mode TEXT,
    status TEXT,
    tier TEXT,
    disposition TEXT,
    hitl_state TEXT,
    steps INTEGER DEFAULT 0,
    created_at TEXT,
    updated_at TEXT,
    summary_json TEXT
);
CREATE TABLE IF NOT EXISTS ledger_index (
    instance_id TEXT,
    idx INTEGER,
    entry_type TEXT,
    hash TEXT,
    PRIMARY KEY (instance_id, idx)
);
"""


def derive_status(entries: list[LedgerEntry]) -> dict:
    """Event-sourced view of an instance from its ledger alone."""
    state = {
        "status": "running",
        "tier": None,
        "disposition": None,
        "hitl_state": None,
        "steps": 0,
        "interrupted": False,
        "order_id": None,
    }
    open_order = False
    for entry in entries:
        content = entry.content
        if entry.entry_type == "step_completed":
            state["steps"] += 1
        elif entry.entry_type == "governance_action":
            if content.get("action") == "determination":
                state["tier"] = content.get("tier_applied")
                state["disposition"] = content.get("disposition")
        elif entry.entry_type == "work_order":
            state["order_id"] = content.get("order_id")
            state["hitl_state"] = "suspended"
            open_order = True
        elif entry.entry_type == "hitl_transition":
            state["hitl_state"] = content.get("to")
            if content.get("to") in ("resumed", "terminated"):
                open_order = False
        elif entry.entry_type == "system":
            event = content.get("event")
            if event == "instance_completed":
                state["status"] = "completed"
            elif event == "instance_terminated":
                state["status"] = "terminated"
            elif event == "instance_suspended":
                state["status"] = "suspended"
            elif event == "halted":
                state["status"] = "halted"
            elif event == "instance_resumed":
                state["status"] = "running"
    if state["status"] == "running":
        if open_order:
            state["status"] = "suspended"
        else:
            # crashed mid-run: nothing to resume, report honestly
            state["status"] = "terminated"
            state["interrupted"] = True
    return state


class InstanceStore:
    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        os.makedirs(os.path.join(data_dir, "ledgers"), exist_ok=True)
        self._db = sqlite3.connect(
            os.path.join(data_dir, "govcore.db"), check_same_thread=False
        )
        self._db.execute("PRAGMA journal_mode=WAL")
        self._lock = threading.Lock()
        with self._lock:
            self._db.executescript(_SCHEMA)
            self._db.commit()

    def close(self) -> None:
        with self._lock:
            self._db.close()

    # -- ledgers ---------------------------------------------------------------

    def ledger_path(self, instance_id: str) -> str:
        return os.path.join(self.data_dir, "ledgers", f"{instance_id}.ndjson")

    def open_ledger(self, instance_id: str) -> Ledger:
        return Ledger(
            path=self.ledger_path(instance_id),
            on_append=lambda entry: self._index_entry(instance_id, entry),
        )

    def _index_entry(self, instance_id: str, entry: LedgerEntry) -> None:
        with self._lock:
            self._db.execute(
                "INSERT OR REPLACE INTO ledger_index VALUES (?, ?, ?, ?)",
                (instance_id, entry.index, entry.entry_type, entry.hash),
            )
            self._db.commit()

    def read_entries(self, instance_id: str, after: int = -1) -> list[LedgerEntry]:
        """Read the ledger file, tolerating a torn final line.

        A concurrent reader can catch the writer between buffered write and
        flush; an incomplete last line simply is not durable yet and shows
        up on the next poll.
        """
        path = self.ledger_path(instance_id)
        if not os.path.exists(path):
            return []
        entries = []
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        for i, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                if i == len(lines) - 1:
                    break
                raise
            entries.append(LedgerEntry.from_record(record))
        return [e for e in entries if e.index > after]

    # -- instance rows -----------------------------------------------------------

    def upsert(self, summary: dict, created_at: str, updated_at: str) -> None:
        with self._lock:
            self._db.execute(
                """
                INSERT INTO instances
                    (instance_id, case_id, domain, mode, status, tier, disposition,
                     hitl_state, steps, created_at, updated_at, summary_json)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
                ON CONFLICT(instance_id) DO UPDATE SET
                    status=excluded.status, tier=excluded.tier,
                    disposition=excluded.disposition, hitl_state=excluded.hitl_state,
                    steps=excluded.steps, updated_at=excluded.updated_at,
                    summary_json=excluded.summary_json
                """,
                (
                    summary["instance_id"],
                    summary.get("case_id"),
                    summary.get("domain"),
                    summary.get("mode"),
                    summary.get("status"),
                    summary.get("tier"),
                    summary.get("disposition"),
                    summary.get("hitl_state"),
                    summary.get("steps", 0),
                    created_at,
                    updated_at,
                    json.dumps(summary, sort_keys=True),
                ),
            )
            self._db.commit()

    def get(self, instance_id: str) -> Optional[dict]:
        with self._lock:
            row = self._db.execute(
                "SELECT summary_json, created_at, updated_at FROM instances "
                "WHERE instance_id = ?",
                (instance_id,),
            ).fetchone()
        if row is None:
            return None
        summary = json.loads(row[0])
        summary["created_at"] = row[1]
        summary["updated_at"] = row[2]
        return summary

    def list(self) -> list[dict]:
        with self._lock:
            rows = self._db.execute(
                "SELECT summary_json, created_at, updated_at FROM instances "
                "ORDER BY created_at, instance_id"
            ).fetchall()
        out = []
        for row in rows:
            summary = json.loads(row[0])
            summary["created_at"] = row[1]
            summary["updated_at"] = row[2]
            out.append(summary)
        return out

    def known_instances(self) -> list[str]:
        ledger_dir = os.path.join(self.data_dir, "ledgers")
        ids = {
            name[: -len(".ndjson")]
            for name in os.listdir(ledger_dir)
            if name.endswith(".ndjson")
        }
        with self._lock:
            for (instance_id,) in self._db.execute(
                "SELECT instance_id FROM instances"
            ).fetchall():
                ids.add(instance_id)
        return sorted(ids)

    # -- recovery -----------------------------------------------------------------

    def recover(self) -> list[dict]:
        """Reconcile every row with its ledger tail after a restart."""
        reports = []
        for instance_id in self.known_instances():
            entries = self.read_entries(instance_id)
            derived = derive_status(entries)
            existing = self.get(instance_id) or {"instance_id": instance_id}
            started = next(
                (
                    e.content
                    for e in entries
                    if e.entry_type == "system"
                    and e.content.get("event") == "instance_started"
                ),
                {},
            )
            summary = dict(existing)
            summary.update(
                {
                    "instance_id": instance_id,
                    "case_id": existing.get("case_id") or started.get("case_id"),
                    "domain": existing.get("domain") or started.get("domain_id"),
                    "mode": existing.get("mode") or started.get("mode"),
                    "status": derived["status"],
                    "tier": derived["tier"],
                    "disposition": derived["disposition"],
                    "hitl_state": derived["hitl_state"],
                    "steps": derived["steps"],
                    "interrupted": derived["interrupted"],
                    "ledger_entries": len(entries),
                    "ledger_head": entries[-1].hash if entries else None,
                }
            )
            created = existing.get("created_at") or started.get("timestamp") or ""
            updated = entries[-1].content.get("timestamp", "") if entries else ""
            self.upsert(summary, created, updated)
            reports.append(summary)
        return reports
