"""Hash-chained, append-only audit ledger.

Every entry hashes to ``SHA256(prior_hash_hex ++ canonical_json(content))``.
The chain seed is ``SHA256("cognitive-core-genesis-v1")``; an all-zeros seed
is accepted on verification behind the ``legacy_genesis`` flag for older
ledgers. Any mutation of content, prior_hash, or hash breaks the chain at or
before the mutated entry.

Canonical serialization is deliberately narrow: string keys, and values that
are strings, integers, booleans, lists, or nested maps. Floats are rejected;
real-valued signals must be fixed to six-decimal strings before they reach
the ledger (``fixed6``), because bit-exact hashing cannot depend on float
formatting.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

from .errors import SerializationError, StorageError

GENESIS_CONSTANT = "cognitive-core-genesis-v1"
CHAIN_SEED = hashlib.sha256(GENESIS_CONSTANT.encode("ascii")).hexdigest()
LEGACY_SEED = "0" * 64

ENTRY_TYPES = frozenset(
    {
        "step_completed",
        "orchestrator_decision",
        "governance_action",
        "hitl_transition",
        "guardrail_event",
        "work_order",
        "system",
    }
)


def canonical_json(content: dict) -> bytes:
    """Serialize content to the canonical byte form that gets hashed.

    UTF-8, keys sorted by code point, separators exactly ``,`` and ``:``,
    non-ASCII escaped as lowercase ``\\uXXXX``, integers only.
    """
    _check_canonical(content, "$")
    return json.dumps(
        content, sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("utf-8")


def _check_canonical(value: Any, path: str) -> None:
    if isinstance(value, bool):
        return
    if isinstance(value, int):
        return
    if isinstance(value, str):
        return
    if isinstance(value, float):
        raise SerializationError(f"{path}: float values are not ledgerable")
    if isinstance(value, list):
        for i, item in enumerate(value):
            _check_canonical(item, f"{path}[{i}]")
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise SerializationError(f"{path}: non-string key {key!r}")
            _check_canonical(item, f"{path}.{key}")
        return
    raise SerializationError(f"{path}: {type(value).__name__} is not ledgerable")


def fixed6(value: float) -> str:
    """Fix a real-valued signal to the six-decimal string convention."""
    return f"{float(value):.6f}"


def entry_hash(prior_hash: str, content: dict) -> str:
    return hashlib.sha256(
        prior_hash.encode("ascii") + canonical_json(content)
    ).hexdigest()


@dataclass(frozen=True)
class LedgerEntry:
    index: int
    entry_type: str
    content: dict
    prior_hash: str
    hash: str

    def to_record(self) -> dict:
        return {
            "index": self.index,
            "entry_type": self.entry_type,
            "content": self.content,
            "prior_hash": self.prior_hash,
            "hash": self.hash,
        }

    @staticmethod
    def from_record(record: dict) -> "LedgerEntry":
        return LedgerEntry(
            index=record["index"],
            entry_type=record["entry_type"],
            content=record["content"],
            prior_hash=record["prior_hash"],
            hash=record["hash"],
        )


@dataclass(frozen=True)
class ChainVerification:
    chain_valid: bool
    first_broken_index: Optional[int]
    entries_checked: int


class Ledger:
    """Append-only ledger for one workflow instance.

    When a ``path`` is given every entry is written as one canonical JSON
    line and fsynced before ``append`` returns; the file is the durable
    record. Appends are serialized with a lock so the owning event loop and
    ad-hoc callers cannot interleave.
    """

    def __init__(
        self,
        path: Optional[str] = None,
        on_append: Optional[Callable[[LedgerEntry], None]] = None,
    ):
        self.path = path
        self.entries: list[LedgerEntry] = []
        self._on_append = on_append
        self._lock = threading.Lock()
        if path is not None and os.path.exists(path):
            self.entries = list(read_ledger_file(path))

    @property
    def head_hash(self) -> str:
        return self.entries[-1].hash if self.entries else CHAIN_SEED

    def next_index(self) -> int:
        return len(self.entries)

    def append(self, entry_type: str, content: dict) -> LedgerEntry:
        if entry_type not in ENTRY_TYPES:
            raise SerializationError(f"unknown entry_type: {entry_type}")
        with self._lock:
            prior = self.head_hash
            entry = LedgerEntry(
                index=len(self.entries),
                entry_type=entry_type,
                content=content,
                prior_hash=prior,
                hash=entry_hash(prior, content),
            )
            if self.path is not None:
                self._persist(entry)
            self.entries.append(entry)
        if self._on_append is not None:
            self._on_append(entry)
        return entry

    def _persist(self, entry: LedgerEntry) -> None:
        line = json.dumps(
            entry.to_record(), sort_keys=True, separators=(",", ":"), ensure_ascii=True
        )
        try:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageError(str(exc)) from exc

    def verify(self, legacy_genesis: bool = False) -> ChainVerification:
        return verify_entries(self.entries, legacy_genesis=legacy_genesis)


def verify_entries(
    entries: Iterable[LedgerEntry], legacy_genesis: bool = False
) -> ChainVerification:
    """Recompute every hash; report the first index that mismatches.

    Corruption is a result, not an error: unserializable content in a stored
    entry counts as a broken link at that index.
    """
    prior = CHAIN_SEED
    checked = 0
    for i, entry in enumerate(entries):
        checked += 1
        expected_prior = prior
        if i == 0 and legacy_genesis and entry.prior_hash == LEGACY_SEED:
            expected_prior = LEGACY_SEED
        try:
            recomputed = entry_hash(entry.prior_hash, entry.content)
        except SerializationError:
            return ChainVerification(False, i, checked)
        if (
            entry.index != i
            or entry.prior_hash != expected_prior
            or entry.hash != recomputed
        ):
            return ChainVerification(False, i, checked)
        prior = entry.hash
    return ChainVerification(True, None, checked)


def read_ledger_file(path: str) -> list[LedgerEntry]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                entries.append(LedgerEntry.from_record(json.loads(line)))
    return entries


def verify_ledger_file(path: str, legacy_genesis: bool = False) -> ChainVerification:
    return verify_entries(read_ledger_file(path), legacy_genesis=legacy_genesis)
