"""Clock abstraction so replays are byte-deterministic.

Ledger timestamps are hashed, so scripted replays must not read the wall
clock. The runtime takes whichever clock the caller wires in.
"""

from __future__ import annotations

import threading
from datetime import datetime, timedelta, timezone


class SystemClock:
    """Wall-clock time; used for live service runs."""

    def now(self) -> datetime:
        return datetime.now(timezone.utc)

    def isoformat(self) -> str:
        return _iso(self.now())


class SimulatedClock:
    """Deterministic clock: a fixed start plus a fixed step per reading."""

    def __init__(self, start: str = "2026-01-01T00:00:00Z", step_seconds: int = 1):
        self._current = datetime.strptime(start, "%Y-%m-%dT%H:%M:%SZ").replace(
            tzinfo=timezone.utc
        )
        self._step = timedelta(seconds=step_seconds)
        self._lock = threading.Lock()

    def now(self) -> datetime:
        with self._lock:
            value = self._current
            self._current = self._current + self._step
        return value

    def advance(self, seconds: float) -> None:
        with self._lock:
            self._current = self._current + timedelta(seconds=seconds)

    def isoformat(self) -> str:
        return _iso(self.now())


def _iso(dt: datetime) -> str:
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")
