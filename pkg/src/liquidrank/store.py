"""Reputation state persistence with a canonical snapshot encoding.

A snapshot is encoded as a UTF-8 text block: the first line is the state
timestamp, each following line is ``participant,value`` with participants
sorted by their UTF-8 bytes and values printed as the shortest decimal
that round-trips the double.  The encoding is canonical: equal states
produce identical bytes, and consensus digests are computed over exactly
these bytes.

Two backends share the same semantics.  ``TransientStore`` keeps encoded
snapshots in memory; ``LocalFileStore`` writes one file per snapshot into
a directory, named by the zero-padded timestamp.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from .errors import (
    RecordError,
    SnapshotNotFoundError,
    StoreConflictError,
    StoreOrderingError,
)
from .model import ReputationState


def serialize_state(state: ReputationState) -> bytes:
    lines = [str(state.at)]
    for pid in sorted(state.values, key=lambda p: p.encode("utf-8")):
        lines.append(f"{pid},{state.values[pid]!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def deserialize_state(data: bytes) -> ReputationState:
    """Inverse of :func:`serialize_state`; validates the value range."""
    text = data.decode("utf-8")
    lines = text.splitlines()
    if not lines:
        raise RecordError("empty snapshot")
    try:
        at = int(lines[0])
    except ValueError:
        raise RecordError(f"snapshot header {lines[0]!r} is not a timestamp") from None
    values: dict[str, float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        pid, sep, raw = line.partition(",")
        if not sep or not pid:
            raise RecordError(f"malformed snapshot row {line!r}", lineno)
        if pid in values:
            raise RecordError(f"duplicate participant {pid!r}", lineno)
        try:
            value = float(raw)
        except ValueError:
            raise RecordError(f"reputation {raw!r} is not a number", lineno) from None
        if not 0.0 <= value <= 1.0:
            raise RecordError(f"reputation {value!r} outside [0, 1]", lineno)
        values[pid] = value
    return ReputationState(at=at, values=values)


def state_digest(state: ReputationState) -> str:
    """Hex digest of the canonical snapshot bytes."""
    return hashlib.sha256(serialize_state(state)).hexdigest()


def load_snapshot(path: str | Path) -> ReputationState:
    return deserialize_state(Path(path).read_bytes())


class _BaseStore:
    """Shared put/get semantics over a backend keyed by timestamp."""

    def _timestamps(self) -> list[int]:
        raise NotImplementedError

    def _read(self, at: int) -> bytes | None:
        raise NotImplementedError

    def _write(self, at: int, data: bytes) -> None:
        raise NotImplementedError

    def put(self, state: ReputationState) -> None:
        """Append a snapshot.

        Re-putting an identical snapshot at an existing timestamp is a
        no-op; a different snapshot at an existing timestamp is a conflict;
        a timestamp older than the newest stored one is an ordering error.
        """
        data = serialize_state(state)
        existing = self._read(state.at)
        if existing is not None:
            if existing == data:
                return
            raise StoreConflictError(
                f"snapshot at t={state.at} already exists with different content"
            )
        stamps = self._timestamps()
        if stamps and state.at < stamps[-1]:
            raise StoreOrderingError(
                f"snapshot at t={state.at} is older than the newest stored t={stamps[-1]}"
            )
        self._write(state.at, data)

    def get(self, at: int) -> ReputationState:
        data = self._read(at)
        if data is None:
            raise SnapshotNotFoundError(f"no snapshot at t={at}")
        return deserialize_state(data)

    def latest(self) -> ReputationState:
        stamps = self._timestamps()
        if not stamps:
            raise SnapshotNotFoundError("store is empty")
        return self.get(stamps[-1])

    def history(self, start: int, end: int) -> list[ReputationState]:
        """All snapshots with start <= t <= end, ascending."""
        return [self.get(at) for at in self._timestamps() if start <= at <= end]


class TransientStore(_BaseStore):
    """In-memory store; holds the canonical encoding, not live objects."""

    def __init__(self) -> None:
        self._snapshots: dict[int, bytes] = {}

    def _timestamps(self) -> list[int]:
        return sorted(self._snapshots)

    def _read(self, at: int) -> bytes | None:
        return self._snapshots.get(at)

    def _write(self, at: int, data: bytes) -> None:
        self._snapshots[at] = data


class LocalFileStore(_BaseStore):
    """One snapshot file per timestamp inside a directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, at: int) -> Path:
        return self.root / f"{at:020d}.csv"

    def _timestamps(self) -> list[int]:
        stamps = []
        for path in self.root.glob("*.csv"):
            try:
                stamps.append(int(path.stem))
            except ValueError:
                continue
        return sorted(stamps)

    def _read(self, at: int) -> bytes | None:
        path = self._path(at)
        if not path.exists():
            return None
        return path.read_bytes()

    def _write(self, at: int, data: bytes) -> None:
        tmp = self._path(at).with_suffix(".tmp")
        tmp.write_bytes(data)
        tmp.replace(self._path(at))
