"""Rating-log parsing and window partitioning.

Two log formats are supported.  CSV rows carry exactly the columns

    rater,ratee,kind,aspect,category,value,weight,event,timestamp

with an empty string for an absent optional field and no header row.
JSONL files carry one object per line with the same nine field names;
optional fields may be null or missing.  A missing or empty weight
defaults to 1.0 so unbacked ratings still count with unit weight.
Records are validated on parse and errors carry 1-based line numbers.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Union

from .errors import ConfigError, RecordError
from .model import Kind, RatingRecord, TimeWindow


@dataclass(frozen=True)
class WholeHistory:
    """A single window covering every record."""


@dataclass(frozen=True)
class PerTransaction:
    """One window per distinct record timestamp.

    Records sharing a timestamp land in the same window; splitting them
    would create zero-length windows whose ratings carry no time weight.
    """


@dataclass(frozen=True)
class Periodic:
    """Consecutive fixed-length windows from the origin, empty ones included."""

    length: int

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ConfigError(f"periodic window length must be positive, got {self.length}")


@dataclass(frozen=True)
class PerBlock:
    """Consecutive chunks of a fixed record count.

    The last chunk may be short, and a chunk grows past ``size`` when the
    records at its boundary share a timestamp: splitting them would produce
    two windows ending at the same instant.
    """

    size: int

    def __post_init__(self) -> None:
        if self.size <= 0:
            raise ConfigError(f"block size must be positive, got {self.size}")


WindowMode = Union[WholeHistory, PerTransaction, Periodic, PerBlock]


def window_mode_from_spec(spec: str) -> WindowMode:
    """Parse the CLI window syntax: whole | tx | period:<N> | block:<N>."""
    if spec == "whole":
        return WholeHistory()
    if spec == "tx":
        return PerTransaction()
    head, sep, arg = spec.partition(":")
    if sep and head in ("period", "block"):
        try:
            n = int(arg)
        except ValueError:
            raise ConfigError(f"window spec {spec!r}: expected an integer after ':'") from None
        return Periodic(n) if head == "period" else PerBlock(n)
    raise ConfigError(
        f"unknown window spec {spec!r}; expected whole, tx, period:<N> or block:<N>"
    )


_CSV_COLUMNS = 9
_JSON_FIELDS = {
    "rater", "ratee", "kind", "aspect", "category",
    "value", "weight", "event", "timestamp",
}


def _build_record(
    line: int,
    rater: str,
    ratee: str,
    kind: str,
    aspect: str | None,
    category: str | None,
    value: str | float,
    weight: str | float | None,
    event: str | None,
    timestamp: str | int,
) -> RatingRecord:
    try:
        kind_enum = Kind(str(kind).lower())
    except ValueError:
        raise RecordError(f"unknown rating kind {kind!r}", line) from None
    try:
        value_f = float(value)
    except (TypeError, ValueError):
        raise RecordError(f"rating value {value!r} is not a number", line) from None
    if weight is None or weight == "":
        weight_f = 1.0
    else:
        try:
            weight_f = float(weight)
        except (TypeError, ValueError):
            raise RecordError(f"rating weight {weight!r} is not a number", line) from None
    try:
        ts = int(timestamp)
    except (TypeError, ValueError):
        raise RecordError(f"timestamp {timestamp!r} is not an integer", line) from None
    try:
        return RatingRecord(
            rater=rater,
            ratee=ratee,
            kind=kind_enum,
            value=value_f,
            weight=weight_f,
            aspect=aspect or None,
            category=category or None,
            event=event or None,
            timestamp=ts,
        )
    except RecordError as exc:
        raise RecordError(str(exc), line) from None


def _parse_csv(text: str) -> list[RatingRecord]:
    records = []
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        if not row:
            continue
        line = reader.line_num
        if len(row) != _CSV_COLUMNS:
            raise RecordError(
                f"expected {_CSV_COLUMNS} columns, got {len(row)}", line
            )
        rater, ratee, kind, aspect, category, value, weight, event, timestamp = row
        records.append(_build_record(
            line, rater, ratee, kind, aspect, category, value, weight, event, timestamp,
        ))
    return records


def _parse_jsonl(text: str) -> list[RatingRecord]:
    records = []
    for line_num, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise RecordError(f"invalid JSON: {exc.msg}", line_num) from None
        if not isinstance(obj, dict):
            raise RecordError("expected a JSON object", line_num)
        unknown = set(obj) - _JSON_FIELDS
        if unknown:
            raise RecordError(f"unknown fields {sorted(unknown)}", line_num)
        for required in ("rater", "ratee", "kind", "value", "timestamp"):
            if obj.get(required) is None:
                raise RecordError(f"missing required field {required!r}", line_num)
        records.append(_build_record(
            line_num,
            obj["rater"],
            obj["ratee"],
            obj["kind"],
            obj.get("aspect"),
            obj.get("category"),
            obj["value"],
            obj.get("weight"),
            obj.get("event"),
            obj["timestamp"],
        ))
    return records


def parse_log(source: Union[str, bytes, IO], fmt: str = "csv") -> list[RatingRecord]:
    """Parse a rating log from text, bytes, or an open file object."""
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    if fmt == "csv":
        return _parse_csv(text)
    if fmt == "jsonl":
        return _parse_jsonl(text)
    raise ConfigError(f"unknown log format {fmt!r}; expected 'csv' or 'jsonl'")


def load_log(path: str | Path) -> list[RatingRecord]:
    """Read a log file, picking the format from the file suffix."""
    path = Path(path)
    fmt = "jsonl" if path.suffix.lower() in (".jsonl", ".ndjson", ".json") else "csv"
    return parse_log(path.read_bytes(), fmt)


def partition(
    records: list[RatingRecord],
    mode: WindowMode,
    t_origin: int,
) -> list[tuple[TimeWindow, list[RatingRecord]]]:
    """Split a log into consecutive windows according to ``mode``.

    Every record lands in exactly one window and windows chain: each
    window's t_prev is the previous window's t_now, starting at
    ``t_origin``.  Records with timestamps before ``t_origin`` are
    rejected.  An empty log yields no windows.
    """
    ordered = sorted(records, key=lambda rec: rec.timestamp)
    if ordered and ordered[0].timestamp < t_origin:
        raise RecordError(
            f"record at t={ordered[0].timestamp} predates the origin t={t_origin}"
        )
    if not ordered:
        return []
    last_ts = ordered[-1].timestamp

    if isinstance(mode, WholeHistory):
        return [(TimeWindow(t_origin, t_origin, last_ts), ordered)]

    if isinstance(mode, PerTransaction):
        out: list[tuple[TimeWindow, list[RatingRecord]]] = []
        t_prev = t_origin
        chunk: list[RatingRecord] = []
        for rec in ordered:
            if chunk and rec.timestamp != chunk[-1].timestamp:
                out.append((TimeWindow(t_origin, t_prev, chunk[-1].timestamp), chunk))
                t_prev = chunk[-1].timestamp
                chunk = []
            chunk.append(rec)
        out.append((TimeWindow(t_origin, t_prev, chunk[-1].timestamp), chunk))
        return out

    if isinstance(mode, Periodic):
        length = mode.length
        n_windows = (last_ts - t_origin) // length + 1
        slices: list[list[RatingRecord]] = [[] for _ in range(n_windows)]
        for rec in ordered:
            slices[(rec.timestamp - t_origin) // length].append(rec)
        return [
            (
                TimeWindow(t_origin, t_origin + i * length, t_origin + (i + 1) * length),
                chunk,
            )
            for i, chunk in enumerate(slices)
        ]

    if isinstance(mode, PerBlock):
        out = []
        t_prev = t_origin
        start = 0
        while start < len(ordered):
            end = min(start + mode.size, len(ordered))
            # records sharing a timestamp stay in one block, else two
            # snapshots would land on the same instant
            while end < len(ordered) and ordered[end].timestamp == ordered[end - 1].timestamp:
                end += 1
            chunk = ordered[start:end]
            t_now = chunk[-1].timestamp
            out.append((TimeWindow(t_origin, t_prev, t_now), chunk))
            t_prev = t_now
            start = end
        return out

    raise ConfigError(f"unknown window mode {mode!r}")
