"""Evaluation of computed reputations against ground truth.

The reference-list methodology labels known-good participants 1.0 and
known-bad ones 0.0, then scores a computed state by the Pearson
correlation between labels and reputations.  Distribution statistics
(Gini coefficient, top-1% share, nonzero fraction) quantify how
concentrated the computed reputations are.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorrelationUndefinedError, RecordError
from .model import ParticipantId, ReputationState


def pearson(
    reference: dict[ParticipantId, float],
    computed: ReputationState,
    *,
    default_reputation: float = 0.5,
    include_missing: bool = True,
) -> float:
    """Pearson correlation between reference labels and computed values.

    With ``include_missing`` (the default) every reference participant
    counts: those absent from the computed state are scored at
    ``default_reputation``, so bad actors that never earned a reputation
    still weigh against the reference.  With ``include_missing=False``
    only participants present in both maps are compared.  A constant
    series on either side leaves the correlation undefined.
    """
    pairs = []
    for pid in sorted(reference):
        if pid in computed.values:
            pairs.append((reference[pid], computed.values[pid]))
        elif include_missing:
            pairs.append((reference[pid], default_reputation))
    if len(pairs) < 2:
        raise CorrelationUndefinedError(
            f"undefined correlation: need at least 2 comparable participants, got {len(pairs)}"
        )
    x = np.array([p[0] for p in pairs], dtype=float)
    y = np.array([p[1] for p in pairs], dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.dot(dx, dx))
    sy = float(np.dot(dy, dy))
    if sx == 0.0 or sy == 0.0:
        raise CorrelationUndefinedError("undefined correlation: constant series")
    return float(np.dot(dx, dy) / math.sqrt(sx * sy))


@dataclass(frozen=True)
class DistributionStats:
    gini: float
    top_share: float
    nonzero_fraction: float


def distribution_stats(state: ReputationState) -> DistributionStats:
    """Concentration statistics of a reputation state.

    ``top_share`` is the share of total reputation held by the top 1% of
    participants, with the count rounded up so it is never empty.  An
    all-zero state counts as perfectly equal.
    """
    if not state.values:
        raise ValueError("distribution_stats needs a non-empty state")
    values = np.sort(np.array(list(state.values.values()), dtype=float))
    n = values.size
    total = float(values.sum())
    nonzero_fraction = float(np.count_nonzero(values) / n)
    if total == 0.0:
        return DistributionStats(gini=0.0, top_share=0.0, nonzero_fraction=0.0)
    ranks = np.arange(1, n + 1, dtype=float)
    gini = float(2.0 * np.dot(ranks, values) / (n * total) - (n + 1) / n)
    top_n = math.ceil(n * 0.01)
    top_share = float(values[n - top_n:].sum() / total)
    return DistributionStats(gini=gini, top_share=top_share, nonzero_fraction=nonzero_fraction)


def load_reference_list(path: str | Path) -> dict[ParticipantId, float]:
    """Read a ``participant,label`` CSV where labels are exactly 0 or 1."""
    return parse_reference_list(Path(path).read_text(encoding="utf-8"))


def parse_reference_list(text: str) -> dict[ParticipantId, float]:
    labels: dict[ParticipantId, float] = {}
    reader = csv.reader(io.StringIO(text))
    for row in reader:
        if not row:
            continue
        line = reader.line_num
        if len(row) != 2:
            raise RecordError(f"expected 'participant,label', got {row!r}", line)
        pid, raw = row
        if not pid:
            raise RecordError("empty participant id", line)
        if pid in labels:
            raise RecordError(f"duplicate participant {pid!r}", line)
        try:
            label = float(raw)
        except ValueError:
            raise RecordError(f"label {raw!r} is not a number", line) from None
        if label not in (0.0, 1.0):
            raise RecordError(f"label must be 0 or 1, got {raw!r}", line)
        labels[pid] = label
    return labels
