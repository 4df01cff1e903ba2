"""Core domain types: rating records, time windows, reputation states.

Participants are identified by opaque non-empty string tokens.  Identifiers
may not contain commas or line breaks because they are embedded verbatim in
the canonical snapshot serialization (see ``liquidrank.store``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import RecordError

ParticipantId = str

_FORBIDDEN_ID_CHARS = (",", "\n", "\r")


def _check_participant_id(token: str, role: str) -> None:
    if not token:
        raise RecordError(f"{role} id must be a non-empty token")
    if any(ch in token for ch in _FORBIDDEN_ID_CHARS):
        raise RecordError(f"{role} id {token!r} contains a comma or line break")


class Kind(str, enum.Enum):
    """How a rating was expressed."""

    STAKE = "stake"
    TRANSACTION = "transaction"


@dataclass(frozen=True)
class RatingRecord:
    """One rating event from the input log.

    ``value`` is the rating itself, in [-1, 1].  ``weight`` is the financial
    backing: staked amount for :data:`Kind.STAKE`, transaction value for
    :data:`Kind.TRANSACTION`.  A stake with value 0 is a revoked endorsement
    and contributes nothing to any differential.
    """

    rater: ParticipantId
    ratee: ParticipantId
    kind: Kind
    value: float
    weight: float = 1.0
    aspect: str | None = None
    category: str | None = None
    event: str | None = None
    timestamp: int = 0

    def __post_init__(self) -> None:
        _check_participant_id(self.rater, "rater")
        _check_participant_id(self.ratee, "ratee")
        if self.rater == self.ratee:
            raise RecordError(f"self-rating by {self.rater!r} is not allowed")
        if not isinstance(self.kind, Kind):
            raise RecordError(f"unknown rating kind {self.kind!r}")
        if not -1.0 <= self.value <= 1.0:
            raise RecordError(f"rating value {self.value!r} outside [-1, 1]")
        if not self.weight >= 0.0:
            raise RecordError(f"rating weight {self.weight!r} must be non-negative")


@dataclass(frozen=True)
class TimeWindow:
    """Half-open slice of the rating history used for one update step.

    ``t_origin`` is the epoch the whole history starts at, ``t_prev`` the end
    of the previous window and ``t_now`` the end of this one.  Zero-length
    windows (``t_prev == t_now``) are legal; they carry no time weight in the
    state update.
    """

    t_origin: int
    t_prev: int
    t_now: int

    def __post_init__(self) -> None:
        if not self.t_origin <= self.t_prev <= self.t_now:
            raise ValueError(
                f"window bounds must satisfy t_origin <= t_prev <= t_now, "
                f"got ({self.t_origin}, {self.t_prev}, {self.t_now})"
            )


@dataclass
class ReputationState:
    """Reputation values of all known participants as of time ``at``."""

    at: int
    values: dict[ParticipantId, float] = field(default_factory=dict)


@dataclass
class DifferentialReputation:
    """Per-window intermediate results, kept for audit.

    ``staked`` and ``transactional`` are the raw weighted-mean differentials
    per ratee, ``blended`` their combination, ``log_blended`` the optional
    log-compressed blend (``None`` when log compression is disabled) and
    ``normalized`` the final unit-max map fed into the state update.
    """

    window: TimeWindow
    staked: dict[ParticipantId, float]
    transactional: dict[ParticipantId, float]
    blended: dict[ParticipantId, float]
    normalized: dict[ParticipantId, float]
    log_blended: dict[ParticipantId, float] | None = None


@dataclass
class FacetedDifferential:
    """Differentials broken down by category, aspect, and both.

    Keys use ``None`` for records that carry no aspect or category label.
    """

    window: TimeWindow
    by_category: dict[tuple[ParticipantId, str | None], float]
    by_aspect: dict[tuple[ParticipantId, str | None], float]
    by_aspect_category: dict[tuple[ParticipantId, str | None, str | None], float]
