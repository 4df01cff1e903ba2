"""Synthetic rating communities for evaluation runs and demos.

Two generators are provided.  ``lognormal_transaction_community`` mimics a
payment network whose transaction values follow a heavy-tailed log-normal
law, with each rating's value tied to the transaction size; it exhibits
the winner-takes-all concentration that the log-compression options are
designed to counter.  ``planted_truth_community`` builds a population
split into a reputable cluster and a scam cluster with known labels, for
correlation scoring.
"""

from __future__ import annotations

import random

from .model import Kind, ParticipantId, RatingRecord


def lognormal_transaction_community(
    n_participants: int = 200,
    n_ratings: int = 5000,
    sigma: float = 2.0,
    n_windows: int = 10,
    window_length: int = 100,
    value_scale: float = 100.0,
    seed: int = 7,
) -> list[RatingRecord]:
    """Transaction log with log-normal financial weights.

    Weights are drawn log-normally with the given sigma; the rating value
    of each transaction is its weight capped at ``value_scale`` and mapped
    to (0, 1], so large transfers express proportionally stronger ratings.
    Ratees are drawn with a quadratic skew so a minority of participants
    attracts most of the volume.  Timestamps spread uniformly over
    ``n_windows * window_length`` ticks starting at 0.
    """
    rng = random.Random(seed)
    participants = [f"p{i:03d}" for i in range(n_participants)]
    span = n_windows * window_length
    records = []
    for _ in range(n_ratings):
        rater = participants[rng.randrange(n_participants)]
        ratee = participants[int(rng.random() ** 2 * n_participants)]
        while ratee == rater:
            ratee = participants[int(rng.random() ** 2 * n_participants)]
        weight = rng.lognormvariate(0.0, sigma)
        value = min(1.0, weight / value_scale)
        records.append(RatingRecord(
            rater=rater,
            ratee=ratee,
            kind=Kind.TRANSACTION,
            value=value,
            weight=weight,
            timestamp=rng.randrange(span),
        ))
    return records


def planted_truth_community(
    n_participants: int = 100,
    reputable_fraction: float = 0.6,
    ratings_per_member: int = 8,
    n_windows: int = 5,
    window_length: int = 100,
    seed: int = 11,
) -> tuple[list[RatingRecord], dict[ParticipantId, float]]:
    """Two-cluster community with known good/bad labels.

    Reputable members rate each other positively and rate scam members
    negatively; scam members rate positively only among themselves.
    Returns the rating log and the reference labels (1.0 reputable,
    0.0 scam).
    """
    rng = random.Random(seed)
    n_reputable = int(n_participants * reputable_fraction)
    reputable = [f"g{i:03d}" for i in range(n_reputable)]
    scam = [f"s{i:03d}" for i in range(n_participants - n_reputable)]
    labels = {pid: 1.0 for pid in reputable}
    labels.update({pid: 0.0 for pid in scam})

    def pick_other(pool: list[str], not_this: str) -> str:
        choice = pool[rng.randrange(len(pool))]
        while choice == not_this:
            choice = pool[rng.randrange(len(pool))]
        return choice

    span = n_windows * window_length
    records = []
    for rater in reputable:
        for _ in range(ratings_per_member):
            target_scam = bool(scam) and rng.random() < 0.4
            if target_scam:
                ratee = scam[rng.randrange(len(scam))]
                value = -rng.uniform(0.6, 1.0)
            else:
                ratee = pick_other(reputable, rater)
                value = rng.uniform(0.6, 1.0)
            records.append(RatingRecord(
                rater=rater,
                ratee=ratee,
                kind=Kind.TRANSACTION,
                value=value,
                weight=rng.uniform(1.0, 5.0),
                timestamp=rng.randrange(span),
            ))
    for rater in scam:
        for _ in range(ratings_per_member):
            ratee = pick_other(scam, rater)
            records.append(RatingRecord(
                rater=rater,
                ratee=ratee,
                kind=Kind.TRANSACTION,
                value=rng.uniform(0.6, 1.0),
                weight=rng.uniform(1.0, 5.0),
                timestamp=rng.randrange(span),
            ))
    return records, labels
