"""Reputation-consensus protocol among agencies, plus a simulator.

Each cycle every agency broadcasts the digest of its canonical state
snapshot and independently decides from the receipts it sees.  A node
accepts once enough identical digests arrive; a receipt that conflicts
with earlier ones marks the cycle disputed and raises an alert; when the
receipt cap is hit the node resolves in favor of the best-supported
digest; and a node that cannot decide within the timeout declares the
cycle broken and requests a system check.  Optionally receipts are
weighted by the sender agency's own reputation instead of being counted,
in which case the two thresholds are weight thresholds.

The simulator drives a set of nodes over a lossy, delayed network with
configurable fault models and produces a deterministic event transcript:
same inputs and seed, same transcript bytes.
"""

from __future__ import annotations

import enum
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .model import ReputationState
from .store import state_digest

# Alert kinds.
DISPUTED_SET = "disputed_set"
DIVERGENT_SENDERS = "divergent_senders"
SYSTEM_CHECK = "system_check"

# Fault models.
SILENT = "silent"
DIVERGENT = "divergent"
EQUIVOCATING = "equivocating"
FAULT_KINDS = (SILENT, DIVERGENT, EQUIVOCATING)

AgencyId = str


class Outcome(str, enum.Enum):
    ACCEPTED = "accepted"
    ACCEPTED_WITH_DISPUTE = "accepted_with_dispute"
    BROKEN = "broken"


@dataclass(frozen=True)
class StateDigest:
    """One agency's claim about the canonical state for a cycle."""

    cycle: int
    digest: str
    sender: AgencyId


@dataclass(frozen=True)
class Alert:
    kind: str
    cycle: int
    senders: tuple[AgencyId, ...] = ()
    note: str = ""

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "cycle": self.cycle,
            "senders": list(self.senders),
            "note": self.note,
        }


@dataclass(frozen=True)
class AgencyDecision:
    outcome: Outcome
    cycle: int
    digest: str | None = None
    divergent: tuple[AgencyId, ...] = ()
    alerts: tuple[Alert, ...] = ()

    def to_json(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "cycle": self.cycle,
            "digest": self.digest,
            "divergent": list(self.divergent),
        }


@dataclass
class ConsensusConfig:
    """Protocol thresholds.

    Without reputation weighting ``min_identical`` (the acceptance quorum)
    and ``max_nonidentical`` (the receipt cap that forces resolution) are
    whole counts; with ``por_weighted`` they are thresholds on sums of the
    sender reputations from ``agency_reputations`` (unknown senders weigh
    1.0).  ``timeout`` is measured in ticks since a node's first receipt
    of the cycle.
    """

    min_identical: float = 2
    max_nonidentical: float = 4
    timeout: int = 10
    por_weighted: bool = False
    agency_reputations: dict[AgencyId, float] = field(default_factory=dict)

    def validate(self) -> None:
        if self.por_weighted:
            if not self.min_identical > 0:
                raise ConfigError("min_identical weight threshold must be positive")
            if not self.max_nonidentical > 0:
                raise ConfigError("max_nonidentical weight threshold must be positive")
        else:
            for name in ("min_identical", "max_nonidentical"):
                v = getattr(self, name)
                if v != int(v):
                    raise ConfigError(f"{name} must be an integer without reputation weighting")
            if self.min_identical < 2:
                raise ConfigError("min_identical must be at least 2")
            if self.max_nonidentical < 1:
                raise ConfigError("max_nonidentical must be at least 1")
        if self.timeout < 1:
            raise ConfigError("timeout must be at least 1 tick")
        for agency, rep in self.agency_reputations.items():
            if not (isinstance(rep, (int, float)) and math.isfinite(rep) and 0.0 <= rep <= 1.0):
                raise ConfigError(f"agency reputation for {agency!r} must lie in [0, 1]")


class AgencyNode:
    """Per-agency decision state machine for one cycle at a time.

    Messages for later cycles are buffered and replayed when the node
    advances; messages for earlier cycles and duplicate senders are
    ignored.  After a decision the node ignores further receipts until
    the next cycle.
    """

    def __init__(self, agency_id: AgencyId, cfg: ConsensusConfig, cycle: int = 0):
        cfg.validate()
        self.agency_id = agency_id
        self.cfg = cfg
        self.cycle = cycle
        self.decision: AgencyDecision | None = None
        self._buffer: dict[int, list[StateDigest]] = {}
        self._reset_cycle_state()

    def _reset_cycle_state(self) -> None:
        self._digest_senders: dict[str, list[AgencyId]] = {}
        self._digest_weights: dict[str, float] = {}
        self._seen_senders: set[AgencyId] = set()
        self._total_weight = 0.0
        self._first_receipt: int | None = None
        self._disputed = False
        self.decision = None

    def _sender_weight(self, sender: AgencyId) -> float:
        if not self.cfg.por_weighted:
            return 1.0
        return self.cfg.agency_reputations.get(sender, 1.0)

    def receive(self, msg: StateDigest, now: int) -> tuple[AgencyDecision | None, list[Alert]]:
        """Process one digest receipt; returns (decision, alerts emitted)."""
        if msg.cycle > self.cycle:
            self._buffer.setdefault(msg.cycle, []).append(msg)
            return None, []
        if msg.cycle < self.cycle or self.decision is not None:
            return None, []
        if msg.sender in self._seen_senders:
            return None, []
        self._seen_senders.add(msg.sender)
        if self._first_receipt is None:
            self._first_receipt = now

        alerts: list[Alert] = []
        conflicting = any(d != msg.digest for d in self._digest_senders)
        self._digest_senders.setdefault(msg.digest, []).append(msg.sender)
        weight = self._sender_weight(msg.sender)
        self._digest_weights[msg.digest] = self._digest_weights.get(msg.digest, 0.0) + weight
        self._total_weight += weight
        if conflicting:
            self._disputed = True
            alerts.append(Alert(
                kind=DISPUTED_SET,
                cycle=self.cycle,
                senders=(msg.sender,),
                note="digest conflicts with earlier receipts",
            ))

        decision = None
        if self._digest_weights[msg.digest] >= self.cfg.min_identical:
            decision = self._accept(msg.digest)
        elif (self._total_weight >= self.cfg.max_nonidentical
              and max(self._digest_weights.values()) >= self.cfg.min_identical):
            decision = self._forced_resolution()
        if decision is not None:
            self.decision = decision
            alerts.extend(decision.alerts)
        return decision, alerts

    def _other_senders(self, digest: str) -> tuple[AgencyId, ...]:
        others = [
            sender
            for d, senders in self._digest_senders.items() if d != digest
            for sender in senders
        ]
        return tuple(sorted(others))

    def _accept(self, digest: str) -> AgencyDecision:
        if not self._disputed:
            return AgencyDecision(Outcome.ACCEPTED, self.cycle, digest)
        divergent = self._other_senders(digest)
        alert = Alert(
            kind=DIVERGENT_SENDERS,
            cycle=self.cycle,
            senders=divergent,
            note="quorum reached in a disputed cycle",
        )
        return AgencyDecision(
            Outcome.ACCEPTED_WITH_DISPUTE, self.cycle, digest,
            divergent=divergent, alerts=(alert,),
        )

    def _forced_resolution(self) -> AgencyDecision:
        """Resolve at the receipt cap for the best-supported digest.

        Ties go to the lexicographically smallest digest and are called
        out in the alert.
        """
        best = max(self._digest_weights.values())
        leaders = sorted(d for d, w in self._digest_weights.items() if w == best)
        winner = leaders[0]
        divergent = self._other_senders(winner)
        note = "receipt cap reached"
        if len(leaders) > 1:
            note += f"; tie between {len(leaders)} digests broken lexicographically"
        alert = Alert(
            kind=DIVERGENT_SENDERS,
            cycle=self.cycle,
            senders=divergent,
            note=note,
        )
        return AgencyDecision(
            Outcome.ACCEPTED_WITH_DISPUTE, self.cycle, winner,
            divergent=divergent, alerts=(alert,),
        )

    def tick(self, now: int) -> tuple[AgencyDecision | None, list[Alert]]:
        """Check the cycle timeout; may declare the cycle broken.

        The clock runs from the first receipt of the cycle; a node that
        never received anything never times out.
        """
        if self.decision is not None or self._first_receipt is None:
            return None, []
        if now - self._first_receipt >= self.cfg.timeout:
            alert = Alert(
                kind=SYSTEM_CHECK,
                cycle=self.cycle,
                senders=(self.agency_id,),
                note="no quorum before timeout",
            )
            decision = AgencyDecision(Outcome.BROKEN, self.cycle, alerts=(alert,))
            self.decision = decision
            return decision, [alert]
        return None, []

    def advance_cycle(
        self, new_cycle: int, now: int,
    ) -> list[tuple[AgencyDecision | None, list[Alert]]]:
        """Move to a new cycle and replay any buffered messages for it."""
        if new_cycle <= self.cycle:
            raise ValueError(f"cannot advance from cycle {self.cycle} to {new_cycle}")
        self.cycle = new_cycle
        self._reset_cycle_state()
        for stale in [c for c in self._buffer if c < new_cycle]:
            del self._buffer[stale]
        return [self.receive(msg, now) for msg in self._buffer.pop(new_cycle, [])]


# --- simulation -----------------------------------------------------------


@dataclass(frozen=True)
class TranscriptEvent:
    tick: int
    type: str
    cycle: int
    sender: AgencyId | None = None
    receiver: AgencyId | None = None
    digest: str | None = None
    decision: AgencyDecision | None = None
    alert: Alert | None = None

    def to_json(self) -> dict:
        out: dict = {"tick": self.tick, "type": self.type, "cycle": self.cycle}
        if self.sender is not None:
            out["sender"] = self.sender
        if self.receiver is not None:
            out["receiver"] = self.receiver
        if self.digest is not None:
            out["digest"] = self.digest
        if self.decision is not None:
            out["decision"] = self.decision.to_json()
        if self.alert is not None:
            out["alert"] = self.alert.to_json()
        return out


@dataclass(frozen=True)
class NetworkModel:
    """Per-link delivery model: uniform integer delay plus a drop chance."""

    delay_min: int = 1
    delay_max: int = 1
    drop_rate: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.delay_min <= self.delay_max:
            raise ConfigError("need 0 <= delay_min <= delay_max")
        if not 0.0 <= self.drop_rate < 1.0:
            raise ConfigError("drop_rate must lie in [0, 1)")


@dataclass
class SimulationResult:
    agency_ids: list[AgencyId]
    cycles: int
    events: list[TranscriptEvent]
    decisions: dict[AgencyId, list[AgencyDecision | None]]
    rewards: list[list[AgencyId]]


def mining_reward(
    events: list[TranscriptEvent],
    accepted_digest: str | None,
    reward_slots: int,
) -> list[AgencyId]:
    """First senders of the accepted digest, in send order.

    Returns up to ``reward_slots`` distinct senders ordered by send tick
    with ties broken by agency id.  A broken cycle (no accepted digest)
    rewards nobody.
    """
    if accepted_digest is None or reward_slots <= 0:
        return []
    sends = sorted(
        (ev for ev in events if ev.type == "send" and ev.digest == accepted_digest),
        key=lambda ev: (ev.tick, ev.sender),
    )
    winners: list[AgencyId] = []
    for ev in sends:
        if ev.sender not in winners:
            winners.append(ev.sender)
            if len(winners) == reward_slots:
                break
    return winners


def agency_ids(n_agencies: int) -> list[AgencyId]:
    width = max(2, len(str(n_agencies - 1)))
    return [f"a{i:0{width}d}" for i in range(n_agencies)]


def _cycle_base_state(cycle: int) -> ReputationState:
    # Small synthetic state that changes every cycle so digests do too.
    values = {f"m{j}": ((cycle * 3 + j * 5) % 11) / 10.0 for j in range(3)}
    return ReputationState(at=cycle, values=values)


def _perturbed_digest(cycle: int, tag: str) -> str:
    state = _cycle_base_state(cycle)
    state.values[f"fork-{tag}"] = 1.0
    return state_digest(state)


def run_simulation(
    n_agencies: int,
    faulty: dict[AgencyId, str] | None = None,
    cycles: int = 10,
    cfg: ConsensusConfig | None = None,
    network: NetworkModel | None = None,
    seed: int = 0,
    reward_slots: int = 1,
) -> SimulationResult:
    """Simulate ``cycles`` consensus rounds and return the full transcript.

    ``faulty`` maps agency ids to fault kinds: silent agencies send
    nothing, divergent ones broadcast a digest of a forked state, and
    equivocating ones send a different forked digest to every peer.
    Delivery order is deterministic: events are processed by (tick,
    sender, message id), and all randomness comes from ``seed``.
    """
    if n_agencies < 1:
        raise ConfigError("need at least one agency")
    cfg = cfg if cfg is not None else ConsensusConfig()
    cfg.validate()
    network = network if network is not None else NetworkModel()
    faulty = dict(faulty) if faulty else {}
    ids = agency_ids(n_agencies)
    for agency, kind in faulty.items():
        if agency not in ids:
            raise ConfigError(f"unknown faulty agency {agency!r}")
        if kind not in FAULT_KINDS:
            raise ConfigError(f"unknown fault kind {kind!r}")

    rng = random.Random(seed)
    nodes = {aid: AgencyNode(aid, cfg, cycle=0) for aid in ids}
    events: list[TranscriptEvent] = []
    decisions: dict[AgencyId, list[AgencyDecision | None]] = {aid: [] for aid in ids}
    rewards: list[list[AgencyId]] = []
    period = cfg.timeout + network.delay_max + 2
    msg_counter = 0

    def log_node_output(now, aid, decision, alerts):
        for alert in alerts:
            events.append(TranscriptEvent(
                tick=now, type="alert", cycle=alert.cycle, sender=aid, alert=alert,
            ))
        if decision is not None:
            events.append(TranscriptEvent(
                tick=now, type="decision", cycle=decision.cycle,
                sender=aid, digest=decision.digest, decision=decision,
            ))

    for cycle in range(cycles):
        t0 = cycle * period
        base_digest = state_digest(_cycle_base_state(cycle))
        cycle_events_start = len(events)
        deliveries: dict[int, list[tuple[AgencyId, int, AgencyId, StateDigest]]] = {}

        for sender in ids:
            fault = faulty.get(sender)
            if fault == SILENT:
                continue
            if fault == DIVERGENT:
                own_digest = _perturbed_digest(cycle, sender)
            elif fault == EQUIVOCATING:
                own_digest = _perturbed_digest(cycle, f"{sender}->{sender}")
            else:
                own_digest = base_digest

            if fault == EQUIVOCATING:
                for receiver in ids:
                    if receiver == sender:
                        continue
                    digest = _perturbed_digest(cycle, f"{sender}->{receiver}")
                    events.append(TranscriptEvent(
                        tick=t0, type="send", cycle=cycle,
                        sender=sender, receiver=receiver, digest=digest,
                    ))
            else:
                events.append(TranscriptEvent(
                    tick=t0, type="send", cycle=cycle, sender=sender, digest=own_digest,
                ))

            # A sender's own digest counts as a receipt at send time.
            msg_counter += 1
            deliveries.setdefault(t0, []).append(
                (sender, msg_counter, sender, StateDigest(cycle, own_digest, sender)),
            )
            for receiver in ids:
                if receiver == sender:
                    continue
                delay = rng.randint(network.delay_min, network.delay_max)
                dropped = rng.random() < network.drop_rate
                if dropped:
                    continue
                if fault == EQUIVOCATING:
                    digest = _perturbed_digest(cycle, f"{sender}->{receiver}")
                else:
                    digest = own_digest
                msg_counter += 1
                deliveries.setdefault(t0 + delay, []).append(
                    (sender, msg_counter, receiver, StateDigest(cycle, digest, sender)),
                )

        for now in range(t0, t0 + period):
            for sender, _msg_id, receiver, msg in sorted(deliveries.pop(now, [])):
                events.append(TranscriptEvent(
                    tick=now, type="receive", cycle=cycle,
                    sender=sender, receiver=receiver, digest=msg.digest,
                ))
                decision, alerts = nodes[receiver].receive(msg, now)
                log_node_output(now, receiver, decision, alerts)
            for aid in ids:
                decision, alerts = nodes[aid].tick(now)
                log_node_output(now, aid, decision, alerts)

        cycle_events = events[cycle_events_start:]
        accepted: dict[str, int] = {}
        for aid in ids:
            decision = nodes[aid].decision
            decisions[aid].append(decision)
            if decision is not None and decision.digest is not None:
                accepted[decision.digest] = accepted.get(decision.digest, 0) + 1
        if accepted:
            best = max(accepted.values())
            accepted_digest = sorted(d for d, c in accepted.items() if c == best)[0]
        else:
            accepted_digest = None
        rewards.append(mining_reward(cycle_events, accepted_digest, reward_slots))

        if cycle + 1 < cycles:
            for aid in ids:
                nodes[aid].advance_cycle(cycle + 1, now=t0 + period)

    return SimulationResult(
        agency_ids=ids, cycles=cycles, events=events,
        decisions=decisions, rewards=rewards,
    )


def summarize(result: SimulationResult) -> dict:
    """Per-cycle outcome counts, alert counts, named divergents, rewards."""
    per_cycle = []
    for cycle in range(result.cycles):
        outcomes = {o.value: 0 for o in Outcome}
        outcomes["undecided"] = 0
        divergent: set[AgencyId] = set()
        for aid in result.agency_ids:
            decision = result.decisions[aid][cycle]
            if decision is None:
                outcomes["undecided"] += 1
            else:
                outcomes[decision.outcome.value] += 1
                divergent.update(decision.divergent)
        alerts: dict[str, int] = {}
        for ev in result.events:
            if ev.type == "alert" and ev.cycle == cycle:
                alerts[ev.alert.kind] = alerts.get(ev.alert.kind, 0) + 1
        per_cycle.append({
            "cycle": cycle,
            "outcomes": outcomes,
            "alerts": dict(sorted(alerts.items())),
            "divergent": sorted(divergent),
            "rewards": result.rewards[cycle],
        })
    return {
        "agencies": result.agency_ids,
        "cycles": result.cycles,
        "per_cycle": per_cycle,
    }


def export_transcript(events: list[TranscriptEvent], path: str | Path) -> None:
    """Write one JSON object per event, in transcript order."""
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(json.dumps(ev.to_json(), sort_keys=True, separators=(",", ":")))
            fh.write("\n")
