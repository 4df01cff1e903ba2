"""Command-line interface.

Subcommands:

  compute   fold a rating log into reputation snapshots window by window
  simulate  run the agency-consensus simulator and export its transcript
  validate  correlate a snapshot against a labeled reference list
  stats     concentration statistics of a snapshot
  export    render a snapshot plus its rating log as a DOT graph

Exit codes: 0 success, 1 invalid input data, 2 configuration errors,
3 undefined correlation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import consensus
from .config import EngineConfig, load_engine_config, parse_key_values
from .engine import run_windows
from .errors import (
    ConfigError,
    CorrelationUndefinedError,
    LiquidRankError,
)
from .evaluate import distribution_stats, load_reference_list, pearson
from .ingest import load_log, window_mode_from_spec
from .model import ReputationState
from .store import LocalFileStore, load_snapshot


def _window_json(window) -> dict:
    return {
        "t_origin": window.t_origin,
        "t_prev": window.t_prev,
        "t_now": window.t_now,
    }


def cmd_compute(args: argparse.Namespace) -> int:
    cfg = load_engine_config(args.config) if args.config else EngineConfig()
    cfg.validate()
    mode = window_mode_from_spec(args.window)
    records = load_log(args.log)
    t_origin = args.origin
    if t_origin is None:
        t_origin = min((rec.timestamp for rec in records), default=0)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    store = LocalFileStore(out_dir / "snapshots")
    final = ReputationState(at=t_origin, values={})
    with open(out_dir / "differentials.jsonl", "w", encoding="utf-8") as audit:
        for window, state, diff in run_windows(records, mode, t_origin, cfg):
            store.put(state)
            final = state
            audit.write(json.dumps({
                "window": _window_json(window),
                "staked": diff.staked,
                "transactional": diff.transactional,
                "blended": diff.blended,
                "log_blended": diff.log_blended,
                "normalized": diff.normalized,
            }, sort_keys=True))
            audit.write("\n")

    ranking = sorted(final.values.items(), key=lambda kv: (-kv[1], kv[0]))
    for pid, value in ranking:
        print(f"{pid},{value!r}")
    return 0


def _parse_faulty_spec(spec: str, ids: list[str]) -> dict[str, str]:
    """Fault spec: comma-separated kind[:count]; assigned to the lowest ids."""
    out: dict[str, str] = {}
    if not spec or spec == "none":
        return out
    next_idx = 0
    for part in spec.split(","):
        kind, sep, count_raw = part.partition(":")
        kind = kind.strip()
        if kind not in consensus.FAULT_KINDS:
            raise ConfigError(
                f"unknown fault kind {kind!r}; expected one of {', '.join(consensus.FAULT_KINDS)}"
            )
        if sep:
            try:
                count = int(count_raw)
            except ValueError:
                raise ConfigError(f"fault count {count_raw!r} is not an integer") from None
            if count < 0:
                raise ConfigError("fault count must be non-negative")
        else:
            count = 1
        for _ in range(count):
            if next_idx >= len(ids):
                raise ConfigError("more faulty agencies than agencies")
            out[ids[next_idx]] = kind
            next_idx += 1
    return out


def _load_consensus_config(path: str) -> consensus.ConsensusConfig:
    pairs = parse_key_values(Path(path).read_text(encoding="utf-8"))
    cfg = consensus.ConsensusConfig()
    for key, raw in pairs.items():
        if key in ("min_identical", "max_nonidentical"):
            try:
                setattr(cfg, key, float(raw))
            except ValueError:
                raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
        elif key == "timeout":
            try:
                cfg.timeout = int(raw)
            except ValueError:
                raise ConfigError(f"timeout: expected an integer, got {raw!r}") from None
        elif key == "por_weighted":
            lowered = raw.lower()
            if lowered in ("true", "1", "yes", "on"):
                cfg.por_weighted = True
            elif lowered in ("false", "0", "no", "off"):
                cfg.por_weighted = False
            else:
                raise ConfigError(f"por_weighted: expected a boolean, got {raw!r}")
        elif key.startswith("agency_reputation."):
            agency = key[len("agency_reputation."):]
            if not agency:
                raise ConfigError("agency_reputation. key is missing the agency id")
            try:
                cfg.agency_reputations[agency] = float(raw)
            except ValueError:
                raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
        else:
            raise ConfigError(f"unknown consensus config key {key!r}")
    cfg.validate()
    return cfg


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_consensus_config(args.config) if args.config else consensus.ConsensusConfig()
    if args.min_identical is not None:
        cfg.min_identical = args.min_identical
    if args.max_nonidentical is not None:
        cfg.max_nonidentical = args.max_nonidentical
    if args.timeout is not None:
        cfg.timeout = args.timeout
    if args.por:
        cfg.por_weighted = True
    cfg.validate()
    network = consensus.NetworkModel(
        delay_min=args.delay_min, delay_max=args.delay_max, drop_rate=args.drop_rate,
    )
    ids = consensus.agency_ids(args.agencies)
    faulty = _parse_faulty_spec(args.faulty, ids)
    result = consensus.run_simulation(
        n_agencies=args.agencies,
        faulty=faulty,
        cycles=args.cycles,
        cfg=cfg,
        network=network,
        seed=args.seed,
        reward_slots=args.reward_slots,
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    consensus.export_transcript(result.events, out_dir / "transcript.jsonl")
    summary = consensus.summarize(result)
    with open(out_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")

    print("cycle accepted disputed broken undecided alerts rewards")
    for row in summary["per_cycle"]:
        outcomes = row["outcomes"]
        total_alerts = sum(row["alerts"].values())
        rewards = "+".join(row["rewards"]) if row["rewards"] else "-"
        print(
            f"{row['cycle']} {outcomes['accepted']} "
            f"{outcomes['accepted_with_dispute']} {outcomes['broken']} "
            f"{outcomes['undecided']} {total_alerts} {rewards}"
        )
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    state = load_snapshot(args.snapshot)
    reference = load_reference_list(args.reference)
    r = pearson(
        reference, state,
        default_reputation=args.default_reputation,
        include_missing=not args.strict_missing,
    )
    print(f"pearson {r:.6f}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    state = load_snapshot(args.snapshot)
    stats = distribution_stats(state)
    print(f"participants {len(state.values)}")
    print(f"gini {stats.gini:.6f}")
    print(f"top_share {stats.top_share:.6f}")
    print(f"nonzero_fraction {stats.nonzero_fraction:.6f}")
    return 0


def _dot_quote(token: str) -> str:
    return '"' + token.replace("\\", "\\\\").replace('"', '\\"') + '"'


def cmd_export(args: argparse.Namespace) -> int:
    state = load_snapshot(args.snapshot)
    records = load_log(args.log)
    participants = set(state.values)
    edges: dict[tuple[str, str], int] = {}
    for rec in records:
        participants.add(rec.rater)
        participants.add(rec.ratee)
        edges[(rec.rater, rec.ratee)] = edges.get((rec.rater, rec.ratee), 0) + 1

    lines = ["digraph reputation {"]
    for pid in sorted(participants):
        weight = state.values.get(pid, args.default_reputation)
        lines.append(f"  {_dot_quote(pid)} [weight={weight!r}];")
    for (rater, ratee) in sorted(edges):
        lines.append(
            f"  {_dot_quote(rater)} -> {_dot_quote(ratee)} [weight={edges[(rater, ratee)]}];"
        )
    lines.append("}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liquidrank",
        description="Rating-based reputation engine and consensus simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="fold a rating log into reputation snapshots")
    p.add_argument("--log", required=True, help="rating log (.csv or .jsonl)")
    p.add_argument("--config", help="engine config file (flat key = value)")
    p.add_argument("--window", required=True,
                   help="window mode: whole | tx | period:<N> | block:<N>")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--origin", type=int,
                   help="history origin epoch (default: earliest record timestamp)")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("simulate", help="run the consensus simulator")
    p.add_argument("--agencies", type=int, required=True)
    p.add_argument("--faulty", default="",
                   help="fault spec, e.g. divergent:1,silent:2 (assigned to lowest agency ids)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--cycles", type=int, default=10)
    p.add_argument("--config", help="consensus config file (flat key = value)")
    p.add_argument("--min-identical", dest="min_identical", type=float)
    p.add_argument("--max-nonidentical", dest="max_nonidentical", type=float)
    p.add_argument("--timeout", type=int)
    p.add_argument("--por", action="store_true",
                   help="weight receipts by agency reputation")
    p.add_argument("--reward-slots", dest="reward_slots", type=int, default=1)
    p.add_argument("--delay-min", dest="delay_min", type=int, default=1)
    p.add_argument("--delay-max", dest="delay_max", type=int, default=1)
    p.add_argument("--drop-rate", dest="drop_rate", type=float, default=0.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="correlate a snapshot with a reference list")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--default-reputation", dest="default_reputation",
                   type=float, default=0.5)
    p.add_argument("--strict-missing", dest="strict_missing", action="store_true",
                   help="compare only participants present in both maps")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="distribution statistics of a snapshot")
    p.add_argument("--snapshot", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", help="write a DOT graph of a snapshot and its log")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--default-reputation", dest="default_reputation",
                   type=float, default=0.5)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CorrelationUndefinedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LiquidRankError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
