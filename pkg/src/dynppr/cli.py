"""Command-line entry point.

Subcommands:
  track       run the subset embedder over an event stream, writing an
              embeddings TSV and a per-snapshot change report
  compare     diagnostic table of gaps between the push solver, the
              optimization solver, power iteration, and the dense solve
  synth       generate a synthetic event stream file
  hash-audit  distribution tests of the projection hash

Exit codes: 0 ok, 1 runtime error (bad data), 2 configuration error.
Malformed input lines produce a machine-readable JSON record on stderr
with the line number and reason.  DYNPPR_THREADS caps per-source worker
parallelism of the track command.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from .changes import build_report
from .dynamic import push_work_stats
from .embedding import DynamicPPE
from .graph import GraphSnapshot, InvalidEventError, SnapshotSchedule, UnknownNodeError
from .hashing import HashKernel, hash_project, sign_balance_pvalue, uniformity_pvalue
from .io import (
    IdMap,
    MalformedLineError,
    parse_config_file,
    read_event_stream,
    write_embeddings,
    write_event_stream,
    write_report,
)
from .ista import ppr_ista
from .push import (
    ORACLE_MAX_NODES,
    PprState,
    PushConfig,
    TooLargeError,
    forward_push,
    ppr_dense_oracle,
    ppr_power_iteration,
)
from .synth import GENERATORS, InfeasibleSpecError, StreamSpec, generate

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    pass


def _error_record(**fields) -> None:
    print(json.dumps({"error": fields}), file=sys.stderr)


def _parse_nodes(args) -> list[int]:
    if args.nodes:
        try:
            return [int(x) for x in args.nodes.split(",") if x.strip() != ""]
        except ValueError as e:
            raise ConfigError(f"bad --nodes list: {e}") from None
    if args.nodes_file:
        try:
            with open(args.nodes_file, encoding="utf-8") as fh:
                ids = [line.strip() for line in fh if line.strip() and not line.startswith("#")]
        except OSError as e:
            raise ConfigError(str(e)) from None
        if not ids:
            raise ConfigError(f"subset file {args.nodes_file} is empty")
        try:
            return [int(x) for x in ids]
        except ValueError as e:
            raise ConfigError(f"bad node id in {args.nodes_file}: {e}") from None
    raise ConfigError("a tracked subset is required (--nodes or --nodes-file)")


def _load_events(args):
    id_map = None
    if args.id_dict:
        id_map = IdMap.load(args.id_dict) if os.path.exists(args.id_dict) else IdMap()
    events = read_event_stream(args.input, id_map=id_map)
    if args.id_dict and id_map is not None and not os.path.exists(args.id_dict):
        id_map.save(args.id_dict)
    return events, id_map


def _schedule(args) -> SnapshotSchedule:
    if args.cuts:
        cuts = [int(x) for x in args.cuts.split(",")]
        return SnapshotSchedule(mode="cuts", cuts=cuts)
    return SnapshotSchedule(mode="events", batch_size=args.batch_size)


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Config file keys share flag names; explicit flags win."""
    if not getattr(args, "config", None):
        return
    try:
        cfg = parse_config_file(args.config)
    except OSError as e:
        raise ConfigError(str(e)) from None
    booleans = {"adaptive", "work_counter", "double"}
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"unknown config key {key!r}")
        if attr in getattr(args, "_explicit", set()):
            continue
        if attr in booleans:
            setattr(args, attr, value.lower() in ("1", "true", "yes", "on"))
        else:
            current = getattr(args, attr)
            cast = type(current) if current is not None and not isinstance(current, bool) else str
            setattr(args, attr, cast(value))


class _TrackExplicit(argparse.Action):
    """Remember which flags were given explicitly so config keys don't
    override them."""

    def __call__(self, parser, namespace, values, option_string=None):
        if not hasattr(namespace, "_explicit"):
            namespace._explicit = set()
        namespace._explicit.add(self.dest)
        setattr(namespace, self.dest, values)


class _TrackExplicitTrue(argparse.Action):
    def __init__(self, option_strings, dest, **kwargs):
        super().__init__(option_strings, dest, nargs=0, **kwargs)

    def __call__(self, parser, namespace, values, option_string=None):
        if not hasattr(namespace, "_explicit"):
            namespace._explicit = set()
        namespace._explicit.add(self.dest)
        setattr(namespace, self.dest, not option_string.startswith("--no-"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynppr")
    sub = parser.add_subparsers(dest="command", required=True)

    track = sub.add_parser("track", help="run the subset embedder over a stream")
    track.add_argument("--input", action=_TrackExplicit, required=True)
    track.add_argument("--config", help="flat key=value config file")
    track.add_argument("--id-dict", action=_TrackExplicit, default=None)
    track.add_argument("--nodes", action=_TrackExplicit, default=None,
                       help="comma-separated tracked node ids")
    track.add_argument("--nodes-file", action=_TrackExplicit, default=None)
    track.add_argument("--batch-size", action=_TrackExplicit, type=int, default=100)
    track.add_argument("--cuts", action=_TrackExplicit, default=None,
                       help="comma-separated timestamp cuts")
    track.add_argument("--alpha", action=_TrackExplicit, type=float, default=0.15)
    track.add_argument("--epsilon", action=_TrackExplicit, type=float, default=0.1)
    track.add_argument("--adaptive", action=_TrackExplicitTrue, default=True)
    track.add_argument("--no-adaptive", action=_TrackExplicitTrue, dest="adaptive")
    track.add_argument("--dim", action=_TrackExplicit, type=int, default=512)
    track.add_argument("--seed", action=_TrackExplicit, type=int, default=0)
    track.add_argument("--solver", action=_TrackExplicit, choices=("push", "ista"),
                       default="push")
    track.add_argument("--embeddings", action=_TrackExplicit, default="embeddings.tsv")
    track.add_argument("--report", action=_TrackExplicit, default="report.tsv")
    track.add_argument("--min-degree-change", action=_TrackExplicit, type=float,
                       default=None)
    track.add_argument("--work-counter", action=_TrackExplicitTrue, default=False)
    track.add_argument("--double", action=_TrackExplicitTrue, default=False,
                       help="serialize floats with 17 significant digits")
    track.set_defaults(func=cmd_track)

    compare = sub.add_parser("compare", help="solver/oracle gap table")
    compare.add_argument("--input", required=True)
    compare.add_argument("--id-dict", default=None)
    compare.add_argument("--nodes", default=None)
    compare.add_argument("--nodes-file", default=None)
    compare.add_argument("--alpha", type=float, default=0.15)
    compare.add_argument("--epsilon", type=float, default=1e-6)
    compare.set_defaults(func=cmd_compare)

    synth = sub.add_parser("synth", help="generate a synthetic stream")
    synth.add_argument("--generator", choices=GENERATORS, default="er-growth")
    synth.add_argument("--num-nodes", type=int, default=100)
    synth.add_argument("--batches", type=int, default=10)
    synth.add_argument("--batch-size", type=int, default=20)
    synth.add_argument("--delete-fraction", type=float, default=0.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--shock-batch", type=int, default=None)
    synth.add_argument("--shock-node", type=int, default=None)
    synth.add_argument("--shock-factor", type=float, default=3.0)
    synth.add_argument("--rewire-fraction", type=float, default=0.5)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    audit = sub.add_parser("hash-audit", help="kernel distribution tests")
    audit.add_argument("--dim", type=int, default=256)
    audit.add_argument("--seed", type=int, default=0)
    audit.add_argument("--num-ids", type=int, default=1_000_000)
    audit.add_argument("--significance", type=float, default=0.001)
    audit.set_defaults(func=cmd_audit)

    return parser


def cmd_track(args) -> int:
    nodes = _parse_nodes(args)
    events, id_map = _load_events(args)
    schedule = _schedule(args)
    batches = schedule.batches(events)
    threads = int(os.environ.get("DYNPPR_THREADS", "1"))
    precision = 17 if args.double else 9

    if args.solver == "push":
        est = DynamicPPE(
            nodes=nodes, dim=args.dim, alpha=args.alpha, epsilon=args.epsilon,
            adaptive=args.adaptive, seed=args.seed, count_work=args.work_counter,
            threads=max(1, threads),
        )
        est.fit(batches)
        history = est.history_
        degree_history = est.degree_history_
        snapshots = est.snapshots_
        if args.work_counter and est.work_counter_ is not None:
            print(json.dumps({"work": push_work_stats(est.work_counter_)},
                             default=float))
    else:
        history, degree_history, snapshots = _track_with_ista(args, nodes, batches)

    names = id_map.names() if id_map is not None else None

    def rows():
        for t, row in zip(snapshots, history):
            for s in sorted(row):
                yield t, (names[s] if names else s), row[s]

    if names is not None:
        # string ids: emit through a writer that keeps the node column text
        _write_named_embeddings(args.embeddings, rows(), args.dim, precision)
    else:
        write_embeddings(args.embeddings, rows(), args.dim, precision)

    reports = []
    if len(nodes) >= 2:  # a movement ranking needs a reference population
        for i in range(1, len(history)):
            reports.append(
                build_report(
                    snapshots[i], history[i - 1], history[i],
                    degree_history[i], degree_history[i - 1],
                    min_degree_change=args.min_degree_change,
                )
            )
    write_report(args.report, reports, names=names)
    return EXIT_OK


def _write_named_embeddings(path, rows, dim, precision):
    from .io import format_float

    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write("t\tnode\t" + "\t".join(f"v{i}" for i in range(dim)) + "\n")
        for t, node, vec in rows:
            vals = "\t".join(format_float(x, precision) for x in vec)
            fh.write(f"{t}\t{node}\t{vals}\n")
    os.replace(tmp, path)


def _track_with_ista(args, nodes, batches):
    """Per-snapshot re-solve via the optimization solver (no incremental
    state); the regularization weight follows the same precision policy."""
    from .dynamic import DynPprConfig

    cfg = DynPprConfig(epsilon=args.epsilon, alpha=args.alpha, adaptive=args.adaptive)
    kernel = HashKernel(dim=args.dim, seed=args.seed)
    g = GraphSnapshot()
    history, degree_history, snapshots = [], [], []
    for i, batch in enumerate(batches):
        g.apply_events(batch)
        if i == 0:
            continue
        eps_t = cfg.batch_epsilon(g)
        row, degs = {}, {}
        for s in nodes:
            if g.has_node(s):
                pi = ppr_ista(g, s, args.alpha, eps_t)
                estimate = {i_: float(v) for i_, v in enumerate(pi) if v != 0.0}
                degs[s] = g.degree(s)
            else:
                estimate = {}
                degs[s] = 0.0
            row[s] = hash_project(estimate, g.num_nodes, kernel)
        history.append(row)
        degree_history.append(degs)
        snapshots.append(g.snapshot_index)
    return history, degree_history, snapshots


def cmd_compare(args) -> int:
    nodes = _parse_nodes(args)
    events, _ = _load_events(args)
    g = GraphSnapshot().apply_events(events)
    if g.num_nodes > ORACLE_MAX_NODES:
        raise TooLargeError(g.num_nodes)
    alpha, eps = args.alpha, args.epsilon
    print("source\tpair\tl1\tlinf")
    for s in nodes:
        dense = ppr_dense_oracle(g, s, alpha)
        power = ppr_power_iteration(g, s, alpha, eps)
        state = forward_push(g, PprState.fresh(s), PushConfig(alpha=alpha, epsilon=eps))
        push_vec = state.estimate_vector(g.num_nodes)
        ista_vec = ppr_ista(g, s, alpha, eps)
        vecs = {"push": push_vec, "ista": ista_vec, "power": power, "dense": dense}
        names = list(vecs)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                gap = vecs[a] - vecs[b]
                print(f"{s}\t{a}-{b}\t{np.abs(gap).sum():.6e}\t{np.abs(gap).max():.6e}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = StreamSpec(
        generator=args.generator, nodes=args.num_nodes, batches=args.batches,
        batch_size=args.batch_size, delete_fraction=args.delete_fraction,
        seed=args.seed, shock_batch=args.shock_batch, shock_node=args.shock_node,
        shock_factor=args.shock_factor, rewire_fraction=args.rewire_fraction,
    )
    stream = generate(spec)
    write_event_stream(args.out, [ev for batch in stream.batches for ev in batch])
    print(json.dumps({"batches": len(stream.batches),
                      "events": sum(len(b) for b in stream.batches),
                      **stream.info}))
    return EXIT_OK


def cmd_audit(args) -> int:
    kernel = HashKernel(dim=args.dim, seed=args.seed)
    p_uniform = uniformity_pvalue(kernel, args.num_ids)
    p_sign = sign_balance_pvalue(kernel, args.num_ids)
    ok = p_uniform >= args.significance and p_sign >= args.significance
    print(json.dumps({
        "dim": args.dim, "seed": args.seed, "num_ids": args.num_ids,
        "bucket_uniformity_pvalue": p_uniform, "sign_balance_pvalue": p_sign,
        "significance": args.significance, "pass": ok,
    }))
    return EXIT_OK if ok else EXIT_RUNTIME


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args, parser)
        return args.func(args)
    except ConfigError as e:
        _error_record(reason=str(e), kind="config")
        return EXIT_CONFIG
    except MalformedLineError as e:
        _error_record(line=e.lineno, reason=e.reason, kind="malformed-line")
        return EXIT_RUNTIME
    except (InvalidEventError, InfeasibleSpecError, TooLargeError, UnknownNodeError) as e:
        _error_record(reason=str(e), kind=type(e).__name__)
        return EXIT_RUNTIME
    except OSError as e:
        _error_record(reason=str(e), kind="io")
        return EXIT_CONFIG
    except ValueError as e:
        _error_record(reason=str(e), kind="config")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
