"""Command-line interface: generate, associate, evaluate, report.

Exit codes:
    0  success
    1  file could not be read or written
    2  bad config, malformed input file or input too large for the mode
    3  fragment ordering violation in strict online mode
    4  solver stalled
    5  fragment without a ground-truth label
    6  trajectory file references fragments absent from the fragment file
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from itertools import accumulate
from pathlib import Path
from typing import Optional, Sequence

from . import io as nio
from .config import MODES, ExperimentConfig, load_config
from .errors import InvalidConfig, MissingLabel, OutOfOrderFragment, SolverStall, TooLarge
from .metrics import format_table
from .pipeline import associate, evaluate_all, generate

log = logging.getLogger("onlinencc")

EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_ORDER = 3
EXIT_STALL = 4
EXIT_LABEL = 5
EXIT_MISMATCH = 6

PHASES = ("t_add_node", "t_find_min_cycle", "t_push_flow", "t_clean_graph")


def _fail(code: int, msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _config(path: Optional[str]) -> ExperimentConfig:
    return load_config(path) if path else ExperimentConfig()


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        cfg = _config(args.config)
        if args.seed is not None:
            cfg.sim = replace(cfg.sim, seed=args.seed)
    except InvalidConfig as exc:
        return _fail(EXIT_CONFIG, str(exc))
    gt, frags = generate(cfg)
    try:
        nio.write_fragments(nio.ensure_parent(args.out_gt), gt)
        nio.write_fragments(nio.ensure_parent(args.out_fragments), frags)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    print(f"{len(gt)} trajectories, {len(frags)} fragments")
    return 0


def cmd_associate(args: argparse.Namespace) -> int:
    try:
        cfg = _config(args.config)
        solver = cfg.solver
        overrides = {}
        if args.mode is not None:
            overrides["mode"] = args.mode
        if args.window_seconds is not None:
            overrides["window_seconds"] = args.window_seconds
        if args.strict_order is not None:
            overrides["strict_order"] = args.strict_order
        solver = replace(solver, **overrides)
    except InvalidConfig as exc:
        return _fail(EXIT_CONFIG, str(exc))

    try:
        result = associate(nio.iter_fragments(args.fragments), cfg.cost, solver)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    except (nio.FormatError, TooLarge, InvalidConfig) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    except OutOfOrderFragment as exc:
        return _fail(EXIT_ORDER, f"{exc} (use --lenient-order to admit it uncertified)")
    except SolverStall as exc:
        return _fail(EXIT_STALL, str(exc))

    try:
        nio.write_trajectories(nio.ensure_parent(args.out), result.trajectories)
        if args.stats:
            nio.write_stats(nio.ensure_parent(args.stats), result.stats)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    note = "" if result.certified else " (not certified: out-of-order input)"
    print(
        f"{len(result.trajectories)} trajectories, total cost {result.total_cost:.9g}, "
        f"{len(result.unassociated)} unassociated, {result.wall_time:.2f} s{note}"
    )
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    try:
        gt = nio.read_fragments(args.gt)
        frags = nio.read_fragments(args.fragments)
        trajs = nio.read_trajectories(args.trajectories)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    except nio.FormatError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    try:
        reports = evaluate_all(gt, frags, trajs)
    except MissingLabel as exc:
        return _fail(EXIT_LABEL, str(exc))
    except KeyError as exc:
        return _fail(EXIT_MISMATCH, f"{exc.args[0]}; do the trajectory and fragment files match?")
    print(format_table(*reports))
    if args.out:
        record = {
            name: rep.as_dict() for name, rep in zip(("ground_truth", "fragments", "result"), reports)
        }
        try:
            nio.ensure_parent(args.out).write_text(json.dumps(record, indent=2) + "\n")
        except OSError as exc:
            return _fail(EXIT_IO, str(exc))
    return 0


def _plot(out_dir: Path, ks, sizes, cumulative) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(ks, [s[0] for s in sizes], label="nodes")
    ax.plot(ks, [s[1] for s in sizes], label="edges")
    ax.set_xlabel("iteration k")
    ax.set_ylabel("count")
    ax.set_title("Graph size at each iteration")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_dir / "graph_size.png", dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 3.5))
    for phase, series in cumulative.items():
        ax.plot(ks, series, label=phase[2:])
    ax.set_xlabel("iteration k")
    ax.set_ylabel("cumulative runtime (s)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_dir / "cumulative_runtime.png", dpi=120)
    plt.close(fig)


def cmd_report(args: argparse.Namespace) -> int:
    try:
        stats = nio.read_stats(args.stats)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    except nio.FormatError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    recs = stats.records
    ks = [r.k for r in recs]
    sizes = [(r.node_count, r.edge_count) for r in recs]
    cumulative = {p: list(accumulate(getattr(r, p) for r in recs)) for p in PHASES}

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "graph_size.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("k", "node_count", "edge_count"))
            w.writerows((k, n, e) for k, (n, e) in zip(ks, sizes))
        with open(out_dir / "cumulative_runtime.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("k",) + PHASES + ("total",))
            for i, k in enumerate(ks):
                row = [cumulative[p][i] for p in PHASES]
                w.writerow([k, *row, sum(row)])
        if args.plot:
            _plot(out_dir, ks, sizes, cumulative)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    except ImportError:
        return _fail(EXIT_IO, "plotting needs matplotlib (pip install 'onlinencc[plot]')")

    if recs:
        totals = {p: cumulative[p][-1] for p in PHASES}
        grand = sum(totals.values()) or 1.0
        print(f"{len(recs)} iterations")
        print(f"nodes: min {min(n for n, _ in sizes)}, max {max(n for n, _ in sizes)}")
        print(f"edges: min {min(e for _, e in sizes)}, max {max(e for _, e in sizes)}")
        for p in PHASES:
            print(f"{p[2:]:>15}: {totals[p]:.4f} s ({totals[p] / grand:.1%})")
    else:
        print("0 iterations")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onlinencc", description="Online fragment association by negative cycle canceling.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate trajectories and fragment them")
    p.add_argument("--config", help="YAML experiment config (defaults if omitted)")
    p.add_argument("--seed", type=int, help="override sim.seed")
    p.add_argument("--out-gt", required=True, help="ground-truth JSONL")
    p.add_argument("--out-fragments", "--out", dest="out_fragments", required=True, help="fragments JSONL")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("associate", help="link fragments into trajectories")
    p.add_argument("--fragments", required=True, help="fragments JSONL, ordered by last timestamp")
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--mode", choices=MODES, help="overrides solver.mode")
    p.add_argument("--window-seconds", type=float, help="overrides solver.window_seconds")
    order = p.add_mutually_exclusive_group()
    order.add_argument("--strict-order", dest="strict_order", action="store_true", default=None)
    order.add_argument("--lenient-order", dest="strict_order", action="store_false")
    p.add_argument("--out", required=True, help="trajectories JSONL")
    p.add_argument("--stats", help="per-iteration stats CSV")
    p.set_defaults(func=cmd_associate)

    p = sub.add_parser("evaluate", help="score trajectories against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--fragments", required=True)
    p.add_argument("--trajectories", required=True)
    p.add_argument("--out", help="write the reports as JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="graph-size and runtime series from a stats CSV")
    p.add_argument("--stats", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--plot", action="store_true", help="also render PNG plots")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
