"""Command-line entry point: ``copgambler <command> [options]``.

Exit codes: 0 success, 1 usage or input error, 2 a reproduced constant is
off, 3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bounds
from .adversary import maximize_capture_time, maximize_evasion
from .errors import BudgetExceeded, PursuitError
from .exact import DEFAULT_BUDGET, Mode, expected_capture_time, policy_sweep_aggregate
from .gambler import parse_distribution
from .graph import FAMILIES, Graph, generate, parse_graph, spanning_tree
from .montecarlo import estimate_expected_capture
from .sweep import DEFAULT_C, StrategyConfig, build_sweep

SCHEMA_VERSION = 1
CGRID_COLUMNS = ["family", "n", "c", "dist", "trials", "seed", "mean", "stderr", "mean_over_n"]
SIMULATE_COLUMNS = ["family", "n", "c", "dist", "trials", "seed", "mean", "stderr", "mean_over_n"]

EXIT_OK, EXIT_USAGE, EXIT_BOUNDS, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="edge-list file")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--graph-seed", type=int, help="seed for random families (default: --seed)")
    p.add_argument("--edge-p", type=float, default=0.5, help="edge probability for gnp_connected")


def _add_strategy_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--c", type=float, default=DEFAULT_C, help="wait-set fraction")
    p.add_argument("--root", type=int, default=0)
    p.add_argument("--freeze-u", action="store_true", help="draw the wait set once per game")
    p.add_argument("--freeze-direction", action="store_true", help="flip the coin once per game")


def _add_output_args(p: argparse.ArgumentParser, formats=("ndjson",)) -> None:
    p.add_argument("--out", help="write records here instead of stdout")
    p.add_argument("--format", choices=formats, default=formats[0])


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(add_help=False)
    top.add_argument("--seed", type=int, help="master seed (overrides $SEED)")
    top.add_argument("--config", help="JSON file of option defaults")
    # SUPPRESS keeps a subcommand from resetting values given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS)

    parser = _Parser(prog="copgambler", description=__doc__.splitlines()[0], parents=[top])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", parents=[common], help="write a graph in edge-list format")
    _add_graph_args(p)
    p.add_argument("--out")

    p = sub.add_parser("bounds", parents=[common], help="reproduce the analytic constants")
    p.add_argument("--c", type=float, default=DEFAULT_C)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo capture time")
    _add_graph_args(p)
    _add_strategy_args(p)
    p.add_argument("--dist", default="uniform")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=1)
    _add_output_args(p, ("ndjson", "csv"))

    p = sub.add_parser("exact", parents=[common], help="exact expected capture time")
    _add_graph_args(p)
    _add_strategy_args(p)
    p.add_argument("--dist", default="uniform")
    p.add_argument("--mode", choices=("enumerated", "sampled", "auto"), default="enumerated")
    p.add_argument("--k", type=int, default=100_000, help="sweeps drawn in sampled mode")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _add_output_args(p)

    p = sub.add_parser("cgrid", parents=[common], help="capture-time coefficient across c")
    _add_graph_args(p)
    p.add_argument("--c-list", default="0,0.25,0.5,0.72912,0.9")
    p.add_argument("--root", type=int, default=0)
    p.add_argument("--dist", default="uniform")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")

    p = sub.add_parser("adversary", parents=[common], help="worst-case gambler search")
    _add_graph_args(p)
    _add_strategy_args(p)
    p.add_argument("--objective", choices=("evasion", "capture_time"), default="evasion")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--mode", choices=("enumerated", "sampled", "auto"), default="auto")
    p.add_argument("--k", type=int, default=20_000)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    _add_output_args(p)

    p = sub.add_parser("show-sweep", parents=[common], help="print one sampled sweep as JSON")
    _add_graph_args(p)
    _add_strategy_args(p)
    _add_output_args(p)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse with precedence: command-line flags > config file > defaults.

    The seed comes from ``--seed``, then ``$SEED``, then the config, then 0.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            overrides = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(overrides) - known
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**{k: v for k, v in overrides.items() if k != "seed"})
        args = parser.parse_args(argv)
        if args.seed is None and "SEED" not in os.environ and "seed" in overrides:
            args.seed = int(overrides["seed"])
    if args.seed is None:
        env = os.environ.get("SEED")
        try:
            args.seed = int(env) if env is not None else 0
        except ValueError:
            parser.error(f"SEED must be an integer, got {env!r}")
    return args


def _graph(args) -> tuple[Graph, str]:
    if args.graph:
        return parse_graph(Path(args.graph).read_text()), str(args.graph)
    if args.family is None or args.n is None:
        raise UsageError("give either --graph FILE or --family and --n")
    gseed = args.seed if args.graph_seed is None else args.graph_seed
    return generate(args.family, args.n, gseed, args.edge_p), args.family


def _strategy(args, c: Optional[float] = None) -> StrategyConfig:
    return StrategyConfig(
        c=args.c if c is None else c,
        root=args.root,
        resample_U_each_sweep=not getattr(args, "freeze_u", False),
        resample_direction_each_sweep=not getattr(args, "freeze_direction", False),
    )


def _mode(args) -> Mode:
    return Mode(args.mode, k=args.k, seed=args.seed, budget=args.budget)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _ndjson(records) -> str:
    return "".join(json.dumps({"schema_version": SCHEMA_VERSION, **r}) + "\n" for r in records)


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_gen(args) -> int:
    g, _ = _graph(args)
    _emit(g.to_text(), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    report = bounds.bound_report(args.c)
    checks = report.check()
    failed = [name for name, (_, _, ok) in checks.items() if not ok]
    if args.json:
        record = {"schema_version": SCHEMA_VERSION, **report.to_dict(), "checks": {
            name: {"value": v, "target": t, "ok": ok} for name, (v, t, ok) in checks.items()
        }, "ok": not failed}
        sys.stdout.write(json.dumps(record) + "\n")
    else:
        for name, value in report.to_dict().items():
            mark = ""
            if name in checks:
                _, target, ok = checks[name]
                mark = f"  target {target:<10} {'ok' if ok else 'MISMATCH'}"
            sys.stdout.write(f"{name:<16} {value:>14.8f}{mark}\n")
    return EXIT_BOUNDS if failed else EXIT_OK


def cmd_simulate(args) -> int:
    g, label = _graph(args)
    d = parse_distribution(args.dist, g.n)
    cfg = _strategy(args)
    est = estimate_expected_capture(g, cfg, d, args.trials, args.seed, workers=args.workers)
    record = {
        "command": "simulate",
        "family": label,
        "n": g.n,
        "c": cfg.c,
        "root": cfg.root,
        "resample_U_each_sweep": cfg.resample_U_each_sweep,
        "resample_direction_each_sweep": cfg.resample_direction_each_sweep,
        "dist": args.dist,
        "distribution": d.to_list(),
        "trials": est.trials,
        "seed": args.seed,
        "mean": est.mean,
        "stderr": est.stderr,
        "mean_over_n": est.mean / g.n,
        "min": est.min,
        "max": est.max,
    }
    if args.format == "csv":
        _emit(_csv([record], SIMULATE_COLUMNS), args.out)
    else:
        _emit(_ndjson([record]), args.out)
    return EXIT_OK


def cmd_exact(args) -> int:
    g, label = _graph(args)
    d = parse_distribution(args.dist, g.n)
    cfg = _strategy(args)
    mode = _mode(args)
    result = expected_capture_time(g, cfg, d, mode)
    stats = result.stats or policy_sweep_aggregate(g, cfg, d, mode)
    record = {
        "command": "exact",
        "graph": label,
        "n": g.n,
        "c": cfg.c,
        "distribution": d.to_list(),
        "q_bar": stats.q_bar,
        "e_len_given_evade": stats.e_len_given_evade,
        "e_turn_given_capture": stats.e_turn_given_capture,
        "expected_capture_time": result.value,
        "e_failed_turns": result.e_failed_turns,
        "e_success_turns": result.e_success_turns,
        "mode": stats.mode,
        "seed": args.seed if stats.mode == "sampled" else None,
    }
    _emit(_ndjson([record]), args.out)
    return EXIT_OK


def cmd_cgrid(args) -> int:
    g, label = _graph(args)
    d = parse_distribution(args.dist, g.n)
    try:
        grid = [float(x) for x in args.c_list.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --c-list {args.c_list!r}") from None
    rows = []
    for c in grid:
        est = estimate_expected_capture(g, _strategy(args, c), d, args.trials, args.seed, workers=args.workers)
        rows.append({
            "family": label, "n": g.n, "c": c, "dist": args.dist, "trials": est.trials,
            "seed": args.seed, "mean": est.mean, "stderr": est.stderr, "mean_over_n": est.mean / g.n,
        })
    _emit(_csv(rows, CGRID_COLUMNS), args.out)
    best = min(rows, key=lambda r: r["mean_over_n"])
    sys.stderr.write(
        f"lowest coefficient {best['mean_over_n']:.5f} at c={best['c']}; "
        f"worst-case optimum c*={bounds.optimize_constant()[2]:.5f}\n"
    )
    return EXIT_OK


def cmd_adversary(args) -> int:
    g, label = _graph(args)
    cfg = _strategy(args)
    if args.objective == "evasion":
        res = maximize_evasion(g, cfg, args.restarts, args.iters, args.seed, _mode(args))
    else:
        res = maximize_capture_time(g, cfg, args.restarts, args.iters, args.seed, args.budget)
    record = {"command": "adversary", "graph": label, "n": g.n, "c": cfg.c, **res.to_dict()}
    if args.objective == "capture_time":
        record["best_objective_over_n"] = res.best_objective / g.n
    _emit(_ndjson([record]), args.out)
    return EXIT_OK


def cmd_show_sweep(args) -> int:
    g, label = _graph(args)
    cfg = _strategy(args)
    t = spanning_tree(g, cfg.root)
    sweep = build_sweep(t, cfg, np.random.default_rng(args.seed))
    record = {
        "command": "show-sweep",
        "graph": label,
        "n": g.n,
        "c": cfg.c,
        "root": sweep.root,
        "direction": sweep.direction,
        "wait_set": sorted(sweep.wait_set),
        "length": len(sweep),
        "visits": sweep.to_json(),
    }
    _emit(_ndjson([record]), args.out)
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "exact": cmd_exact,
    "cgrid": cmd_cgrid,
    "adversary": cmd_adversary,
    "show-sweep": cmd_show_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        sys.stderr.write(f"copgambler: {exc}\n")
        return EXIT_BUDGET
    except (UsageError, PursuitError, OSError) as exc:
        sys.stderr.write(f"copgambler: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
