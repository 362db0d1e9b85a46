"""Command-line interface.

Three subcommands: ``run`` executes a single optimizer run and writes its
trace; ``bench`` sweeps (algorithm, seed) arms and writes traces plus a
summary table; ``plot-data`` converts stored traces into a long-format
convergence table. Each accepts ``--config FILE`` (JSON mirroring the flag
names, underscores for hyphens); explicit flags override the file. The
``--figure`` flag renders a convergence figure next to the delimited output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .benchmarks import FUNCTION_NAMES, get_function
from .harness import (ALGORITHM_NAMES, BenchConfig, SUMMARY_COLUMNS,
                      emit_plot_data, read_trace, run_bench, write_trace)
from .optimizer import Explo2Config, LambdaSchedule, explo2

_RUN_DEFAULTS = {
    "function": "rastrigin",
    "dim": 2,
    "budget_multiplier": 25,
    "parallel": 1,
    "seed": 0,
    "lambda": "linear",
    "init": "uniform",
    "out": "trace.jsonl",
    "figure": None,
}

_BENCH_DEFAULTS = {
    "function": "rastrigin",
    "dim": 2,
    "budget_multiplier": 25,
    "parallel": 1,
    "seeds": "0,1,2",
    "algorithms": "explo2,random_search",
    "lambda": "linear",
    "init": "uniform",
    "out": "bench_out",
    "figure": None,
}

_PLOT_DEFAULTS = {
    "in": None,
    "out": "plot_data.csv",
    "figure": None,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magopt",
        description="Magnitude-based surrogate optimization and benchmarking.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON file mirroring the flags; "
                                        "explicit flags override it")
        p.add_argument("--function", choices=FUNCTION_NAMES)
        p.add_argument("--dim", type=int)
        p.add_argument("--budget-multiplier", type=int, dest="budget_multiplier",
                       help="budget = multiplier * dim (default 25)")
        p.add_argument("--parallel", type=int, help="batch size n_parallel")
        p.add_argument("--lambda", choices=("linear", "flat-then-linear"),
                       dest="lambda_kind", help="regularizer schedule")
        p.add_argument("--init", choices=("uniform", "near-corners", "corners"))
        p.add_argument("--out", help="output path")
        p.add_argument("--figure", help="also render a convergence figure here")

    run_p = sub.add_parser("run", help="single optimizer run, trace to --out")
    add_common(run_p)
    run_p.add_argument("--seed", type=int)

    bench_p = sub.add_parser("bench", help="sweep arms, traces + summary to --out dir")
    add_common(bench_p)
    bench_p.add_argument("--seeds", help="comma-separated seed list")
    bench_p.add_argument("--algorithms",
                         help=f"comma-separated subset of {', '.join(ALGORITHM_NAMES)}")

    plot_p = sub.add_parser("plot-data",
                            help="convert stored traces to a convergence table")
    plot_p.add_argument("--config")
    plot_p.add_argument("--in", dest="in_path",
                        help="trace file(s), comma-separated, or a directory of .jsonl")
    plot_p.add_argument("--out")
    plot_p.add_argument("--figure")
    return parser


def _merge(args: argparse.Namespace, defaults: dict) -> dict:
    """Resolve each option: CLI flag, then config file, then default."""
    file_cfg = {}
    if getattr(args, "config", None):
        file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    merged = {}
    for key, default in defaults.items():
        dest = {"lambda": "lambda_kind", "in": "in_path"}.get(key, key)
        cli_val = getattr(args, dest, None)
        if cli_val is not None:
            merged[key] = cli_val
        elif key in file_cfg:
            merged[key] = file_cfg[key]
        else:
            merged[key] = default
    return merged


def _as_int_tuple(value) -> tuple:
    if isinstance(value, str):
        return tuple(int(v) for v in value.split(",") if v.strip())
    return tuple(int(v) for v in value)


def _as_str_tuple(value) -> tuple:
    if isinstance(value, str):
        return tuple(v.strip() for v in value.split(",") if v.strip())
    return tuple(str(v) for v in value)


def _norm(value: str) -> str:
    return value.replace("-", "_")


def _schedule(kind: str) -> LambdaSchedule:
    return (LambdaSchedule.flat_then_linear() if _norm(kind) == "flat_then_linear"
            else LambdaSchedule.linear())


def cmd_run(args: argparse.Namespace) -> int:
    opts = _merge(args, _RUN_DEFAULTS)
    tf = get_function(opts["function"], int(opts["dim"]))
    budget = int(opts["budget_multiplier"]) * tf.dim
    config = Explo2Config(
        budget=budget, n_parallel=int(opts["parallel"]), seed=int(opts["seed"]),
        lambda_schedule=_schedule(opts["lambda"]), init=_norm(opts["init"]))
    _, trace = explo2(tf.fn, tf.lower, tf.upper, config)
    write_trace(trace, opts["out"])
    best = trace.best_curve()[-1]
    print(f"{tf.name} D={tf.dim} N={budget} seed={opts['seed']}: "
          f"best {best:.6g}; trace -> {opts['out']}")
    if opts["figure"]:
        from .figures import save_convergence_figure
        save_convergence_figure({("explo2", int(opts["seed"])): trace},
                                opts["figure"], title=f"{tf.name} D={tf.dim}")
        print(f"figure -> {opts['figure']}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    opts = _merge(args, _BENCH_DEFAULTS)
    config = BenchConfig(
        function=opts["function"], dim=int(opts["dim"]),
        budget_multiplier=int(opts["budget_multiplier"]),
        n_parallel=int(opts["parallel"]),
        seeds=_as_int_tuple(opts["seeds"]),
        algorithms=_as_str_tuple(opts["algorithms"]),
        lambda_kind=_norm(opts["lambda"]), init=_norm(opts["init"]))
    result = run_bench(config, out_dir=opts["out"])
    widths = [max(len(c), 12) for c in SUMMARY_COLUMNS]
    print("  ".join(c.ljust(w) for c, w in zip(SUMMARY_COLUMNS, widths)))
    for row in result.summary:
        cells = [row[c] if not isinstance(row[c], float) else f"{row[c]:.6g}"
                 for c in SUMMARY_COLUMNS]
        print("  ".join(str(c).ljust(w) for c, w in zip(cells, widths)))
    print(f"traces and summary -> {opts['out']}")
    if opts["figure"]:
        from .figures import save_convergence_figure
        save_convergence_figure(result.traces, opts["figure"],
                                title=f"{config.function} D={config.dim}")
        print(f"figure -> {opts['figure']}")
    for (algo, seed), message in result.errors.items():
        print(f"arm failed: {algo} seed {seed}: {message}", file=sys.stderr)
    return 0 if not result.errors else 1


def _collect_traces(in_arg: str) -> dict:
    paths = []
    for part in in_arg.split(","):
        part = part.strip()
        if not part:
            continue
        p = Path(part)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.jsonl")))
        else:
            paths.append(p)
    traces = {}
    for p in paths:
        stem = p.stem
        if "_seed" in stem:
            algo, _, seed = stem.rpartition("_seed")
            try:
                key = (algo, int(seed))
            except ValueError:
                key = (stem, 0)
        else:
            key = (stem, 0)
        traces[key] = read_trace(p)
    return traces


def cmd_plot_data(args: argparse.Namespace) -> int:
    opts = _merge(args, _PLOT_DEFAULTS)
    if not opts["in"]:
        print("plot-data needs --in (trace files or a directory)", file=sys.stderr)
        return 2
    traces = _collect_traces(str(opts["in"]))
    text = emit_plot_data(traces)
    Path(opts["out"]).write_text(text, encoding="utf-8")
    print(f"{len(traces)} trace(s) -> {opts['out']}")
    if opts["figure"]:
        from .figures import save_convergence_figure
        save_convergence_figure(traces, opts["figure"])
        print(f"figure -> {opts['figure']}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "bench":
            return cmd_bench(args)
        if args.command == "plot-data":
            return cmd_plot_data(args)
    except (KeyError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
