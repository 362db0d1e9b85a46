"""Benchmark harness: baselines, experiment sweeps, trace persistence, and
plot-data emission.

An experiment arm is one (algorithm, seed) pair run to a fixed evaluation
budget; the fixed-budget best value is the metric throughout. Traces are
persisted as JSON Lines, one record per evaluation with repr-exact decimals
(full double precision, so rereading reproduces the floats bit for bit;
IEEE infinities appear as ``Infinity``). Summaries and plot data are plain
delimited text for external tooling; nothing in this module renders plots.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .benchmarks import get_function, with_random_shift
from .optimizer import Explo2Config, LambdaSchedule, RunTrace, TraceRecord, explo2
from .solver import minimize_box

__all__ = [
    "ALGORITHM_NAMES",
    "BenchConfig",
    "BenchResult",
    "SUMMARY_COLUMNS",
    "random_search",
    "inner_only",
    "run_arm",
    "run_bench",
    "summarize",
    "checkpoint_budgets",
    "write_trace",
    "read_trace",
    "write_summary",
    "emit_plot_data",
    "parse_plot_data",
]

ALGORITHM_NAMES = ("explo2", "random_search", "inner_only",
                   "pure_explore", "pure_exploit")

SUMMARY_COLUMNS = ("algorithm", "function", "dim", "checkpoint",
                   "median", "q25", "q75", "n_seeds")


def _clean(raw) -> tuple[float, bool]:
    v = float(raw)
    if not np.isfinite(v):
        return float("inf"), True
    return v, False


def random_search(f, lower, upper, budget: int, seed: int) -> RunTrace:
    """Control arm: ``budget`` i.i.d. uniform evaluations."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rng = np.random.default_rng(seed)
    points = rng.uniform(lower, upper, size=(budget, lower.size))
    trace = RunTrace()
    best = np.inf
    started = time.perf_counter()
    for i in range(budget):
        value, non_finite = _clean(f(points[i]))
        best = min(best, value)
        trace.append(TraceRecord(
            eval_index=i + 1, point=points[i].copy(), value=value,
            best_so_far=best, batch_id=0, lam=0.0,
            wall_time=time.perf_counter() - started, non_finite=non_finite))
    return trace


class _BudgetExhausted(Exception):
    pass


def inner_only(f, lower, upper, budget: int, seed: int,
               tol: float = 1e-6) -> RunTrace:
    """The optimizer's local solver run directly on the objective: repeated
    restarts from uniform starts, every probe of ``f`` (including its
    finite-difference probes) counted against the budget."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    rng = np.random.default_rng(seed)
    trace = RunTrace()
    best = np.inf
    count = 0
    restart = 0
    started = time.perf_counter()

    def probe(x):
        nonlocal count, best
        if count >= budget:
            raise _BudgetExhausted
        value, non_finite = _clean(f(x))
        count += 1
        best = min(best, value)
        trace.append(TraceRecord(
            eval_index=count, point=np.array(x, dtype=float), value=value,
            best_so_far=best, batch_id=restart, lam=0.0,
            wall_time=time.perf_counter() - started, non_finite=non_finite))
        return value

    while count < budget:
        restart += 1
        x0 = rng.uniform(lower, upper)
        try:
            minimize_box(probe, x0, lower, upper, tol=tol)
        except _BudgetExhausted:
            break
    return trace


def _schedule_for(algorithm: str, lambda_kind: str, budget: int) -> LambdaSchedule:
    if algorithm == "pure_explore":
        return LambdaSchedule.from_table(np.ones(budget))
    if algorithm == "pure_exploit":
        return LambdaSchedule.from_table(np.zeros(budget))
    if lambda_kind == "linear":
        return LambdaSchedule.linear()
    if lambda_kind == "flat_then_linear":
        return LambdaSchedule.flat_then_linear()
    raise ValueError(f"unknown lambda kind {lambda_kind!r}")


def run_arm(algorithm: str, tf, budget: int, n_parallel: int, seed: int,
            lambda_kind: str = "linear", init: str = "uniform") -> RunTrace:
    """Run one (algorithm, seed) arm on a test function."""
    if algorithm == "random_search":
        return random_search(tf.fn, tf.lower, tf.upper, budget, seed)
    if algorithm == "inner_only":
        return inner_only(tf.fn, tf.lower, tf.upper, budget, seed)
    if algorithm not in ("explo2", "pure_explore", "pure_exploit"):
        raise KeyError(f"unknown algorithm {algorithm!r}; "
                       f"registered: {', '.join(ALGORITHM_NAMES)}")
    config = Explo2Config(
        budget=budget, n_parallel=n_parallel, seed=seed,
        lambda_schedule=_schedule_for(algorithm, lambda_kind, budget),
        init=init)
    _, trace = explo2(tf.fn, tf.lower, tf.upper, config)
    return trace


@dataclass
class BenchConfig:
    """One sweep: a function/dimension, a budget, and a set of arms."""

    function: str
    dim: int
    budget_multiplier: int = 25
    n_parallel: int = 1
    seeds: tuple = (0,)
    algorithms: tuple = ("explo2", "random_search")
    lambda_kind: str = "linear"
    init: str = "uniform"
    shift_seed: Optional[int] = None

    @property
    def budget(self) -> int:
        return self.budget_multiplier * self.dim

    def validate(self) -> None:
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if not self.seeds:
            raise ValueError("need at least one seed")
        for algo in self.algorithms:
            if algo not in ALGORITHM_NAMES:
                raise ValueError(f"unknown algorithm {algo!r}")
        if self.budget <= self.dim + 1:
            raise ValueError(
                f"budget {self.budget} must exceed dim+1 = {self.dim + 1}")


@dataclass
class BenchResult:
    traces: dict = field(default_factory=dict)    # (algorithm, seed) -> RunTrace
    summary: list = field(default_factory=list)   # row dicts, SUMMARY_COLUMNS keys
    errors: dict = field(default_factory=dict)    # (algorithm, seed) -> message


def checkpoint_budgets(budget: int) -> tuple[int, ...]:
    """Quarter, half, and full budget (deduplicated, at least 1)."""
    return tuple(sorted({max(1, budget // 4), max(1, budget // 2), budget}))


def summarize(traces: dict, function: str, dim: int, budget: int) -> list[dict]:
    """Per-algorithm median and quartiles of best_so_far at the checkpoint
    budgets, one row per (algorithm, checkpoint)."""
    algorithms = []
    for algo, _ in traces:
        if algo not in algorithms:
            algorithms.append(algo)
    rows = []
    for algo in algorithms:
        curves = [tr.best_curve() for (a, _), tr in traces.items() if a == algo]
        for cp in checkpoint_budgets(budget):
            vals = np.array([curve[cp - 1] for curve in curves])
            rows.append({
                "algorithm": algo, "function": function, "dim": dim,
                "checkpoint": cp,
                "median": float(np.median(vals)),
                "q25": float(np.percentile(vals, 25)),
                "q75": float(np.percentile(vals, 75)),
                "n_seeds": len(vals),
            })
    return rows


def run_bench(config: BenchConfig, out_dir=None) -> BenchResult:
    """Run every (algorithm, seed) arm; persist traces and summary when an
    output directory is given. A failing arm is recorded in ``errors`` and
    never aborts the sweep."""
    config.validate()
    tf = get_function(config.function, config.dim)
    if config.shift_seed is not None:
        tf = with_random_shift(tf, config.shift_seed)
    result = BenchResult()
    for algo in config.algorithms:
        for seed in config.seeds:
            try:
                result.traces[(algo, seed)] = run_arm(
                    algo, tf, config.budget, config.n_parallel, seed,
                    config.lambda_kind, config.init)
            except Exception as err:
                result.errors[(algo, seed)] = f"{type(err).__name__}: {err}"
    result.summary = summarize(result.traces, tf.name, config.dim, config.budget)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for (algo, seed), tr in result.traces.items():
            write_trace(tr, out / f"{algo}_seed{seed}.jsonl")
        write_summary(result.summary, out / "summary.csv")
    return result


# ---------------------------------------------------------------------------
# Persistence


def trace_lines(trace: RunTrace) -> list[str]:
    """Canonical serialization: one JSON object per evaluation with the six
    trace fields. Floats use shortest round-trip decimals (full precision)."""
    lines = []
    for r in trace:
        lines.append(json.dumps({
            "eval_index": r.eval_index,
            "point": [float(c) for c in r.point],
            "value": r.value,
            "best_so_far": r.best_so_far,
            "batch_id": r.batch_id,
            "lambda": r.lam,
        }))
    return lines


def write_trace(trace: RunTrace, path) -> None:
    Path(path).write_text("\n".join(trace_lines(trace)) + "\n", encoding="utf-8")


def read_trace(path) -> RunTrace:
    trace = RunTrace()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        value = float(d["value"])
        trace.append(TraceRecord(
            eval_index=int(d["eval_index"]),
            point=np.array(d["point"], dtype=float),
            value=value,
            best_so_far=float(d["best_so_far"]),
            batch_id=int(d["batch_id"]),
            lam=float(d["lambda"]),
            non_finite=not np.isfinite(value)))
    return trace


def write_summary(rows: list[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c]
                             for c in SUMMARY_COLUMNS])


def emit_plot_data(traces: dict) -> str:
    """Long-format convergence table (algorithm, seed, eval_index,
    best_so_far) as CSV text, rows sorted by arm then evaluation. An empty
    trace collection yields just the header."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("algorithm", "seed", "eval_index", "best_so_far"))
    for (algo, seed) in sorted(traces):
        for r in traces[(algo, seed)]:
            writer.writerow((algo, seed, r.eval_index, repr(r.best_so_far)))
    return buf.getvalue()


def parse_plot_data(text: str) -> dict:
    """Inverse of ``emit_plot_data``: (algorithm, seed) -> best_so_far array."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    out: dict = {}
    for algo, seed, eval_index, best in reader:
        key = (algo, int(seed))
        out.setdefault(key, []).append((int(eval_index), float(best)))
    return {key: np.array([b for _, b in sorted(vals)])
            for key, vals in out.items()}
