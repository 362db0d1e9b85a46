"""The EXPLO2 optimizer: surrogate-assisted black-box minimization that
trades exploration against exploitation through differential magnitude.

Each round the history is downsampled to an active set mixing the points the
frozen interpolant predicted worst (exploration memory) with the points of
least objective value (exploitation memory). One similarity factorization
over the active set then serves three masters: the weighting, the RBF
interpolant T, and the differential-magnitude field R. A regularizer
``lambda`` in [0, 1], scheduled over the evaluation budget, blends the two
normalized terms into the surrogate

    S(x) = T(x)/y_range - lambda * R(x)/R_max,

which a local solver minimizes from a few random restarts. Batches of
``n_parallel`` candidates are selected by fantasization: each accepted
candidate joins the exploration set immediately (R drops to zero there, so
later candidates are repelled), while T stays frozen because fantasized
points have no objective values yet.

The objective is evaluated exactly ``budget`` times, the final batch clipped
to whatever budget remains. Every evaluation is logged to a trace.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .differential import ExplorationTerm
from .magnitude import distance_matrix, similarity
from .solver import central_difference, minimize_box
from .surrogate import Interpolant, fit_interpolant, relative_errors

__all__ = [
    "LambdaSchedule",
    "Explo2Config",
    "PointCloud",
    "TraceRecord",
    "RunTrace",
    "initial_points",
    "downsample_indices",
    "corner_range",
    "SurrogateBlend",
    "build_surrogate",
    "explo2",
]

_SQRT_EPS = float(np.sqrt(np.finfo(float).eps))

#: Resolution radius for proposals, as a fraction of the box diameter.
#: The interpolant kinks at its nodes, and a node holding a low value is a
#: local minimum of the surrogate, so descent restarts routinely terminate
#: exactly on an already-evaluated point. Re-evaluating there yields no new
#: information and degrades the similarity factorization, so a proposal
#: inside this radius of an evaluated point is retracted radially to the
#: radius: it stays surrogate-guided (it refines the same basin) while
#: remaining an informative, factorizable new point.
RESOLUTION_RTOL = 1e-3

INIT_STRATEGIES = ("uniform", "near_corners", "corners")


def _round_half_up(v: float) -> int:
    """Round to nearest with halves away from zero (for nonnegative v)."""
    return int(np.floor(v + 0.5))


@dataclass(frozen=True)
class LambdaSchedule:
    """Regularizer schedule, resolved to one value per evaluation index.

    ``linear`` decays from 1 to 0 across the whole budget (the default);
    ``flat_then_linear`` holds 1 until the final D evaluations and decays
    over those; ``custom_table`` takes the values verbatim. Values are read
    by evaluation index, never interpolated.
    """

    kind: str = "linear"
    table: Optional[tuple] = None

    @classmethod
    def linear(cls) -> "LambdaSchedule":
        return cls(kind="linear")

    @classmethod
    def flat_then_linear(cls) -> "LambdaSchedule":
        return cls(kind="flat_then_linear")

    @classmethod
    def from_table(cls, values: Iterable[float]) -> "LambdaSchedule":
        vals = tuple(float(v) for v in values)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("lambda table must be finite")
        return cls(kind="custom_table", table=vals)

    def resolve(self, budget: int, dim: int) -> np.ndarray:
        """Schedule values for evaluation indices 1..budget."""
        if self.kind == "linear":
            return np.linspace(1.0, 0.0, budget)
        if self.kind == "flat_then_linear":
            if budget <= dim:
                return np.linspace(1.0, 0.0, budget)
            tail = np.linspace(1.0, 0.0, dim) if dim > 1 else np.array([0.0])
            return np.concatenate([np.ones(budget - dim), tail])
        if self.kind == "custom_table":
            vals = np.asarray(self.table, dtype=float)
            if vals.size != budget:
                warnings.warn(
                    f"lambda table has {vals.size} entries for budget "
                    f"{budget}; truncating or padding with zeros")
                if vals.size < budget:
                    vals = np.concatenate([vals, np.zeros(budget - vals.size)])
                else:
                    vals = vals[:budget]
            if np.any((vals < 0.0) | (vals > 1.0)):
                warnings.warn("lambda values outside [0, 1]")
            return vals
        raise ValueError(f"unknown lambda schedule kind {self.kind!r}")


@dataclass
class Explo2Config:
    """Run parameters. Only ``budget`` is required.

    ``t`` is the similarity scale; the default sqrt(machine epsilon) treats
    the active set in its scale-zero regime, where differential magnitude is
    a pure diversity score. ``early_stop_restarts`` reproduces the behavior
    of stopping the restart loop at the first non-improving try; set it
    False to always use all ``n_tries`` restarts.
    """

    budget: int
    n_parallel: int = 1
    n_sigma: int = 100
    n_explore: int = 100
    n_tries: int = 3
    lambda_schedule: LambdaSchedule = field(default_factory=LambdaSchedule.linear)
    init: str = "uniform"
    seed: int = 0
    t: float = _SQRT_EPS
    early_stop_restarts: bool = True
    tol: float = 1e-6
    max_iters: Optional[int] = None

    def validate(self, dim: int) -> None:
        if self.budget <= dim + 1:
            raise ValueError(
                f"budget must exceed dim+1 = {dim + 1} (got {self.budget})")
        if not 1 <= self.n_parallel <= 128:
            raise ValueError(f"n_parallel must be in [1, 128], got {self.n_parallel}")
        if self.n_sigma < 16:
            raise ValueError(f"n_sigma must be >= 16, got {self.n_sigma}")
        if self.n_explore < 16:
            raise ValueError(f"n_explore must be >= 16, got {self.n_explore}")
        if self.n_tries < 0:
            raise ValueError(f"n_tries must be >= 0, got {self.n_tries}")
        if self.init not in INIT_STRATEGIES:
            raise ValueError(
                f"init must be one of {INIT_STRATEGIES}, got {self.init!r}")
        if not (np.isfinite(self.t) and self.t > 0):
            raise ValueError(f"scale t must be positive and finite, got {self.t!r}")


@dataclass
class PointCloud:
    """Evaluated points, their objective values, and the relative errors of
    the last frozen interpolant at each of them."""

    xs: np.ndarray
    ys: np.ndarray
    rel_errs: np.ndarray

    @property
    def best(self) -> float:
        finite = self.ys[np.isfinite(self.ys)]
        return float(finite.min()) if finite.size else float("inf")


@dataclass(frozen=True)
class TraceRecord:
    """One objective evaluation. ``lam`` is the schedule value the point was
    selected under (initialization points record the table value at their
    own index). ``batch_id`` 0 marks initialization."""

    eval_index: int
    point: np.ndarray
    value: float
    best_so_far: float
    batch_id: int
    lam: float
    wall_time: float = 0.0
    solver_fallback: bool = False
    non_finite: bool = False


class RunTrace:
    """Per-evaluation log of a run; best_so_far is non-increasing."""

    def __init__(self) -> None:
        self.records: list[TraceRecord] = []

    def append(self, record: TraceRecord) -> None:
        if self.records and record.best_so_far > self.records[-1].best_so_far:
            raise ValueError("best_so_far must be non-increasing")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def best_curve(self) -> np.ndarray:
        return np.array([r.best_so_far for r in self.records])

    @property
    def n_fallbacks(self) -> int:
        return sum(r.solver_fallback for r in self.records)


def initial_points(strategy: str, lower: np.ndarray, upper: np.ndarray,
                   rng: np.random.Generator) -> np.ndarray:
    """Place the D+1 initialization points.

    ``uniform``: i.i.d. uniform in the box, redrawn on exact duplicates.
    ``near_corners``: anchors at the lower corner and at 90% of each axis
    extent, every coordinate of every point jittered up by 10% of extent.
    ``corners``: the lower corner and the D axis-extreme corners,
    deterministic.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    dim = lower.size
    extent = upper - lower
    if strategy == "uniform":
        for _ in range(100):
            pts = rng.uniform(lower, upper, size=(dim + 1, dim))
            if np.unique(pts, axis=0).shape[0] == dim + 1:
                return pts
        raise RuntimeError("could not draw distinct initialization points")
    if strategy == "near_corners":
        margin = 0.1
        anchors = np.vstack([lower, lower + (1.0 - margin) * np.diag(extent)])
        return anchors + margin * extent * rng.uniform(size=(dim + 1, dim))
    if strategy == "corners":
        return np.vstack([lower, lower + np.diag(extent)])
    raise ValueError(f"init must be one of {INIT_STRATEGIES}, got {strategy!r}")


def downsample_indices(ys: np.ndarray, rel_errs: np.ndarray, n_sigma: int,
                       lam_n: float, lam_1: float) -> np.ndarray:
    """Active-set indices for the next batch, given the full history.

    Under the cap the whole finite-valued history is kept. Over it,
    ``n_rho = round(n_sigma * min(1, lam_n/lam_1))`` slots go to the
    largest-relative-error points (exploration memory) and the rest to the
    least-value points not already picked (exploitation memory). Both sorts
    are stable, ties broken by lower index. History rows with non-finite
    values are never selected.
    """
    ys = np.asarray(ys, dtype=float)
    rel_errs = np.asarray(rel_errs, dtype=float)
    count = ys.size
    finite = np.isfinite(ys)
    if count + 1 <= n_sigma:
        return np.flatnonzero(finite)

    if lam_n == 0.0:
        ratio = 0.0
    elif lam_1 == 0.0:
        ratio = 1.0
    else:
        ratio = min(1.0, lam_n / lam_1)
    n_rho = _round_half_up(n_sigma * ratio)

    err_order = np.argsort(-rel_errs, kind="stable")
    err_order = err_order[finite[err_order]]
    top_errors = err_order[:n_rho]

    y_order = np.argsort(ys, kind="stable")
    y_order = y_order[finite[y_order]]
    picked = set(top_errors.tolist())
    least = [i for i in y_order if i not in picked]
    n_mu = n_sigma - top_errors.size
    return np.concatenate([top_errors, np.asarray(least[:n_mu], dtype=int)])


def corner_range(value_many: Callable[[np.ndarray], np.ndarray],
                 lower: np.ndarray, upper: np.ndarray, n_explore: int,
                 rng: np.random.Generator) -> float:
    """Normalizer for the exploration term: its maximum over box corners.

    All 2^D corners when that is affordable, otherwise ``n_explore`` corners
    drawn with per-coordinate fair coin flips (with replacement). A zero
    maximum is guarded to 1 so the blend never divides by zero.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    dim = lower.size
    if 2 ** dim <= n_explore:
        bits = (np.arange(2 ** dim)[:, None] >> np.arange(dim)) & 1
    else:
        bits = rng.integers(0, 2, size=(n_explore, dim))
    corners = np.where(bits == 1, upper, lower)
    r_max = float(np.max(value_many(corners)))
    if r_max == 0.0:
        r_max = 1.0
    return r_max


@dataclass(frozen=True)
class SurrogateBlend:
    """The scalar field S = T/y_range - lambda * R/R_max, to be minimized.

    ``exploit`` is frozen for the batch; ``explore`` reflects the current
    (possibly fantasized) active set. ``gradient`` is analytic away from
    active points; ``gradient_safe`` switches to central differences within
    the node radius, where the kernel kinks.
    """

    exploit: Interpolant
    explore: ExplorationTerm
    r_max: float
    lam: float

    def value(self, x: np.ndarray) -> float:
        out = self.exploit.value(x) / self.exploit.y_range
        if self.lam != 0.0:
            out -= self.lam * self.explore.value(x) / self.r_max
        return out

    __call__ = value

    def value_many(self, X: np.ndarray) -> np.ndarray:
        out = self.exploit.value_many(X) / self.exploit.y_range
        if self.lam != 0.0:
            out = out - self.lam * self.explore.value_many(X) / self.r_max
        return out

    def gradient(self, x: np.ndarray) -> np.ndarray:
        g = self.exploit.gradient(x) / self.exploit.y_range
        if self.lam != 0.0:
            g = g - (self.lam / self.r_max) * self.explore.gradient(x)
        return g

    def gradient_safe(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(self.explore.points - x, axis=1)
        if r.min() < ExplorationTerm.NODE_RADIUS:
            return central_difference(self.value, x)
        return self.gradient(x)


def build_surrogate(exploit: Interpolant, explore: ExplorationTerm,
                    r_max: float, lam: float) -> SurrogateBlend:
    """Assemble the surrogate blend (ranges already guarded positive)."""
    return SurrogateBlend(exploit=exploit, explore=explore,
                          r_max=r_max, lam=lam)


def _retract(x: np.ndarray, seen: np.ndarray, radius: float,
             lower: np.ndarray, upper: np.ndarray,
             rng: np.random.Generator) -> Optional[np.ndarray]:
    """Push ``x`` out to ``radius`` from the nearest point of ``seen``.

    Returns None when no clear position is found in a few attempts (a
    saturated cluster, or a point pinned against the box boundary); the
    caller then falls back to a uniform random point.
    """
    for _ in range(4):
        dists = np.linalg.norm(seen - x, axis=1)
        k = int(np.argmin(dists))
        if dists[k] >= radius:
            return x
        if dists[k] > 0.0:
            direction = (x - seen[k]) / dists[k]
        else:
            direction = rng.standard_normal(x.size)
            direction /= max(np.linalg.norm(direction), 1e-30)
        x = np.clip(seen[k] + radius * direction, lower, upper)
    dists = np.linalg.norm(seen - x, axis=1)
    if np.min(dists) >= 0.5 * radius:
        return x
    return None


def _propose(blend: SurrogateBlend, lower: np.ndarray, upper: np.ndarray,
             config: Explo2Config, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    """One candidate: best of up to ``n_tries`` local solves, or a uniform
    random point when no restart produced a finite value."""
    best_x = None
    best_f = np.inf
    for _ in range(config.n_tries):
        x0 = rng.uniform(lower, upper)
        try:
            res = minimize_box(blend.value, x0, lower, upper,
                               grad=blend.gradient_safe, tol=config.tol,
                               max_iters=config.max_iters)
        except Exception:
            res = None
        if res is not None and np.isfinite(res.f_min) and res.f_min < best_f:
            best_x, best_f = res.x_min, res.f_min
        elif config.early_stop_restarts:
            break
    if best_x is None:
        return rng.uniform(lower, upper), True
    return best_x, False


def explo2(f: Callable[[np.ndarray], float], lower, upper,
           config: Explo2Config,
           map_fn: Optional[Callable] = None) -> tuple[PointCloud, RunTrace]:
    """Minimize ``f`` over the box ``[lower, upper]`` with exactly
    ``config.budget`` evaluations.

    Parameters
    ----------
    f : callable
        Objective, a finite float of a D-vector. Non-finite returns are
        recorded as +inf (flagged in the trace) and quarantined from the
        active set; the run never aborts on them.
    lower, upper : array_like, shape (D,)
        Box bounds, finite with lower < upper componentwise.
    config : Explo2Config
    map_fn : callable, optional
        Order-preserving map used to evaluate each batch (e.g. a process
        pool's ``map``). Results are committed in candidate order, so any
        order-preserving mapper reproduces the serial trace. Defaults to
        the builtin ``map``.

    Returns
    -------
    (PointCloud, RunTrace)
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if lower.shape != upper.shape or lower.ndim != 1:
        raise ValueError("bounds must be matching 1-D arrays")
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise ValueError("bounds must be finite")
    if np.any(lower >= upper):
        raise ValueError("need lower < upper componentwise")
    dim = lower.size
    config.validate(dim)

    rng = np.random.default_rng(config.seed)
    dup_radius = RESOLUTION_RTOL * float(np.linalg.norm(upper - lower))
    lam_table = config.lambda_schedule.resolve(config.budget, dim)
    mapper = map_fn if map_fn is not None else map
    started = time.perf_counter()
    trace = RunTrace()
    best = np.inf

    def record(index, point, raw_value, batch_id, lam, fallback):
        nonlocal best
        value = float(raw_value)
        non_finite = not np.isfinite(value)
        if non_finite:
            value = np.inf
        best = min(best, value)
        trace.append(TraceRecord(
            eval_index=index, point=np.array(point, dtype=float), value=value,
            best_so_far=best, batch_id=batch_id, lam=float(lam),
            wall_time=time.perf_counter() - started,
            solver_fallback=fallback, non_finite=non_finite))
        return value

    n0 = dim + 1
    xs = initial_points(config.init, lower, upper, rng)
    init_values = list(mapper(f, [xs[i] for i in range(n0)]))
    ys = np.array([
        record(i + 1, xs[i], init_values[i], 0, lam_table[i], False)
        for i in range(n0)
    ])
    rel_errs = np.full(n0, np.inf)

    evaluated = n0
    batch_id = 0
    while evaluated < config.budget:
        batch_id += 1
        batch_size = min(config.n_parallel, config.budget - evaluated)
        lam_n = float(lam_table[evaluated])  # schedule at the batch head
        lam_1 = float(lam_table[0])

        idx = downsample_indices(ys, rel_errs, config.n_sigma, lam_n, lam_1)
        if idx.size == 0:
            # Every value so far is non-finite; with nothing to interpolate
            # the batch degrades to uniform random probing.
            candidates = [rng.uniform(lower, upper) for _ in range(batch_size)]
            batch_values = list(mapper(f, candidates))
            new_ys = np.array([
                record(evaluated + j + 1, candidates[j], batch_values[j],
                       batch_id, lam_n, True)
                for j in range(batch_size)
            ])
            xs = np.vstack([xs, np.array(candidates)])
            ys = np.concatenate([ys, new_ys])
            evaluated += batch_size
            rel_errs = np.full(ys.size, np.inf)
            continue
        active = xs[idx].copy()
        sys_active = similarity(distance_matrix(active), config.t)
        frozen_t = fit_interpolant(active, ys[idx], sys_active)

        candidates = []
        fallbacks = []
        for _ in range(batch_size):
            explore = ExplorationTerm(active, sys_active)
            r_max = corner_range(explore.value_many, lower, upper,
                                 config.n_explore, rng)
            blend = build_surrogate(frozen_t, explore, r_max, lam_n)
            xn, used_fallback = _propose(blend, lower, upper, config, rng)
            seen = xs if not candidates else np.vstack([xs, candidates])
            if not used_fallback:
                retracted = _retract(xn, seen, dup_radius, lower, upper, rng)
                if retracted is None:
                    xn = rng.uniform(lower, upper)
                    used_fallback = True
                else:
                    xn = retracted
            candidates.append(xn)
            fallbacks.append(used_fallback)
            active = np.vstack([active, xn])
            sys_active = similarity(distance_matrix(active), config.t)

        batch_values = list(mapper(f, candidates))
        new_ys = np.array([
            record(evaluated + j + 1, candidates[j], batch_values[j],
                   batch_id, lam_n, fallbacks[j])
            for j in range(batch_size)
        ])
        xs = np.vstack([xs, np.array(candidates)])
        ys = np.concatenate([ys, new_ys])
        evaluated += batch_size
        rel_errs = relative_errors(frozen_t, xs, ys)

    return PointCloud(xs=xs, ys=ys, rel_errs=rel_errs), trace
