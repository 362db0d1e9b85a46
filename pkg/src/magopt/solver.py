"""Bound-constrained local minimization of a scalar field.

This is the pluggable slot the optimizer fills with a projected quasi-Newton
method (L-BFGS-B). The surrogate is cheap relative to the objective, so the
defaults are generous; callers that have an analytic gradient pass it, and
anything without one gets central finite differences at a curvature-safe
step. Results carry enough state for the caller to decide between keeping
the point, retrying from elsewhere, or falling back to a random draw.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

__all__ = ["LocalSolveResult", "central_difference", "minimize_box"]

_SQRT_EPS = float(np.sqrt(np.finfo(float).eps))


@dataclass(frozen=True)
class LocalSolveResult:
    """Outcome of one local solve. ``x_min`` is always inside the box.

    ``converged`` means clean termination (gradient or decrease tolerance
    met); a False value with finite ``f_min`` is still a usable point, it
    just stopped on the iteration cap or a failed line search.
    """

    x_min: np.ndarray
    f_min: float
    iterations: int
    converged: bool
    failure_reason: Optional[str] = None


def central_difference(fun: Callable[[np.ndarray], float], x: np.ndarray) -> np.ndarray:
    """Central-difference gradient with per-coordinate step
    ``sqrt(eps) * (1 + |x_i|)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = _SQRT_EPS * (1.0 + abs(x[i]))
        step = np.zeros_like(x)
        step[i] = h
        g[i] = (fun(x + step) - fun(x - step)) / (2.0 * h)
    return g


def minimize_box(fun: Callable[[np.ndarray], float], x0: np.ndarray,
                 lower: np.ndarray, upper: np.ndarray,
                 grad: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 tol: float = 1e-6,
                 max_iters: Optional[int] = None) -> LocalSolveResult:
    """Minimize ``fun`` over the box ``[lower, upper]`` starting at ``x0``.

    Projected quasi-Newton descent (L-BFGS-B). Terminates on projected
    gradient norm <= ``tol``, relative decrease below the solver's floor,
    or ``max_iters`` (default ``200 * D``). When ``grad`` is omitted,
    central finite differences stand in.

    The returned point is projected into the box. A non-finite value at
    ``x0``, or an exception inside the solver, yields ``converged=False``
    with a ``failure_reason`` and leaves ``x_min`` at the start point.
    """
    x0 = np.asarray(x0, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(x0 < lower) or np.any(x0 > upper):
        raise ValueError("start point lies outside the box")
    if max_iters is None:
        max_iters = 200 * x0.size

    f0 = float(fun(x0))
    if not np.isfinite(f0):
        return LocalSolveResult(x_min=x0.copy(), f_min=f0, iterations=0,
                                converged=False,
                                failure_reason="objective non-finite at start")

    jac = grad if grad is not None else (lambda x: central_difference(fun, x))
    try:
        res = _scipy_minimize(
            fun, x0, jac=jac, method="L-BFGS-B",
            bounds=list(zip(lower, upper)),
            options={"maxiter": max_iters, "gtol": tol},
        )
    except Exception as err:  # solver blew up; caller decides what to do
        return LocalSolveResult(x_min=x0.copy(), f_min=f0, iterations=0,
                                converged=False,
                                failure_reason=f"solver raised: {err}")

    x_min = np.clip(res.x, lower, upper)
    f_min = float(res.fun)
    reason = None if res.success else str(res.message)
    return LocalSolveResult(x_min=x_min, f_min=f_min,
                            iterations=int(res.nit),
                            converged=bool(res.success),
                            failure_reason=reason)
