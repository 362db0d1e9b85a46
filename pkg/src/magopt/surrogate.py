"""Exponential-kernel RBF interpolation of the objective over the active set.

The exploitation term T fits the evaluated values exactly:

    T(x) = sum_k c_k * exp(-t * |x - x_k|),   c = Z^{-1} y,

reusing the similarity factorization already built for the weighting. The
coefficients, node set, and scale are frozen once fit; during batch selection
the optimizer deliberately keeps evaluating this frozen T while the
exploration side evolves. Relative interpolation errors over the full history
feed the downsampling step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .magnitude import SimilaritySystem

__all__ = ["EPS_Y", "Interpolant", "fit_interpolant", "relative_errors"]

#: Floor applied to |y| in relative errors so exact zeros of the objective
#: produce large finite errors instead of dividing by zero.
EPS_Y = 1e-8


@dataclass(frozen=True)
class Interpolant:
    """Frozen RBF interpolant: coefficients, nodes, scale, and value range.

    ``y_range`` is the spread of the fitted values (with flat data mapped to
    1 so normalization never divides by zero); the surrogate blend divides
    by it to put exploitation on a unit scale.
    """

    nodes: np.ndarray
    coeffs: np.ndarray
    t: float
    y_range: float

    #: Queries closer than this to a node sit on the kernel's kink.
    NODE_RADIUS = 1e-8

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    def _check_dim(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(
                f"query dimension {x.shape[-1]} does not match nodes ({self.dim})")
        return x

    def value(self, x: np.ndarray) -> float:
        x = self._check_dim(x)
        r = np.linalg.norm(self.nodes - x, axis=1)
        return float(self.coeffs @ np.exp(-self.t * r))

    __call__ = value

    def value_many(self, X: np.ndarray) -> np.ndarray:
        """Evaluate T at each row of ``X``."""
        X = np.atleast_2d(self._check_dim(X))
        return self.coeffs @ np.exp(-self.t * cdist(self.nodes, X))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Analytic gradient; raises at a node, where the kernel is not
        differentiable, so the caller can switch to finite differences."""
        x = self._check_dim(x)
        diff = x - self.nodes
        r = np.linalg.norm(diff, axis=1)
        if r.min() < self.NODE_RADIUS:
            raise FloatingPointError("interpolant gradient is undefined at a node")
        zeta = np.exp(-self.t * r)
        return ((-self.t * self.coeffs * zeta / r)[:, None] * diff).sum(axis=0)


def fit_interpolant(points: np.ndarray, values: np.ndarray,
                    sys: SimilaritySystem) -> Interpolant:
    """Fit the RBF interpolant through ``(points, values)``.

    ``sys`` must be the similarity system built from exactly these points;
    its factorization is reused, so fitting costs one extra triangular solve.
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    if points.shape[0] != sys.n or values.shape != (sys.n,):
        raise ValueError("points/values do not match the similarity system")
    if not np.all(np.isfinite(values)):
        raise ValueError("interpolation values must be finite")
    coeffs = sys.solve(values)
    y_range = float(values.max() - values.min())
    if y_range == 0.0:
        y_range = 1.0
    return Interpolant(nodes=points, coeffs=coeffs, t=sys.t, y_range=y_range)


def relative_errors(interp: Interpolant, all_points: np.ndarray,
                    all_values: np.ndarray, eps_y: float = EPS_Y) -> np.ndarray:
    """Relative interpolation error at every historical point.

    ``err_j = |T(x_j) - y_j| / max(|y_j|, eps_y)``. Points the interpolant
    never saw give genuine out-of-sample errors; active nodes give errors at
    round-off level. Rows with non-finite ``y_j`` (failed evaluations kept in
    the history) get error 0 so the result stays finite and such rows never
    win an error-based selection.
    """
    all_points = np.atleast_2d(np.asarray(all_points, dtype=float))
    all_values = np.asarray(all_values, dtype=float)
    preds = interp.value_many(all_points)
    finite = np.isfinite(all_values)
    denom = np.maximum(np.abs(all_values), eps_y)
    errs = np.where(finite, np.abs(preds - np.where(finite, all_values, 0.0)) /
                    np.where(finite, denom, 1.0), 0.0)
    return errs
