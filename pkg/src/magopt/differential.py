"""Differential magnitude: the exact increase in magnitude from adjoining
one candidate point to a similarity system.

For a positive definite ``Z`` with weighting ``w`` and a candidate whose
similarities to the active points form the vector ``zeta``, the augmented
magnitude satisfies

    Mag(Z[zeta]) = Mag(Z) + (1 - zeta.w)^2 / (1 - zeta.Z^{-1}.zeta),

a rank-one identity that needs only two solves against the already-factored
``Z``. The increment is the optimizer's exploration score R: it is zero at
every evaluated point and grows with distance from all of them. The matching
rank-one update of the weighting itself, and two small-scale asymptotic
expansions used as test oracles, live here too.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from .magnitude import DegenerateGeometryError, SimilaritySystem, distance_matrix, similarity

__all__ = [
    "EPS_DEN",
    "PdViolationError",
    "DegenerateExtensionError",
    "zeta_vector",
    "delta_magnitude",
    "extend_weighting",
    "delta_magnitude_small_t",
    "submodularity_counterexample",
    "ExplorationTerm",
]

#: Schur complements below this are treated as the structural 0/0 at an
#: existing point and yield a differential magnitude of exactly 0.
EPS_DEN = 1e-12


class PdViolationError(ArithmeticError):
    """Schur complement came out negative beyond round-off: the augmented
    similarity matrix is not numerically positive definite."""


class DegenerateExtensionError(ArithmeticError):
    """Weighting extension is ill-posed (vanishing Schur complement);
    the caller should rebuild the augmented system from scratch."""


def zeta_vector(points: np.ndarray, x: np.ndarray, t: float) -> np.ndarray:
    """Similarities ``exp(-t * |x - p_k|)`` between candidate ``x`` and each
    active point."""
    pts = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(pts - x, axis=1)
    return np.exp(-t * r)


def delta_magnitude(sys: SimilaritySystem, zeta: np.ndarray) -> float:
    """Increase in magnitude from adjoining the candidate with similarity
    vector ``zeta``.

    Parameters
    ----------
    sys : SimilaritySystem
        Factored system over the active points.
    zeta : ndarray, shape (n,)
        Candidate similarities, each in (0, 1] (0 itself is admitted as the
        infinite-distance limit).

    Returns
    -------
    float
        ``(1 - zeta.w)^2 / (1 - zeta.Z^{-1}.zeta)``, which is nonnegative
        for positive definite systems. When the Schur complement falls below
        ``EPS_DEN`` the candidate coincides (numerically) with an active
        point and the structural limit 0 is returned.

    Raises
    ------
    PdViolationError
        If the Schur complement is negative beyond ``-EPS_DEN``.
    """
    zeta = np.asarray(zeta, dtype=float)
    if zeta.shape != (sys.n,):
        raise ValueError(f"zeta has shape {zeta.shape}, expected ({sys.n},)")
    u = sys.solve(zeta)
    den = 1.0 - float(zeta @ u)
    if den < -EPS_DEN:
        raise PdViolationError(
            f"Schur complement {den:.3e} is negative; augmented similarity "
            "matrix is not numerically positive definite")
    if den <= EPS_DEN:
        return 0.0
    num = (1.0 - float(zeta @ sys.w)) ** 2
    return num / den


def extend_weighting(sys: SimilaritySystem, zeta: np.ndarray) -> np.ndarray:
    """Weighting of the augmented system, by rank-one update.

    Returns the length-``n+1`` vector
    ``(w; 0) + gamma * (-Z^{-1} zeta; 1)`` with
    ``gamma = (1 - zeta.w)/(1 - zeta.Z^{-1}.zeta)``; it solves the augmented
    weighting equation exactly in exact arithmetic, and its sum is
    ``mag + delta_magnitude``.
    """
    zeta = np.asarray(zeta, dtype=float)
    if zeta.shape != (sys.n,):
        raise ValueError(f"zeta has shape {zeta.shape}, expected ({sys.n},)")
    u = sys.solve(zeta)
    den = 1.0 - float(zeta @ u)
    if den <= EPS_DEN:
        raise DegenerateExtensionError(
            f"Schur complement {den:.3e} too small to extend the weighting; "
            "rebuild the augmented system from scratch")
    gamma = (1.0 - float(zeta @ sys.w)) / den
    return np.concatenate([sys.w - gamma * u, [gamma]])


def delta_magnitude_small_t(d: np.ndarray, delta: np.ndarray, t: float) -> float:
    """Leading-order differential magnitude as the scale drops to zero.

    With ``om = d^{-1} 1`` and a candidate at distances ``delta`` from the
    points of ``d``, the increment expands as

        t * ((delta.om - 1)/(1.om - t))^2 * (1.om - t)
          / (-1 + 2*delta.om + delta.[(1.om)*d^{-1} - om om^T].delta)

    up to o(t). This is a test oracle for ``delta_magnitude`` at small
    scales, not something the optimizer evaluates.
    """
    d = np.asarray(d, dtype=float)
    delta = np.asarray(delta, dtype=float)
    n = d.shape[0]
    if delta.shape != (n,):
        raise ValueError(f"delta has shape {delta.shape}, expected ({n},)")
    ones = np.ones(n)
    try:
        om = np.linalg.solve(d, ones)
        dinv_delta = np.linalg.solve(d, delta)
    except np.linalg.LinAlgError as err:
        raise DegenerateGeometryError(f"distance matrix is singular: {err}") from err
    s = float(om.sum())
    dom = float(delta @ om)
    quad = s * float(delta @ dinv_delta) - dom ** 2
    denominator = -1.0 + 2.0 * dom + quad
    return t * ((dom - 1.0) / (s - t)) ** 2 * (s - t) / denominator


def submodularity_counterexample() -> tuple[float, float]:
    """Magnitude increments are not submodular: a fixed four-point geometry
    where adjoining two points jointly beats the sum of adjoining each alone.

    Returns
    -------
    (lhs, rhs) : pair of floats
        ``lhs = Mag(X + x1) + Mag(X + x2)`` and
        ``rhs = Mag(X + x1 + x2) + Mag(X)`` at unit scale, with
        ``X = {(1,0), (0,1)}``, ``x1 = (-1,0)``, ``x2 = (2,0)``.
        Submodularity would require lhs >= rhs; here lhs < rhs.
    """
    X = [(1.0, 0.0), (0.0, 1.0)]
    x1 = (-1.0, 0.0)
    x2 = (2.0, 0.0)
    t = 1.0

    def mag(pts):
        return similarity(distance_matrix(pts), t).mag

    lhs = mag(X + [x1]) + mag(X + [x2])
    rhs = mag(X + [x1, x2]) + mag(X)
    return lhs, rhs


class ExplorationTerm:
    """The differential-magnitude field ``R(x)`` over a box of candidates.

    Wraps a point set and its factored similarity system; evaluation at a
    candidate builds the similarity vector and applies the rank-one identity.
    ``value_many`` batches the two triangular solves across candidates,
    which is what makes corner sweeps cheap.
    """

    #: Candidates closer than this to an active point are treated as
    #: coincident for differentiation purposes.
    NODE_RADIUS = 1e-8

    def __init__(self, points: np.ndarray, system: SimilaritySystem):
        self.points = np.asarray(points, dtype=float)
        if self.points.shape[0] != system.n:
            raise ValueError("point count does not match the similarity system")
        self.system = system

    def value(self, x: np.ndarray) -> float:
        return delta_magnitude(self.system, zeta_vector(self.points, x, self.system.t))

    def value_many(self, X: np.ndarray) -> np.ndarray:
        """Evaluate R at each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Zeta = np.exp(-self.system.t * cdist(self.points, X))
        U = self.system.solve(Zeta)
        den = 1.0 - np.einsum("km,km->m", Zeta, U)
        if np.any(den < -EPS_DEN):
            worst = float(den.min())
            raise PdViolationError(
                f"Schur complement {worst:.3e} is negative; augmented "
                "similarity matrix is not numerically positive definite")
        num = (1.0 - self.system.w @ Zeta) ** 2
        safe = den > EPS_DEN
        return np.where(safe, num / np.where(safe, den, 1.0), 0.0)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Analytic gradient of R at ``x``.

        Undefined at active points (the similarity kernel has a kink there);
        within ``NODE_RADIUS`` of one, or in the clamped R = 0 region, the
        gradient of the clamped field (zero) is returned for the latter and
        an error raised for the former so the caller can fall back to finite
        differences.
        """
        x = np.asarray(x, dtype=float)
        diff = x - self.points
        r = np.linalg.norm(diff, axis=1)
        if r.min() < self.NODE_RADIUS:
            raise FloatingPointError(
                "exploration gradient is undefined at an active point")
        t = self.system.t
        zeta = np.exp(-t * r)
        u = self.system.solve(zeta)
        den = 1.0 - float(zeta @ u)
        if den <= EPS_DEN:
            return np.zeros_like(x)
        a = 1.0 - float(zeta @ self.system.w)
        # J[k] = d zeta_k / dx = -t * zeta_k * (x - p_k)/r_k
        J = (-t * zeta / r)[:, None] * diff
        grad_a = -(J.T @ self.system.w)
        grad_den = -2.0 * (J.T @ u)
        return (2.0 * a / den) * grad_a - (a / den) ** 2 * grad_den
