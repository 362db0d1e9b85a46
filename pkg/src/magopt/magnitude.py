"""Distance matrices, similarity systems, weightings, and magnitude.

A finite metric space with distance matrix ``d`` has, at scale ``t > 0``, the
similarity matrix ``Z = exp(-t*d)`` (entrywise). A weighting is any vector
``w`` with ``Z w = 1``; its sum is the magnitude, a scale-dependent effective
number of points. For Euclidean point sets ``Z`` is symmetric positive
definite, so the weighting exists and is unique at every positive scale.

The solvers here come in three flavors: a dense Cholesky path (the workhorse,
factored once and reused for every right-hand side), a conjugate-gradient
path for hard-thresholded sparse similarity matrices, and an exact scale-zero
limit that needs no factorization at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import cho_solve
from scipy.linalg.lapack import dpotrf
from scipy.sparse import csr_matrix
from scipy.spatial.distance import pdist, squareform

__all__ = [
    "DegenerateGeometryError",
    "SimilaritySystem",
    "CgResult",
    "distance_matrix",
    "similarity",
    "magnitude_function",
    "weighting_scale_zero",
    "hard_threshold",
    "weighting_cg",
]

#: Diagonal jitter added once when a factorization fails on nearly
#: coincident points; a second failure is a hard error.
FACTORIZATION_JITTER = 1e-10


class DegenerateGeometryError(ValueError):
    """Raised when a similarity or distance system is numerically singular.

    Attributes
    ----------
    pivot_index : int or None
        Zero-based index of the first non-positive-definite pivot reported
        by the factorization, when available.
    scale : float or None
        The scale parameter at which the failure occurred, when the caller
        was sweeping scales.
    """

    def __init__(self, message: str, pivot_index: Optional[int] = None,
                 scale: Optional[float] = None):
        super().__init__(message)
        self.pivot_index = pivot_index
        self.scale = scale


def distance_matrix(points: Union[Sequence[Sequence[float]], np.ndarray]) -> np.ndarray:
    """Euclidean distance matrix of a point set.

    Parameters
    ----------
    points : array_like, shape (n, D)
        One point per row. A single point is allowed and yields ``[[0.0]]``.

    Returns
    -------
    ndarray, shape (n, n)
        Symmetric, zero diagonal, entry (j, k) the Euclidean distance
        between points j and k.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValueError("need at least one point")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must have finite coordinates")
    n = pts.shape[0]
    if n == 1:
        return np.zeros((1, 1))
    return squareform(pdist(pts))


@dataclass(frozen=True)
class SimilaritySystem:
    """Similarity matrix ``Z = exp(-t*d)`` with its factorization and weighting.

    The Cholesky factor is kept so that every later solve against ``Z``
    (weighting updates, interpolation coefficients, candidate scores) reuses
    the single factorization.
    """

    t: float
    Z: np.ndarray
    factor: np.ndarray  # upper-triangular Cholesky factor of (possibly jittered) Z
    w: np.ndarray
    mag: float
    jittered: bool = False

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``Z x = rhs`` through the stored factorization.

        ``rhs`` may be a vector or a matrix of stacked right-hand sides.
        """
        return cho_solve((self.factor, False), rhs, check_finite=False)


def _cholesky(Z: np.ndarray) -> tuple[np.ndarray, int]:
    """Upper Cholesky factor and LAPACK info flag (0 means success)."""
    c, info = dpotrf(Z, lower=0, clean=0, overwrite_a=0)
    return c, info


def similarity(d: np.ndarray, t: float) -> SimilaritySystem:
    """Build the similarity system at scale ``t``: matrix, factorization,
    weighting, magnitude.

    Parameters
    ----------
    d : ndarray, shape (n, n)
        Distance matrix (symmetric, zero diagonal).
    t : float
        Positive finite scale parameter.

    Returns
    -------
    SimilaritySystem

    Raises
    ------
    DegenerateGeometryError
        If ``exp(-t*d)`` is numerically not positive definite even after a
        single diagonal jitter of ``FACTORIZATION_JITTER``. The error carries
        the failing pivot index.
    """
    if not (np.isfinite(t) and t > 0):
        raise ValueError(f"scale t must be positive and finite, got {t!r}")
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {d.shape}")

    Z = np.exp(-t * d)
    c, info = _cholesky(Z)
    jittered = False
    if info > 0:
        Zj = Z + FACTORIZATION_JITTER * np.eye(Z.shape[0])
        c, info = _cholesky(Zj)
        jittered = True
        if info > 0:
            raise DegenerateGeometryError(
                "similarity matrix is numerically not positive definite "
                f"(pivot {info - 1}) even after diagonal jitter; the point "
                "set is degenerate at this scale",
                pivot_index=info - 1,
            )
    if info < 0:
        raise ValueError(f"invalid argument {-info} passed to dpotrf")

    ones = np.ones(Z.shape[0])
    w = cho_solve((c, False), ones, check_finite=False)
    return SimilaritySystem(t=float(t), Z=Z, factor=c, w=w,
                            mag=float(w.sum()), jittered=jittered)


def magnitude_function(d: np.ndarray, ts: Sequence[float]) -> list[tuple[float, float]]:
    """Magnitude at each scale in ``ts``, each computed independently.

    Failures at one scale are re-raised tagged with that scale rather than
    silently skipped.
    """
    out = []
    for t in ts:
        try:
            sys_t = similarity(d, t)
        except DegenerateGeometryError as err:
            err.scale = float(t)
            raise
        out.append((float(t), sys_t.mag))
    return out


def weighting_scale_zero(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact scale-zero limits of the weighting and coweighting.

    As the scale drops to zero the weighting converges to
    ``d^{-1} 1 / (1^T d^{-1} 1)`` and the coweighting to its row analogue.
    For symmetric ``d`` the two coincide.

    Returns
    -------
    (w0, v0) : pair of ndarrays
        Limit weighting and coweighting; both sum to 1.

    Raises
    ------
    DegenerateGeometryError
        If ``d`` is singular (this includes the 1-point space, whose distance
        matrix is ``[[0]]``) or the normalizer ``1^T d^{-1} 1`` vanishes.
    """
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n:
        raise ValueError(f"distance matrix must be square, got shape {d.shape}")
    if n < 2:
        raise DegenerateGeometryError(
            "scale-zero weighting needs at least 2 points (a 1-point "
            "distance matrix is singular)")
    ones = np.ones(n)
    try:
        om = np.linalg.solve(d, ones)
        om_t = np.linalg.solve(d.T, ones)
    except np.linalg.LinAlgError as err:
        raise DegenerateGeometryError(f"distance matrix is singular: {err}") from err
    s = float(om.sum())
    if abs(s) <= 1e-12 * (1.0 + np.abs(om).sum()):
        raise DegenerateGeometryError(
            "scale-zero normalizer 1^T d^{-1} 1 vanishes; limit undefined")
    return om / s, om_t / s


def hard_threshold(Z: np.ndarray, cutoff: float) -> csr_matrix:
    """Zero out similarity entries below ``cutoff``, keeping the diagonal.

    Returns a compressed sparse row matrix suitable for ``weighting_cg``.
    """
    Z = np.asarray(Z, dtype=float)
    mask = Z >= cutoff
    np.fill_diagonal(mask, True)
    return csr_matrix(np.where(mask, Z, 0.0))


@dataclass(frozen=True)
class CgResult:
    """Outcome of a conjugate-gradient weighting solve.

    ``breakdown`` reports a non-positive curvature direction, the signature
    of a thresholded matrix that lost positive definiteness; callers should
    fall back to a generic solver in that case. ``residual_norm`` is the true
    residual ``||Z w - 1||_2`` of the returned iterate, not the recurrence
    estimate.
    """

    w: np.ndarray
    converged: bool
    iterations: int
    residual_norm: float
    breakdown: bool = False


def weighting_cg(Z, tol: float = 1e-8,
                 initial_guess: Optional[np.ndarray] = None,
                 maxiter: Optional[int] = None) -> CgResult:
    """Weighting of a (possibly hard-thresholded) similarity matrix by
    conjugate gradients.

    Thresholding can destroy positive definiteness, and no usable criterion
    says when, so rather than assume PD this solver watches the curvature
    ``p^T Z p`` and reports breakdown the moment it fails to be positive.

    Parameters
    ----------
    Z : ndarray or sparse matrix, shape (n, n)
        Symmetric with unit diagonal; typically the output of
        ``hard_threshold``.
    tol : float
        Convergence is declared when ``||Z w - 1||_2 <= tol * sqrt(n)``.
    initial_guess : ndarray, optional
        Starting iterate; defaults to zero.
    maxiter : int, optional
        Iteration cap, default ``n`` (exact termination bound for PD
        systems in exact arithmetic).
    """
    n = Z.shape[0]
    b = np.ones(n)
    target = tol * np.sqrt(n)
    if maxiter is None:
        maxiter = n

    x = np.zeros(n) if initial_guess is None else np.asarray(initial_guess, dtype=float).copy()
    r = b - Z @ x
    rs = float(r @ r)
    iterations = 0

    if np.sqrt(rs) > target:
        p = r.copy()
        while iterations < maxiter:
            Zp = Z @ p
            pZp = float(p @ Zp)
            if pZp <= 0.0:
                res = float(np.linalg.norm(b - Z @ x))
                return CgResult(w=x, converged=False, iterations=iterations,
                                residual_norm=res, breakdown=True)
            alpha = rs / pZp
            x = x + alpha * p
            r = r - alpha * Zp
            rs_new = float(r @ r)
            iterations += 1
            if np.sqrt(rs_new) <= target:
                break
            p = r + (rs_new / rs) * p
            rs = rs_new

    residual = float(np.linalg.norm(b - Z @ x))
    return CgResult(w=x, converged=residual <= target,
                    iterations=iterations, residual_norm=residual)
