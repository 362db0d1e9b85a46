"""Test-function registry for the benchmark harness.

The two headline functions are separable Rastrigin (no rotations or shifts)
and the Griewank-Rosenbrock composite F8F2; sphere, Rosenbrock, Ackley, and
Griewank round out the registry as easy and medium controls. Each entry
declares its box, global minimum value, and minimizer, and the evaluators
are plain deterministic formulas. An optional seeded shift decouples the
minimizer from the origin to guard against origin-bias artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "TestFunction",
    "rastrigin",
    "griewank_rosenbrock_f8f2",
    "sphere",
    "rosenbrock",
    "ackley",
    "griewank",
    "FUNCTION_NAMES",
    "get_function",
    "with_random_shift",
]


def rastrigin(x) -> float:
    """10 D + sum(x_i^2 - 10 cos(2 pi x_i)); minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x ** 2 - 10.0 * np.cos(2.0 * np.pi * x)))


def griewank_rosenbrock_f8f2(x) -> float:
    """Griewank-Rosenbrock composite: Rosenbrock links fed through the
    Griewank shape, scaled to minimum 0 at the all-ones point. Needs D >= 2."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise ValueError("griewank_rosenbrock_f8f2 needs dimension >= 2")
    s = 100.0 * (x[:-1] ** 2 - x[1:]) ** 2 + (x[:-1] - 1.0) ** 2
    return float(10.0 / (x.size - 1) * np.sum(s / 4000.0 - np.cos(s)) + 10.0)


def sphere(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(x ** 2))


def rosenbrock(x) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise ValueError("rosenbrock needs dimension >= 2")
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def ackley(x) -> float:
    x = np.asarray(x, dtype=float)
    d = x.size
    return float(-20.0 * np.exp(-0.2 * np.sqrt(np.sum(x ** 2) / d))
                 - np.exp(np.sum(np.cos(2.0 * np.pi * x)) / d) + 20.0 + np.e)


def griewank(x) -> float:
    x = np.asarray(x, dtype=float)
    i = np.arange(1, x.size + 1)
    return float(1.0 + np.sum(x ** 2) / 4000.0 - np.prod(np.cos(x / np.sqrt(i))))


@dataclass(frozen=True)
class TestFunction:
    """A registered objective: evaluator plus box and known optimum."""

    name: str
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    fmin: float
    xmin: np.ndarray
    fn: Callable[[np.ndarray], float]


# name -> (evaluator, half-box or (lo, hi), minimizer coordinate, minimum dim)
_REGISTRY = {
    "rastrigin": (rastrigin, (-5.12, 5.12), 0.0, 1),
    "griewank_rosenbrock": (griewank_rosenbrock_f8f2, (-5.0, 5.0), 1.0, 2),
    "sphere": (sphere, (-5.0, 5.0), 0.0, 1),
    "rosenbrock": (rosenbrock, (-5.0, 10.0), 1.0, 2),
    "ackley": (ackley, (-32.768, 32.768), 0.0, 1),
    "griewank": (griewank, (-600.0, 600.0), 0.0, 1),
}

FUNCTION_NAMES = tuple(_REGISTRY)


def get_function(name: str, dim: int) -> TestFunction:
    """Look up a registered function at a given dimension."""
    if name not in _REGISTRY:
        raise KeyError(f"unknown test function {name!r}; "
                       f"registered: {', '.join(FUNCTION_NAMES)}")
    fn, (lo, hi), xstar, min_dim = _REGISTRY[name]
    if dim < min_dim:
        raise ValueError(f"{name} needs dimension >= {min_dim}, got {dim}")
    return TestFunction(
        name=name, dim=dim,
        lower=np.full(dim, lo), upper=np.full(dim, hi),
        fmin=0.0, xmin=np.full(dim, xstar), fn=fn)


def with_random_shift(tf: TestFunction, seed: int) -> TestFunction:
    """Shifted copy: minimizer moved by a seeded draw within 10% of the box
    extent per coordinate; box unchanged, minimum value unchanged."""
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-0.1, 0.1, tf.dim) * (tf.upper - tf.lower)
    xmin = tf.xmin + shift
    if np.any(xmin < tf.lower) or np.any(xmin > tf.upper):
        raise ValueError("shift pushed the minimizer outside the box")
    base = tf.fn

    def shifted(x):
        return base(np.asarray(x, dtype=float) - shift)

    return TestFunction(
        name=f"{tf.name}_shifted", dim=tf.dim,
        lower=tf.lower, upper=tf.upper,
        fmin=tf.fmin, xmin=xmin, fn=shifted)
