"""Smoke tests for the convergence figure writer."""

import numpy as np

from magopt.benchmarks import get_function
from magopt.figures import save_convergence_figure
from magopt.harness import random_search


def test_writes_a_png(tmp_path):
    tf = get_function("rastrigin", 2)
    traces = {("random_search", s): random_search(tf.fn, tf.lower, tf.upper,
                                                  12, seed=s)
              for s in range(3)}
    path = tmp_path / "convergence.png"
    save_convergence_figure(traces, path, title="rastrigin D=2")
    assert path.exists() and path.stat().st_size > 1000


def test_accepts_plain_arrays_and_non_positive_values(tmp_path):
    # Curves that cross zero force the linear-scale branch.
    traces = {
        ("explo2", 0): np.array([3.0, 1.0, -0.5, -0.5]),
        ("explo2", 1): np.array([2.0, 0.0, 0.0, -1.0]),
    }
    path = tmp_path / "linear.png"
    save_convergence_figure(traces, path)
    assert path.exists() and path.stat().st_size > 1000
