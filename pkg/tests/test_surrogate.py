"""Tests for the similarity interpolant and its relative-error report."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from magopt.magnitude import distance_matrix, similarity
from magopt.solver import central_difference
from magopt.surrogate import EPS_Y, fit_interpolant, relative_errors


def make_interpolant(seed=0, n=12, dim=2, t=0.7, values=None):
    rng = np.random.default_rng(seed)
    nodes = rng.uniform(-2.0, 2.0, size=(n, dim))
    if values is None:
        values = rng.normal(0.0, 5.0, size=n)
    sys_t = similarity(distance_matrix(nodes), t)
    return nodes, values, fit_interpolant(nodes, values, sys_t)


class TestFitInterpolant:

    def test_reproduces_node_values(self):
        nodes, values, interp = make_interpolant()
        for p, y in zip(nodes, values):
            assert interp.value(p) == pytest.approx(y, abs=1e-9 * (1 + abs(y)))

    def test_reproduces_node_values_at_tiny_scale(self):
        # The tiny default scale makes the coefficients huge and opposite in
        # sign, so node reproduction only holds to the cancellation noise.
        t = float(np.sqrt(np.finfo(float).eps))
        nodes, values, interp = make_interpolant(seed=1, t=t)
        for p, y in zip(nodes, values):
            assert interp.value(p) == pytest.approx(y, abs=1e-6 * (1 + abs(y)))

    def test_metadata(self):
        nodes, values, interp = make_interpolant(seed=2, n=9, dim=3)
        assert interp.n == 9
        assert interp.dim == 3
        assert interp.y_range == pytest.approx(values.max() - values.min())

    def test_flat_values_get_unit_range(self):
        _, _, interp = make_interpolant(seed=3, values=np.full(12, 4.0))
        assert interp.y_range == 1.0

    def test_rejects_non_finite_values(self):
        rng = np.random.default_rng(4)
        nodes = rng.uniform(size=(5, 2))
        values = np.array([1.0, 2.0, np.inf, 0.0, -1.0])
        sys_t = similarity(distance_matrix(nodes), 1.0)
        with pytest.raises(ValueError):
            fit_interpolant(nodes, values, sys_t)


class TestInterpolantEvaluation:

    def test_call_is_value(self):
        _, _, interp = make_interpolant(seed=5)
        x = np.array([0.3, -0.4])
        assert interp(x) == interp.value(x)

    def test_value_many_matches_scalar(self):
        _, _, interp = make_interpolant(seed=6)
        xs = np.random.default_rng(7).uniform(-2.0, 2.0, size=(30, 2))
        assert_allclose(interp.value_many(xs),
                        np.array([interp.value(x) for x in xs]), atol=1e-12)

    def test_dimension_mismatch_raises(self):
        _, _, interp = make_interpolant(seed=8, dim=2)
        with pytest.raises(ValueError):
            interp.value(np.zeros(3))

    def test_gradient_matches_central_difference(self):
        nodes, _, interp = make_interpolant(seed=9)
        rng = np.random.default_rng(10)
        checked = 0
        while checked < 25:
            x = rng.uniform(-2.0, 2.0, size=2)
            if np.min(np.linalg.norm(nodes - x, axis=1)) < 0.05:
                continue
            g_fd = central_difference(interp.value, x)
            assert_allclose(interp.gradient(x), g_fd,
                            atol=1e-8 + 1e-6 * np.linalg.norm(g_fd))
            checked += 1

    def test_gradient_raises_at_node(self):
        nodes, _, interp = make_interpolant(seed=11)
        with pytest.raises(FloatingPointError):
            interp.gradient(nodes[4])

    def test_constant_data_is_flat_at_symmetric_center(self):
        # With equal node values the interpolant inherits the symmetry of
        # the node set, so the gradient vanishes at the center of a square.
        nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        sys_t = similarity(distance_matrix(nodes), 1.0)
        interp = fit_interpolant(nodes, np.full(4, 2.5), sys_t)
        assert_allclose(interp.gradient(np.array([0.5, 0.5])), 0.0,
                        atol=1e-10)


class TestRelativeErrors:

    def test_zero_at_interpolation_nodes(self):
        nodes, values, interp = make_interpolant(seed=12)
        errs = relative_errors(interp, nodes, values)
        assert np.max(errs) <= 1e-7

    def test_positive_off_sample(self):
        nodes, values, interp = make_interpolant(seed=13)
        x = np.array([[5.0, 5.0]])
        errs = relative_errors(interp, x, np.array([100.0]))
        assert errs[0] > 0.0

    def test_floor_protects_tiny_values(self):
        _, _, interp = make_interpolant(seed=14)
        errs = relative_errors(interp, np.array([[0.1, 0.1]]),
                               np.array([0.0]))
        expected = abs(interp.value(np.array([0.1, 0.1]))) / EPS_Y
        assert errs[0] == pytest.approx(expected, rel=1e-12)

    def test_non_finite_values_report_zero(self):
        nodes, values, interp = make_interpolant(seed=15)
        xs = np.vstack([nodes[:2], [[0.2, 0.2]]])
        ys = np.array([values[0], np.inf, np.nan])
        errs = relative_errors(interp, xs, ys)
        assert errs[1] == 0.0
        assert errs[2] == 0.0
