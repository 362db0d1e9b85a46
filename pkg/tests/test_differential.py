"""Tests for differential magnitude: the rank-one update, weighting
extension, small-scale and far-field limits, and the exploration term."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from magopt.differential import (
    DegenerateExtensionError,
    ExplorationTerm,
    PdViolationError,
    delta_magnitude,
    delta_magnitude_small_t,
    extend_weighting,
    submodularity_counterexample,
    zeta_vector,
)
from magopt.magnitude import distance_matrix, similarity
from magopt.solver import central_difference


def random_instance(rng, n_max=15, d_max=3, t=1.0):
    n = int(rng.integers(2, n_max))
    dim = int(rng.integers(1, d_max + 1))
    pts = rng.uniform(-1.0, 1.0, size=(n, dim))
    x = rng.uniform(-1.5, 1.5, size=dim)
    return pts, x, similarity(distance_matrix(pts), t)


class TestZetaVector:

    def test_matches_candidate_distances(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0]])
        x = np.array([0.0, 2.0])
        zeta = zeta_vector(pts, x, 0.5)
        assert_allclose(zeta, [np.exp(-1.0), np.exp(-0.5 * np.sqrt(5.0))])

    def test_at_member_point_is_similarity_column(self):
        pts = np.random.default_rng(0).uniform(size=(5, 2))
        sys_t = similarity(distance_matrix(pts), 2.0)
        assert_allclose(zeta_vector(pts, pts[3], 2.0), sys_t.Z[:, 3],
                        atol=1e-14)


class TestDeltaMagnitude:

    def test_matches_direct_augmented_recompute(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            pts, x, sys_t = random_instance(rng)
            dm = delta_magnitude(sys_t, zeta_vector(pts, x, sys_t.t))
            aug = similarity(distance_matrix(np.vstack([pts, x[None]])),
                             sys_t.t)
            assert abs(dm - (aug.mag - sys_t.mag)) <= 1e-9 * (1.0 + sys_t.mag)

    def test_nonnegative(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            pts, x, sys_t = random_instance(rng)
            assert delta_magnitude(sys_t, zeta_vector(pts, x, sys_t.t)) >= 0.0

    def test_zero_at_member_point(self):
        pts = np.random.default_rng(3).uniform(size=(6, 2))
        sys_t = similarity(distance_matrix(pts), 1.0)
        assert delta_magnitude(sys_t, sys_t.Z[:, 2]) == 0.0

    def test_pd_violation_raises(self):
        # A candidate column with entries above 1 cannot come from any
        # metric extension; the denominator goes firmly negative.
        pts = np.random.default_rng(4).uniform(size=(5, 2))
        sys_t = similarity(distance_matrix(pts), 1.0)
        with pytest.raises(PdViolationError):
            delta_magnitude(sys_t, 2.0 * np.ones(5))


class TestExtendWeighting:

    def test_solves_augmented_unit_system(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            pts, x, sys_t = random_instance(rng)
            w_ext = extend_weighting(sys_t, zeta_vector(pts, x, sys_t.t))
            Z_aug = np.exp(-sys_t.t
                           * distance_matrix(np.vstack([pts, x[None]])))
            assert np.max(np.abs(Z_aug @ w_ext - 1.0)) <= 1e-9

    def test_sum_is_magnitude_plus_delta(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            pts, x, sys_t = random_instance(rng)
            zeta = zeta_vector(pts, x, sys_t.t)
            w_ext = extend_weighting(sys_t, zeta)
            dm = delta_magnitude(sys_t, zeta)
            assert abs(w_ext.sum() - (sys_t.mag + dm)) <= 1e-10

    def test_at_member_point_raises(self):
        pts = np.random.default_rng(7).uniform(size=(5, 2))
        sys_t = similarity(distance_matrix(pts), 1.0)
        with pytest.raises(DegenerateExtensionError):
            extend_weighting(sys_t, sys_t.Z[:, 0])


class TestSmallScaleLimits:

    def test_small_t_expansion_tracks_exact_value(self):
        rng = np.random.default_rng(8)
        t = 1e-7
        for _ in range(20):
            n = int(rng.integers(2, 9))
            pts = rng.uniform(0.0, 1.0, size=(n, 2))
            x = rng.uniform(-0.5, 1.5, size=2)
            d = distance_matrix(pts)
            exact = delta_magnitude(similarity(d, t), zeta_vector(pts, x, t))
            approx = delta_magnitude_small_t(
                d, np.linalg.norm(pts - x, axis=1), t)
            assert abs(exact - approx) <= 1e-4 * max(abs(exact), 1e-300)

    def test_far_field_collinear_exact_limits(self):
        # Five equally spaced collinear points of unit diameter have
        # 1^T d^{-1} 1 = 2 exactly, so for a candidate at distance r from
        # every point the small-scale slope is (2r-1)^2 / (2(4r-1)).
        pts = np.linspace(0.0, 1.0, 5)[:, None]
        sys_t = similarity(distance_matrix(pts), 1e-8)
        for r, frozen in [(10.0, 361.0 / 78.0), (100.0, 39601.0 / 798.0)]:
            dm = delta_magnitude(sys_t, np.full(5, np.exp(-1e-8 * r)))
            assert dm / 1e-8 == pytest.approx(frozen, rel=1e-6)


class TestSubmodularityCounterexample:

    def test_frozen_values(self):
        lhs, rhs = submodularity_counterexample()
        assert lhs == pytest.approx(4.177312035355329, abs=1e-12)
        assert rhs == pytest.approx(4.181477083274911, abs=1e-12)

    def test_diminishing_returns_fails_here(self):
        lhs, rhs = submodularity_counterexample()
        assert lhs < rhs
        assert lhs == pytest.approx(4.1773, abs=5e-4)
        assert rhs == pytest.approx(4.1815, abs=5e-4)


class TestExplorationTerm:

    def make_term(self, seed=0, n=8, t=0.8):
        pts = np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, 2))
        sys_t = similarity(distance_matrix(pts), t)
        return pts, ExplorationTerm(pts, sys_t), sys_t

    def test_zero_at_nodes(self):
        pts, term, _ = self.make_term()
        for p in pts:
            assert term.value(p) == 0.0
        assert_allclose(term.value_many(pts), 0.0)

    def test_value_matches_delta_magnitude(self):
        pts, term, sys_t = self.make_term(seed=1)
        rng = np.random.default_rng(2)
        for _ in range(20):
            x = rng.uniform(-1.5, 1.5, size=2)
            expected = delta_magnitude(sys_t, zeta_vector(pts, x, sys_t.t))
            assert term.value(x) == pytest.approx(expected, abs=1e-12)

    def test_value_many_matches_scalar(self):
        pts, term, _ = self.make_term(seed=3)
        xs = np.random.default_rng(4).uniform(-1.5, 1.5, size=(40, 2))
        assert_allclose(term.value_many(xs),
                        np.array([term.value(x) for x in xs]), atol=1e-12)

    def test_gradient_matches_central_difference(self):
        pts, term, _ = self.make_term(seed=5)
        rng = np.random.default_rng(6)
        checked = 0
        while checked < 25:
            x = rng.uniform(-1.5, 1.5, size=2)
            if np.min(np.linalg.norm(pts - x, axis=1)) < 0.05:
                continue
            g_fd = central_difference(term.value, x)
            assert_allclose(term.gradient(x), g_fd,
                            atol=1e-8 + 1e-6 * np.linalg.norm(g_fd))
            checked += 1

    def test_gradient_raises_inside_node_radius(self):
        pts, term, _ = self.make_term(seed=7)
        with pytest.raises(FloatingPointError):
            term.gradient(pts[0] + 1e-10)

    def test_gradient_zero_in_clamped_region(self):
        # At a tiny scale the extension denominator underflows well outside
        # the node radius; the gradient degrades to zero instead of blowing
        # up on the near-singular quotient.
        nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        t = float(np.sqrt(np.finfo(float).eps))
        term = ExplorationTerm(nodes, similarity(distance_matrix(nodes), t))
        assert_allclose(term.gradient(np.array([1e-6, 0.0])), 0.0)
