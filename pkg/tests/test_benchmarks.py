"""Tests for the benchmark function registry."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from magopt.benchmarks import (
    FUNCTION_NAMES,
    ackley,
    get_function,
    griewank,
    griewank_rosenbrock_f8f2,
    rastrigin,
    sphere,
    with_random_shift,
)


class TestKnownValues:

    def test_rastrigin_origin_and_unit(self):
        assert rastrigin(np.zeros(4)) == 0.0
        assert rastrigin(np.ones(2)) == pytest.approx(2.0, abs=1e-12)

    def test_sphere(self):
        assert sphere(np.zeros(3)) == 0.0
        assert sphere(np.array([1.0, 2.0, 2.0])) == pytest.approx(9.0)

    def test_composite_zero_at_ones(self):
        # At the all-ones point both the chained quadratic and its cosine
        # wrapper vanish term by term.
        for dim in (2, 5, 20):
            assert griewank_rosenbrock_f8f2(np.ones(dim)) == pytest.approx(
                0.0, abs=1e-12)

    def test_composite_frozen_value_at_origin(self):
        assert griewank_rosenbrock_f8f2(np.zeros(2)) == pytest.approx(
            4.599476941318602, abs=1e-12)

    def test_ackley_origin(self):
        assert abs(ackley(np.zeros(3))) <= 1e-12

    def test_griewank_origin(self):
        assert griewank(np.zeros(6)) == 0.0


class TestRegistry:

    def test_names_are_registered(self):
        assert "rastrigin" in FUNCTION_NAMES
        assert "griewank_rosenbrock" in FUNCTION_NAMES

    def test_minimum_is_consistent_everywhere(self):
        for name in FUNCTION_NAMES:
            try:
                tf = get_function(name, 3)
            except ValueError:
                tf = get_function(name, 2)
            assert tf.fn(tf.xmin) == pytest.approx(tf.fmin, abs=1e-12)
            assert np.all(tf.xmin >= tf.lower) and np.all(tf.xmin <= tf.upper)

    def test_rastrigin_box(self):
        tf = get_function("rastrigin", 2)
        assert_allclose(tf.lower, -5.12)
        assert_allclose(tf.upper, 5.12)
        assert tf.dim == 2

    def test_composite_requires_two_dimensions(self):
        with pytest.raises(ValueError):
            get_function("griewank_rosenbrock", 1)

    def test_unknown_name_lists_choices(self):
        with pytest.raises(KeyError) as exc:
            get_function("styblinski", 2)
        assert "rastrigin" in str(exc.value)


class TestRandomShift:

    def test_shifted_minimum_still_evaluates_to_fmin(self):
        tf = with_random_shift(get_function("rastrigin", 3), seed=5)
        assert tf.fn(tf.xmin) == pytest.approx(tf.fmin, abs=1e-12)

    def test_shift_is_bounded_and_box_is_unchanged(self):
        base = get_function("sphere", 4)
        tf = with_random_shift(base, seed=2)
        assert_allclose(tf.lower, base.lower)
        assert_allclose(tf.upper, base.upper)
        extent = base.upper - base.lower
        assert np.all(np.abs(tf.xmin - base.xmin) <= 0.1 * extent + 1e-12)

    def test_name_records_the_shift(self):
        tf = with_random_shift(get_function("rastrigin", 2), seed=0)
        assert tf.name.endswith("_shifted")

    def test_deterministic_per_seed(self):
        a = with_random_shift(get_function("rastrigin", 2), seed=7)
        b = with_random_shift(get_function("rastrigin", 2), seed=7)
        c = with_random_shift(get_function("rastrigin", 2), seed=8)
        assert_allclose(a.xmin, b.xmin)
        assert not np.allclose(a.xmin, c.xmin)
