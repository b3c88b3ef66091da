"""Quadrature grids over the reference measure."""

import math

import numpy as np
import pytest

from distributional_curvature.errors import QuadratureError
from distributional_curvature.quadrature import build_grid, integrate, pairwise_sum
from distributional_curvature.spaces import builtin_space


def test_trapezoid_is_exact_for_trig_polynomials(torus_grid):
    value = integrate(torus_grid, lambda x: np.sin(x[:, 0]) ** 2)
    assert value == pytest.approx(2.0 * math.pi ** 2, rel=1e-13)


def test_sphere_area():
    grid = build_grid(builtin_space('sphere'), 64)
    assert integrate(grid, 1.0) == pytest.approx(4.0 * math.pi, rel=1e-12)


def test_gaussian_weight_mass():
    grid = build_grid(builtin_space('gauss-weighted-plane'), 64)
    assert integrate(grid, 1.0) == pytest.approx(2.0 * math.pi, rel=1e-7)


def test_disk_area_of_coordinate_box():
    # int 4/(1-r^2)^2 over a small box is close to 4 * box area
    grid = build_grid(builtin_space('hyperbolic-disk'), 32)
    area = integrate(grid, 1.0)
    assert area > 4.0 * 1.4 ** 2


def test_default_rules_follow_periodicity():
    grid = build_grid(builtin_space('sphere'), [16, 24])
    assert grid.rules == ('gauss-legendre', 'equispaced')
    assert grid.size == 16 * 24
    assert grid.label() == '16x24'


def test_resolution_below_minimum():
    with pytest.raises(QuadratureError, match=r"resolution\[0\] < 8"):
        build_grid(builtin_space('torus'), 4)


def test_equispaced_needs_periodic_axis():
    with pytest.raises(QuadratureError):
        build_grid(builtin_space('euclidean'), 16, 'equispaced')


def test_unknown_rule():
    with pytest.raises(QuadratureError):
        build_grid(builtin_space('torus'), 16, 'simpson')


def test_non_finite_integrand_names_a_node(torus_grid):
    values = np.ones(torus_grid.size)
    values[5] = np.nan
    with pytest.raises(QuadratureError, match="not finite at node"):
        integrate(torus_grid, values)


def test_pairwise_sum_is_order_fixed():
    values = np.random.default_rng(3).normal(size=1001)
    assert pairwise_sum(values) == pairwise_sum(values.copy())
    assert pairwise_sum(values) == pytest.approx(float(np.sum(values)), abs=1e-12)
    assert pairwise_sum([]) == 0.0


def test_grid_samples_are_cached(torus_grid, torus_fields):
    X = torus_fields['X']
    assert torus_grid.samples(X) is torus_grid.samples(X)
