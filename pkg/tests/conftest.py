"""Shared fixtures: built-in spaces and small grids."""

import pytest

from distributional_curvature.quadrature import build_grid
from distributional_curvature.spaces import builtin_space
from distributional_curvature.suite import FieldBudget


@pytest.fixture(scope="session")
def torus():
    return builtin_space('torus')


@pytest.fixture(scope="session")
def sphere():
    return builtin_space('sphere')


@pytest.fixture(scope="session")
def disk():
    return builtin_space('hyperbolic-disk')


@pytest.fixture(scope="session")
def torus_grid(torus):
    # the trapezoid rule at 32 nodes integrates every product of the
    # degree-2 trig fields exactly
    return build_grid(torus, 32)


@pytest.fixture(scope="session")
def sphere_grid(sphere):
    return build_grid(sphere, 48)


@pytest.fixture
def small_budget():
    return FieldBudget(atoms=2, degree=2, draws=2, seed=7)


@pytest.fixture
def torus_fields(torus):
    X = torus.vector([('1 + 0.5*cos(x1)', 'sin(x0)'), ('cos(x0)', 'sin(x1)')])
    Y = torus.vector([('sin(x1)', 'cos(x0) + sin(x0)*cos(x1)')])
    Z = torus.vector([('1', 'sin(x0 + x1)')])
    W = torus.vector([('cos(x1)', 'cos(x0)'), ('0.3', 'sin(2*x1)')])
    f = torus.function('1 + 0.5*sin(x0)*cos(x1)')
    g = torus.function('cos(x0)*cos(x1)')
    return {'X': X, 'Y': Y, 'Z': Z, 'W': W, 'f': f, 'g': g}
