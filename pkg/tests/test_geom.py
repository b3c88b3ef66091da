"""Pointwise geometry against symbolic Christoffel symbols and known curvatures."""

import math

import numpy as np
import pytest
import sympy as sp

from distributional_curvature.geom import (
    VectorSample,
    cov_deriv_pointwise,
    curvature_pairing,
    divergence_m,
    field_sample,
    grad_vec,
    hessian_bilinear,
    inner,
    lie_bracket_pointwise,
    metric_at,
    riemann_oracle,
)
from distributional_curvature.errors import MetricError
from distributional_curvature.quadrature import build_grid, integrate
from distributional_curvature.spaces import builtin_space, make_space


def symbolic_christoffel(g, coords):
    """Gamma^k_ij of a sympy metric matrix."""
    ginv = g.inv()
    d = len(coords)
    return [[[sp.simplify(sum(ginv[k, l] * (sp.diff(g[j, l], coords[i])
                                             + sp.diff(g[i, l], coords[j])
                                             - sp.diff(g[i, j], coords[l])) for l in range(d)) / 2)
              for j in range(d)] for i in range(d)] for k in range(d)]


def symbolic_riemann(g, coords):
    """R[i,j,k,l] = g_im (d_k G^m_lj - d_l G^m_kj + G^m_kp G^p_lj - G^m_lp G^p_kj)."""
    G = symbolic_christoffel(g, coords)
    d = len(coords)
    up = [[[[sp.diff(G[m][l][j], coords[k]) - sp.diff(G[m][k][j], coords[l])
             + sum(G[m][k][p] * G[p][l][j] - G[m][l][p] * G[p][k][j] for p in range(d))
             for l in range(d)] for k in range(d)] for j in range(d)] for m in range(d)]
    return [[[[sp.simplify(sum(g[i, m] * up[m][j][k][l] for m in range(d)))
               for l in range(d)] for k in range(d)] for j in range(d)] for i in range(d)]


def as_array(nested, subs):
    fn = sp.lambdify(list(subs), nested, 'math')
    return np.array(fn(*subs.values()), dtype=float)


THETA, PHI = sp.symbols('theta phi')
X, Y = sp.symbols('x y')
SPHERE_G = sp.Matrix([[1, 0], [0, sp.sin(THETA) ** 2]])
DISK_G = sp.Matrix([[4 / (1 - X ** 2 - Y ** 2) ** 2, 0], [0, 4 / (1 - X ** 2 - Y ** 2) ** 2]])


def test_flat_metric_has_no_christoffel_symbols():
    m = metric_at(builtin_space('euclidean'), [0.2, -0.4])
    assert np.all(m.Gamma == 0.0)
    assert float(m.sqrt_det) == 1.0


@pytest.mark.parametrize("point", [(math.pi / 4, 0.3), (1.2, 5.0), (math.pi / 2, 0.0)])
def test_sphere_christoffel_matches_sympy(point):
    m = metric_at(builtin_space('sphere'), np.array(point))
    expected = as_array(symbolic_christoffel(SPHERE_G, (THETA, PHI)),
                        {THETA: point[0], PHI: point[1]})
    np.testing.assert_allclose(m.Gamma, expected, atol=1e-12)


def test_disk_christoffel_matches_sympy():
    point = (0.3, -0.2)
    m = metric_at(builtin_space('hyperbolic-disk'), np.array(point))
    expected = as_array(symbolic_christoffel(DISK_G, (X, Y)), {X: point[0], Y: point[1]})
    np.testing.assert_allclose(m.Gamma, expected, rtol=1e-12, atol=1e-12)


def test_disk_density_at_origin():
    m = metric_at(builtin_space('hyperbolic-disk'), [0.0, 0.0])
    assert float(m.sqrt_det) == pytest.approx(4.0)
    assert float(m.density) == pytest.approx(4.0)


def test_batched_metric_matches_single_points():
    sphere = builtin_space('sphere')
    points = np.array([[0.5, 0.1], [1.0, 2.0], [2.5, 6.0]])
    batch = metric_at(sphere, points)
    for i, p in enumerate(points):
        single = metric_at(sphere, p)
        np.testing.assert_allclose(batch.dGamma[i], single.dGamma, rtol=1e-13, atol=1e-13)


def test_gradient_on_sphere():
    sphere = builtin_space('sphere')
    p = np.array([math.pi / 3, 1.0])
    grad = grad_vec(sphere.function('phi'), p, metric_at(sphere, p))
    np.testing.assert_allclose(grad, [0.0, 4.0 / 3.0], atol=1e-14)


def test_hessian_of_height_function_on_sphere():
    # Hess z = -z g for the height function z = cos(theta)
    sphere = builtin_space('sphere')
    p = np.array([math.pi / 3, 0.7])
    H = hessian_bilinear(sphere.function('cos(theta)'), p, metric_at(sphere, p))
    np.testing.assert_allclose(H, [[-0.5, 0.0], [0.0, -0.375]], atol=1e-14)


def test_hessian_on_flat_chart():
    flat = builtin_space('euclidean')
    p = np.array([0.3, 0.1])
    H = hessian_bilinear(flat.function('x0*x0 + 3*x0*x1'), p, metric_at(flat, p))
    np.testing.assert_allclose(H, [[2.0, 3.0], [3.0, 0.0]])


def test_covariant_derivative_of_phi_field_on_sphere():
    sphere = builtin_space('sphere')
    m = metric_at(sphere, np.array([math.pi / 4, 0.0]))
    d_phi = VectorSample(np.array([0.0, 1.0]), np.zeros((2, 2)))
    np.testing.assert_allclose(cov_deriv_pointwise(d_phi, d_phi, m), [-0.5, 0.0], atol=1e-14)


def test_weighted_divergence():
    wt = builtin_space('weighted-torus')
    X = wt.vector([('1', 'sin(x0)')])
    points = np.array([[0.4, 1.0], [2.0, 3.0], [5.5, 0.2]])
    m = metric_at(wt, points)
    div = divergence_m(field_sample(X, points, m), m)
    x0 = points[:, 0]
    np.testing.assert_allclose(div, -np.sin(x0) + np.cos(x0) ** 2, atol=1e-13)


@pytest.mark.parametrize("backend, resolution, f_text, X_atoms", [
    ('weighted-torus', 32, 'cos(x0) + sin(x1)*sin(x0)',
     [('1 + 0.5*cos(x1)', 'sin(x0)*cos(x1)'), ('sin(x0)', 'cos(x1)')]),
    ('gauss-weighted-plane', 96, 'bump((x0*x0+x1*x1)/25)*(1 + x0/5 - x1*x1/25)',
     [('bump((x0*x0+x1*x1)/25)*(1 + x1/5)', 'x0*x1/5 + x0/5')]),
])
def test_integration_by_parts_against_weighted_measure(backend, resolution, f_text, X_atoms):
    # int <grad f, X> dm = -int f div_m X dm
    space = builtin_space(backend)
    grid = build_grid(space, resolution)
    f, X = space.function(f_text), space.vector(X_atoms)
    m = grid.metric
    Xs = grid.samples(X)
    lhs = integrate(grid, inner(m, grad_vec(f, grid.nodes, m), Xs.comp))
    rhs = -integrate(grid, grid.function_jet(f, 0).value * divergence_m(Xs, m))
    assert lhs == pytest.approx(rhs, abs=1e-8)


@pytest.mark.parametrize("backend, g_text, points", [
    ('weighted-torus', 'sin(x0)*cos(x1) + 0.3*cos(2*x1)', [[0.4, 1.0], [2.0, 3.0], [5.5, 0.2]]),
    ('gauss-weighted-plane', 'x0*x1 + sin(x0) - x1^3/7', [[0.3, -1.2], [2.5, 0.7]]),
    ('sphere', 'cos(theta)*sin(phi) + sin(theta)^2*cos(phi)', [[0.5, 1.0], [2.2, 4.0]]),
])
def test_gradient_norm_derivative_is_twice_the_hessian(backend, g_text, points):
    # X(|grad g|^2) = 2 Hess g(X, grad g)
    space = builtin_space(backend)
    p = np.array(points, dtype=float)
    m = metric_at(space, p)
    g = space.function(g_text)
    jet = g.expr.jet(p, 2)
    X = np.stack([np.cos(p[:, 0] + p[:, 1]), 1.0 + p[:, 0] * p[:, 1]], axis=-1)
    d_norm = (np.einsum('...kij,...i,...j->...k', m.dginv, jet.d1, jet.d1)
              + 2.0 * np.einsum('...ij,...ik,...j->...k', m.ginv, jet.d2, jet.d1))
    lhs = np.einsum('...k,...k->...', X, d_norm)
    rhs = 2.0 * np.einsum('...ij,...i,...j->...', hessian_bilinear(g, p, m), X,
                          grad_vec(g, p, m))
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_field_sample_derivatives_match_finite_differences():
    disk = builtin_space('hyperbolic-disk')
    X = disk.vector([('1 + x*y', 'x*x - y'), ('y', 'sin(x)')])
    p = np.array([0.2, -0.1])
    sample = field_sample(X, p, metric_at(disk, p))
    eps = 1e-6
    for j in range(2):
        step = np.zeros(2)
        step[j] = eps
        hi = field_sample(X, p + step, metric_at(disk, p + step))
        lo = field_sample(X, p - step, metric_at(disk, p - step))
        np.testing.assert_allclose((hi.comp - lo.comp) / (2 * eps), sample.dcomp[:, j],
                                   rtol=1e-6, atol=1e-7)
        np.testing.assert_allclose((hi.dcomp - lo.dcomp) / (2 * eps), sample.d2comp[:, :, j],
                                   rtol=1e-6, atol=1e-6)


def test_bracket_is_antisymmetric_exactly():
    disk = builtin_space('hyperbolic-disk')
    p = np.array([0.1, 0.25])
    m = metric_at(disk, p)
    A = field_sample(disk.vector([('x', 'y*y'), ('1', 'x*y')]), p, m)
    B = field_sample(disk.vector([('cos(y)', 'x')]), p, m)
    xy, yx = lie_bracket_pointwise(A, B, m), lie_bracket_pointwise(B, A, m)
    assert np.array_equal(xy.comp, -yx.comp)
    assert np.array_equal(xy.dcomp, -yx.dcomp)
    assert np.all(lie_bracket_pointwise(A, A, m).comp == 0.0)


def test_sphere_riemann_component():
    theta = 1.1
    R = riemann_oracle(builtin_space('sphere'), [theta, 0.5])
    assert R[0, 1, 0, 1] == pytest.approx(math.sin(theta) ** 2, rel=1e-12)
    assert R[0, 1, 1, 0] == pytest.approx(-math.sin(theta) ** 2, rel=1e-12)


def test_riemann_matches_sympy_on_disk():
    point = (0.3, -0.2)
    R = riemann_oracle(builtin_space('hyperbolic-disk'), np.array(point))
    expected = as_array(symbolic_riemann(DISK_G, (X, Y)), {X: point[0], Y: point[1]})
    np.testing.assert_allclose(R, expected, rtol=1e-10, atol=1e-10)


def test_riemann_symmetries():
    R = riemann_oracle(builtin_space('hyperbolic-disk'), [0.2, 0.4])
    np.testing.assert_allclose(R, -np.swapaxes(R, 0, 1), atol=1e-12)
    np.testing.assert_allclose(R, -np.swapaxes(R, 2, 3), atol=1e-12)
    np.testing.assert_allclose(R, np.transpose(R, (2, 3, 0, 1)), atol=1e-12)
    bianchi = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
    np.testing.assert_allclose(bianchi, 0.0, atol=1e-12)


def test_disk_sectional_curvature_is_minus_one():
    disk = builtin_space('hyperbolic-disk')
    p = np.array([0.35, -0.15])
    m = metric_at(disk, p)
    R = riemann_oracle(disk, p)
    a, b = np.array([1.0, 0.5]), np.array([-0.3, 2.0])
    wedge = (np.einsum('ij,i,j', m.g, a, a) * np.einsum('ij,i,j', m.g, b, b)
             - np.einsum('ij,i,j', m.g, a, b) ** 2)
    assert curvature_pairing(R, a, b, b, a) == pytest.approx(-wedge, rel=1e-10)


def test_weight_does_not_change_curvature():
    R = riemann_oracle(builtin_space('gauss-weighted-plane'), [1.0, -2.0])
    assert np.all(R == 0.0)


def test_indefinite_metric_is_rejected():
    space = make_space('bad', 2, [[-1, 1], [-1, 1]], [False, False],
                       [['1', '0'], ['0', 'x0']])
    with pytest.raises(MetricError) as info:
        metric_at(space, [-0.5, 0.0])
    assert info.value.point == (-0.5, 0.0)


def test_nonpositive_weight_is_rejected():
    space = make_space('bad-weight', 2, [[-1, 1], [-1, 1]], [False, False],
                       [['1', '0'], ['0', '1']], weight='x0')
    with pytest.raises(MetricError):
        metric_at(space, [0.0, 0.0])
