"""Expression parsing, jets and boundary admissibility."""

import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from distributional_curvature.errors import (
    ArityError,
    ExprSyntaxError,
    JetDomainError,
    UnknownIdentifierError,
)
from distributional_curvature.expr import eval_jet, eval_jet_batch, parse_expr, periodicity_check
from distributional_curvature.spaces import builtin_space

X0, X1 = sp.symbols('x0 x1')


def sympy_jet(text, point):
    """Value, gradient, Hessian and third derivatives of ``text`` by sympy."""
    e = sp.sympify(text.replace('^', '**'), locals={'x0': X0, 'x1': X1})
    syms = (X0, X1)
    at = dict(zip(syms, point))
    d1 = [sp.diff(e, a) for a in syms]
    d2 = [[sp.diff(e, a, b) for b in syms] for a in syms]
    d3 = [[[sp.diff(e, a, b, c) for c in syms] for b in syms] for a in syms]
    num = lambda obj: np.array(sp.Matrix(obj).subs(at).evalf(), dtype=float)  # noqa: E731
    return (float(e.subs(at).evalf()), num(d1).ravel(), num(d2),
            np.array([num(layer) for layer in d3]))


def test_square_jet():
    jet = eval_jet(parse_expr("x0*x0", 1), [3.0])
    assert float(jet.value) == 9.0
    assert jet.d1[0] == 6.0
    assert jet.d2[0, 0] == 2.0
    assert jet.d3[0, 0, 0] == 0.0


def test_sin_jet_at_zero():
    jet = eval_jet(parse_expr("sin(x0)", 1), [0.0])
    assert [float(jet.value), jet.d1[0], jet.d2[0, 0], jet.d3[0, 0, 0]] == \
        pytest.approx([0.0, 1.0, 0.0, -1.0])


@pytest.mark.parametrize("text", [
    "exp(sin(x0))*x1",
    "x0^3 - 2*x0*x1^2 + 1",
    "cos(x0*x1)/(2 + x1^2)",
    "sqrt(1 + x0^2 + x1^2)",
    "tanh(x0 - x1)*log(3 + x0)",
    "(1 + x0^2)^(1.5) - tan(x1/4)",
])
def test_jets_match_symbolic_derivatives(text):
    point = (0.3, -0.7)
    value, d1, d2, d3 = sympy_jet(text, point)
    jet = eval_jet(parse_expr(text, 2), np.array(point))
    assert float(jet.value) == pytest.approx(value, rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(jet.d1, d1, rtol=1e-11, atol=1e-11)
    np.testing.assert_allclose(jet.d2, d2, rtol=1e-11, atol=1e-11)
    np.testing.assert_allclose(jet.d3, d3, rtol=1e-10, atol=1e-10)


MONOMIALS = [(a, b) for a in range(4) for b in range(4) if a + b <= 3]


def falling(n, k):
    out = 1
    for i in range(k):
        out *= n - i
    return out


def poly_derivative(coeffs, alpha, point):
    """Exact integer value of a partial derivative of sum c x0^a x1^b."""
    x, y = point
    total = 0
    for c, (a, b) in zip(coeffs, MONOMIALS):
        ax, ay = alpha.count(0), alpha.count(1)
        if ax > a or ay > b:
            continue
        total += c * falling(a, ax) * falling(b, ay) * x ** (a - ax) * y ** (b - ay)
    return total


@settings(max_examples=1000, deadline=None)
@given(coeffs=st.lists(st.integers(-5, 5), min_size=len(MONOMIALS), max_size=len(MONOMIALS)),
       point=st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_cubic_polynomials_are_exact(coeffs, point):
    text = " + ".join(f"{c}*x0^{a}*x1^{b}" for c, (a, b) in zip(coeffs, MONOMIALS))
    jet = eval_jet(parse_expr(text, 2), [float(v) for v in point])
    assert float(jet.value) == poly_derivative(coeffs, (), point)
    for i in range(2):
        assert jet.d1[i] == poly_derivative(coeffs, (i,), point)
        for j in range(2):
            assert jet.d2[i, j] == poly_derivative(coeffs, (i, j), point)
            for k in range(2):
                assert jet.d3[i, j, k] == poly_derivative(coeffs, (i, j, k), point)


LEAVES = st.sampled_from(["x0", "x1", "0.5", "2", "pi"])


def _combine(children):
    unary = st.tuples(st.sampled_from(["sin", "cos", "tanh", "exp"]), children).map(
        lambda t: f"{t[0]}(({t[1]})/3)" if t[0] == 'exp' else f"{t[0]}({t[1]})")
    binary = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(
        lambda t: f"({t[0]} {t[1]} {t[2]})")
    return unary | binary


EXPRESSIONS = st.recursive(LEAVES, _combine, max_leaves=8)


@settings(max_examples=1000, deadline=None)
@given(text=EXPRESSIONS,
       point=st.tuples(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0)))
def test_jets_agree_with_central_differences(text, point):
    e = parse_expr(text, 2)
    p = np.array(point)
    h = 1e-5
    jet = eval_jet(e, p)
    for axis in range(2):
        step = np.zeros(2)
        step[axis] = h
        plus, minus = eval_jet(e, p + step), eval_jet(e, p - step)
        pairs = [
            ((plus.value - minus.value) / (2 * h), jet.d1[axis]),
            ((plus.d1 - minus.d1) / (2 * h), jet.d2[axis]),
            ((plus.d2 - minus.d2) / (2 * h), jet.d3[axis]),
        ]
        for numeric, exact in pairs:
            scale = 1.0 + np.max(np.abs(plus.d2)) + np.max(np.abs(plus.d3))
            np.testing.assert_allclose(numeric, exact, rtol=0, atol=1e-5 * scale)


def test_batch_matches_pointwise():
    e = parse_expr("sin(x0)*cos(2*x1) + x0*x1", 2)
    points = np.array([[0.1, 0.2], [1.0, -0.5], [2.5, 3.0]])
    batch = eval_jet_batch(e, points)
    for i, p in enumerate(points):
        single = eval_jet(e, p)
        assert float(batch.value[i]) == pytest.approx(float(single.value), rel=1e-14)
        np.testing.assert_allclose(batch.d3[i], single.d3, rtol=1e-13, atol=1e-14)


def test_exponent_notation_and_params():
    e = parse_expr("a*1e-3 + 2.5E+1", 1, params={'a': 4.0})
    assert float(eval_jet(e, [0.0], 0).value) == pytest.approx(25.004)


def test_power_is_right_associative():
    e = parse_expr("2^3^2", 1)
    assert float(eval_jet(e, [0.0], 0).value) == 512.0


@pytest.mark.parametrize("text", ["x0^(1+1)", "x0^(4/2)", "x0^(sin(0) + 2)", "x0^n"])
def test_constant_exponents_take_the_exact_power(text):
    jet = eval_jet(parse_expr(text, 1, params={'n': 2}), [-1.0])
    assert float(jet.value) == 1.0
    assert jet.d1[0] == -2.0
    assert jet.d2[0, 0] == 2.0
    assert jet.d3[0, 0, 0] == 0.0


def test_undefined_constant_powers_fail_at_evaluation():
    with pytest.raises(JetDomainError):
        eval_jet(parse_expr("(0-1)^0.5 + x0", 1), [0.0])


def test_coordinate_aliases():
    e = parse_expr("sin(theta)^2", 2, coords=['theta', 'phi'])
    jet = eval_jet(e, [math.pi / 4, 0.0])
    assert float(jet.value) == pytest.approx(0.5)
    assert jet.d1[0] == pytest.approx(1.0)


@pytest.mark.parametrize("text", ["sin(", "x0 +", "(x0", "x0 ** 2", ""])
def test_syntax_errors(text):
    with pytest.raises(ExprSyntaxError):
        parse_expr(text, 1)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as info:
        parse_expr("x0 + y", 1)
    assert info.value.name == 'y'
    with pytest.raises(UnknownIdentifierError):
        parse_expr("x1", 1)
    with pytest.raises(UnknownIdentifierError):
        parse_expr("erf(x0)", 1)


def test_arity_errors():
    with pytest.raises(ArityError):
        parse_expr("sin(x0, x1)", 2)
    with pytest.raises(ArityError):
        parse_expr("cos", 1)


def test_division_by_zero_names_the_point():
    e = parse_expr("1/(1 - x0)", 1)
    with pytest.raises(JetDomainError) as info:
        eval_jet(e, [1.0])
    assert info.value.point == (1.0,)
    assert 'division by zero' in str(info.value)


@pytest.mark.parametrize("text, point", [
    ("log(x0)", [0.0]),
    ("sqrt(x0)", [-1.0]),
    ("x0^(-2)", [0.0]),
])
def test_domain_errors(text, point):
    with pytest.raises(JetDomainError):
        eval_jet(parse_expr(text, 1), point)


def test_bump_is_flat_outside_support():
    e = parse_expr("bump(x0)", 1)
    inside = eval_jet(e, [0.0])
    assert float(inside.value) == 1.0
    for x in (-1.0, 1.0, 1.5, -7.0):
        jet = eval_jet(e, [x])
        assert float(jet.value) == 0.0
        assert jet.d1[0] == 0.0 and jet.d2[0, 0] == 0.0 and jet.d3[0, 0, 0] == 0.0


def test_bump_derivatives_are_finite_near_the_edge():
    e = parse_expr("bump(x0)", 1)
    points = np.linspace(-1.0, 1.0, 2001)[:, None]
    jet = eval_jet_batch(e, points)
    assert np.all(jet.is_finite())
    assert np.all(jet.value >= 0.0)


def test_periodicity_on_torus():
    torus = builtin_space('torus')
    assert periodicity_check(parse_expr("sin(x0)*cos(2*x1)", 2), torus)
    assert not periodicity_check(parse_expr("x0", 2), torus)
    assert not periodicity_check(parse_expr("sin(x0/2)", 2), torus)


def test_periodicity_on_bounded_axes():
    disk = builtin_space('hyperbolic-disk')
    bumped = disk.parse("bump((x*x+y*y)/0.4225)*(1 + x*y)")
    assert periodicity_check(bumped, disk)
    assert not periodicity_check(disk.parse("1 + x*y"), disk)


def test_periodicity_on_sphere():
    sphere = builtin_space('sphere')
    assert periodicity_check(sphere.parse("bump(((theta-pi/2)/1.3)^2)*cos(phi)"), sphere)
    assert not periodicity_check(sphere.parse("bump(((theta-pi/2)/1.3)^2)*phi"), sphere)
    assert not periodicity_check(sphere.parse("cos(theta)"), sphere)
