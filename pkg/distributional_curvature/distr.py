#!/usr/bin/env python3
"""
Distributional covariant derivative, Lie bracket and curvature.

Distributions are lazy evaluators: a ``CovectorDistribution`` keeps the
sampled operand fields and re-assembles its integrand against every test
vector it is paired with. Pairings return ``Pairing`` values, plain floats
that also carry the L1 majorant ``scale = 1 + int sum|terms| dm`` used to
normalize residuals.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple, Union

import numpy as np

from .errors import DivergenceError, NegativeProbeError, QuadratureError
from .expr import Const, ExprAST
from .geom import (
    MetricAtPoint,
    VectorSample,
    covariant_jacobian,
    cov_deriv_pointwise,
    curvature_pairing,
    d_divergence_m,
    directional,
    divergence_m,
    hs_norm,
    inner,
    lie_bracket_pointwise,
    norm_sq,
    scale_sample,
    second_directional,
)
from .quadrature import QuadratureGrid, integrate
from .spaces import ChartSpace, TestFunction, TestVector

logger = logging.getLogger(__name__)

FieldLike = Union[TestVector, VectorSample]


class Pairing(float):
    """A real value together with the L1 scale of the integrand behind it."""

    scale: float

    def __new__(cls, value: float, scale: float = 1.0):
        obj = super().__new__(cls, value)
        obj.scale = float(scale)
        return obj

    def __repr__(self):
        return f"Pairing({float(self)!r}, scale={self.scale!r})"


def combined_scale(*values: float) -> float:
    """Scale of a combination of pairings: 1 + the sum of their integrated majorants."""
    return 1.0 + sum(max(getattr(v, 'scale', 1.0) - 1.0, 0.0) for v in values)


def _check_grid(space: ChartSpace, grid: QuadratureGrid) -> None:
    if grid.space is not space and grid.space != space:
        raise ValueError(f"grid was built for '{grid.space.name}', not '{space.name}'")


def _samples(F: FieldLike, grid: QuadratureGrid) -> VectorSample:
    if isinstance(F, VectorSample):
        if F.comp.shape != grid.nodes.shape:
            raise ValueError("vector sample does not live on this grid")
        if not np.all(np.isfinite(F.comp)):
            raise QuadratureError("vector sample is not finite on the grid")
        return F
    grid.space.require_admissible(F)
    return grid.samples(F)


# Integrand terms

@dataclass(frozen=True, eq=False)
class _CovDerivTerm:
    """W -> -<nabla_X W, Y> - <Y, W> div_m X."""
    X: VectorSample
    Y: VectorSample

    def assemble(self, W: VectorSample, m: MetricAtPoint) -> Tuple[np.ndarray, np.ndarray]:
        a = inner(m, cov_deriv_pointwise(self.X, W, m), self.Y.comp)
        b = inner(m, self.Y.comp, W.comp) * self.X.divergence(m)
        return -a - b, np.abs(a) + np.abs(b)

    def bound(self, W: VectorSample, m: MetricAtPoint) -> np.ndarray:
        """|nabla W|_HS |X||Y| + |Y||W||div X|, pointwise."""
        x, y, w = (np.sqrt(norm_sq(m, v.comp)) for v in (self.X, self.Y, W))
        return (hs_norm(covariant_jacobian(W, m), m) * x * y
                + y * w * np.abs(self.X.divergence(m)))


@dataclass(frozen=True, eq=False)
class _InnerTerm:
    """W -> <V, W>."""
    V: VectorSample

    def assemble(self, W: VectorSample, m: MetricAtPoint) -> Tuple[np.ndarray, np.ndarray]:
        v = inner(m, self.V.comp, W.comp)
        return v, np.abs(v)

    def bound(self, W: VectorSample, m: MetricAtPoint) -> np.ndarray:
        return np.sqrt(norm_sq(m, self.V.comp) * norm_sq(m, W.comp))


_Component = Tuple[float, Tuple[TestFunction, ...], Union[_CovDerivTerm, _InnerTerm]]


@dataclass(frozen=True, eq=False)
class CovectorDistribution:
    """
    Element of the algebraic dual of test vector fields.

    Each component is (coefficient, multipliers, term); the multipliers
    realize the module action (fT)(W) = T(fW) and are applied to W in order.
    """
    space: ChartSpace
    grid: QuadratureGrid
    components: Tuple[_Component, ...]
    provenance: str

    @classmethod
    def zero(cls, space: ChartSpace, grid: QuadratureGrid) -> 'CovectorDistribution':
        return cls(space, grid, (), 'zero')

    def __call__(self, W: TestVector) -> Pairing:
        return evaluate(self, W)

    def _combine(self, other: 'CovectorDistribution', sign: float) -> 'CovectorDistribution':
        if other.grid is not self.grid:
            raise ValueError("cannot combine distributions assembled on different grids")
        flipped = tuple((sign * c, ms, term) for c, ms, term in other.components)
        op = '+' if sign > 0 else '-'
        return CovectorDistribution(self.space, self.grid, self.components + flipped,
                                    f"({self.provenance} {op} {other.provenance})")

    def __add__(self, other: 'CovectorDistribution') -> 'CovectorDistribution':
        return self._combine(other, 1.0)

    def __sub__(self, other: 'CovectorDistribution') -> 'CovectorDistribution':
        return self._combine(other, -1.0)

    def __neg__(self) -> 'CovectorDistribution':
        return -1.0 * self

    def __rmul__(self, c: float) -> 'CovectorDistribution':
        return CovectorDistribution(
            self.space, self.grid,
            tuple((float(c) * k, ms, term) for k, ms, term in self.components),
            f"{c!r}*{self.provenance}",
        )

    def times(self, f: TestFunction) -> 'CovectorDistribution':
        """Module action: (f T)(W) = T(f W)."""
        self.space.require_admissible(f)
        return CovectorDistribution(
            self.space, self.grid,
            tuple((c, (f,) + ms, term) for c, ms, term in self.components),
            f"f*{self.provenance}",
        )

    def _scaled_samples(self, W: TestVector) -> Dict[Tuple[TestFunction, ...], VectorSample]:
        self.space.require_admissible(W)
        out: Dict[Tuple[TestFunction, ...], VectorSample] = {}
        for _, ms, _ in self.components:
            if ms in out:
                continue
            V = W
            for f in ms:
                V = V.scaled(f)
            out[ms] = self.grid.samples(V)
        return out

    def integrand(self, W: TestVector) -> Tuple[np.ndarray, np.ndarray]:
        """Node values of the assembled integrand and of its L1 majorant."""
        m = self.grid.metric
        values = np.zeros(self.grid.size)
        majorant = np.zeros(self.grid.size)
        samples = self._scaled_samples(W)
        for c, ms, term in self.components:
            v, mj = term.assemble(samples[ms], m)
            values = values + c * v
            majorant = majorant + abs(c) * mj
        return values, majorant

    def bound(self, W: TestVector) -> float:
        """Integrability bound: |T(W)| never exceeds this for a single-term T."""
        m = self.grid.metric
        samples = self._scaled_samples(W)
        total = np.zeros(self.grid.size)
        for c, ms, term in self.components:
            total = total + abs(c) * term.bound(samples[ms], m)
        return integrate(self.grid, total)


@dataclass(frozen=True, eq=False)
class ScalarDistribution:
    """Element of the algebraic dual of test functions: f -> T(f W)."""
    covector: CovectorDistribution
    W: TestVector
    multipliers: Tuple[TestFunction, ...] = ()
    provenance: str = ''

    def __call__(self, f: TestFunction) -> Pairing:
        return evaluate_scalar(self, f)

    def times(self, f: TestFunction) -> 'ScalarDistribution':
        """Module action: (f S)(g) = S(f g)."""
        self.covector.space.require_admissible(f)
        return ScalarDistribution(self.covector, self.W, (f,) + self.multipliers,
                                  f"f*{self.provenance}")


def evaluate(T: CovectorDistribution, W: TestVector) -> Pairing:
    """Pair T with a test vector field by quadrature."""
    values, majorant = T.integrand(W)
    return Pairing(integrate(T.grid, values), 1.0 + integrate(T.grid, majorant))


def evaluate_scalar(S: ScalarDistribution, f: TestFunction) -> Pairing:
    S.covector.space.require_admissible(f)
    h = f
    for m in S.multipliers:
        h = m * h
    return evaluate(S.covector, S.W.scaled(h))


# Distributional objects

def distr_cov_deriv(X: FieldLike, Y: FieldLike, space: ChartSpace,
                    grid: QuadratureGrid) -> CovectorDistribution:
    """W -> int -<nabla_X W, Y> - <Y, W> div_m X dm."""
    _check_grid(space, grid)
    Xs, Ys = _samples(X, grid), _samples(Y, grid)
    if Xs.dcomp is None and Xs.div is None:
        raise DivergenceError("first operand carries no divergence data")
    return CovectorDistribution(space, grid, ((1.0, (), _CovDerivTerm(Xs, Ys)),), 'cov_deriv')


def classical_pairing(V: VectorSample, space: ChartSpace,
                      grid: QuadratureGrid) -> CovectorDistribution:
    """W -> int <V, W> dm for a sampled classical field V."""
    _check_grid(space, grid)
    return CovectorDistribution(space, grid, ((1.0, (), _InnerTerm(_samples(V, grid))),),
                                'classical')


def distr_lie(X: FieldLike, Y: FieldLike, space: ChartSpace,
              grid: QuadratureGrid) -> CovectorDistribution:
    T = distr_cov_deriv(X, Y, space, grid) - distr_cov_deriv(Y, X, space, grid)
    return CovectorDistribution(space, grid, T.components, 'lie')


def cov_deriv_field(X: TestVector, Y: TestVector, grid: QuadratureGrid) -> VectorSample:
    """Classical nabla_X Y sampled on the grid (components only)."""
    Xs, Ys = _samples(X, grid), _samples(Y, grid)
    return VectorSample(cov_deriv_pointwise(Xs, Ys, grid.metric))


def bracket_field(X: TestVector, Y: TestVector, grid: QuadratureGrid) -> VectorSample:
    """Classical [X,Y] with first derivatives, hence with a divergence."""
    return lie_bracket_pointwise(_samples(X, grid), _samples(Y, grid), grid.metric)


def distr_lie_of_bracket(X: TestVector, Y: TestVector, Z: FieldLike, space: ChartSpace,
                         grid: QuadratureGrid) -> CovectorDistribution:
    """Distributional bracket of the sampled field [X,Y] with Z."""
    return distr_lie(bracket_field(X, Y, grid), Z, space, grid)


def lief_formula(X: TestVector, Y: TestVector, f: TestFunction, g: TestFunction,
                 grid: QuadratureGrid) -> Pairing:
    """int -X(g)Y(f) - g Y(f) div X + Y(g)X(f) + g X(f) div Y dm."""
    space = grid.space
    space.require_admissible(f)
    space.require_admissible(g)
    m = grid.metric
    Xs, Ys = _samples(X, grid), _samples(Y, grid)
    F, G = grid.function_jet(f, 1), grid.function_jet(g, 1)
    Xf, Yf = directional(Xs, F), directional(Ys, F)
    Xg, Yg = directional(Xs, G), directional(Ys, G)
    terms = [
        -(Xg * Yf),
        Yg * Xf,
        -(G.value * Yf * Xs.divergence(m)),
        G.value * Xf * Ys.divergence(m),
    ]
    values = (terms[0] + terms[1]) + (terms[2] + terms[3])
    majorant = sum(np.abs(t) for t in terms)
    return Pairing(integrate(grid, values), 1.0 + integrate(grid, majorant))


def bracket_lief_formula(X: TestVector, Y: TestVector, Z: TestVector,
                         f: TestFunction, g: TestFunction, grid: QuadratureGrid) -> Pairing:
    """
    Expanded pairing of [[X,Y],Z] with g grad f:

        int -Z(f)(XY(g) - YX(g)) - div X (Y(g)Z(f) + g YZ(f))
            + div Y (X(g)Z(f) + g XZ(f)) + Z(g)(XY(f) - YX(f))
            + g div Z (XY(f) - YX(f)) dm
    """
    space = grid.space
    space.require_admissible(f)
    space.require_admissible(g)
    m = grid.metric
    Xs, Ys, Zs = (_samples(V, grid) for V in (X, Y, Z))
    F, G = grid.function_jet(f, 2), grid.function_jet(g, 2)
    g0 = G.value
    Zf, Zg = directional(Zs, F), directional(Zs, G)
    brg = second_directional(Xs, Ys, G) - second_directional(Ys, Xs, G)
    brf = second_directional(Xs, Ys, F) - second_directional(Ys, Xs, F)
    terms = [
        -(Zf * brg),
        -(Xs.divergence(m) * (directional(Ys, G) * Zf + g0 * second_directional(Ys, Zs, F))),
        Ys.divergence(m) * (directional(Xs, G) * Zf + g0 * second_directional(Xs, Zs, F)),
        Zg * brf,
        g0 * Zs.divergence(m) * brf,
    ]
    values = sum(terms)
    majorant = sum(np.abs(t) for t in terms)
    return Pairing(integrate(grid, values), 1.0 + integrate(grid, majorant))


@dataclass(frozen=True)
class BracketDivergence:
    """Both routes to div_m(h[X,Y]) at the grid nodes."""
    lhs: np.ndarray
    rhs: np.ndarray
    discrepancy: float
    scale: float


def bracket_divergence(h: TestFunction, X: TestVector, Y: TestVector,
                       grid: QuadratureGrid) -> BracketDivergence:
    """
    div_m(h[X,Y]) directly (h div[X,Y] + [X,Y](h)) and through
    div_m(X div_m(hY) - Y div_m(hX)). The identity is pointwise, so h only
    has to be smooth on the nodes (h = 1 is allowed on bounded charts).
    """
    m = grid.metric
    Xs, Ys = _samples(X, grid), _samples(Y, grid)
    H = grid.function_jet(h, 2)

    br = lie_bracket_pointwise(Xs, Ys, m)
    direct = [H.value * divergence_m(br, m), directional(br, H)]
    lhs = direct[0] + direct[1]

    hY, hX = scale_sample(H, Ys), scale_sample(H, Xs)
    a, b = divergence_m(hY, m), divergence_m(hX, m)
    lemma = [
        a * Xs.divergence(m),
        np.einsum('...i,...i->...', Xs.comp, d_divergence_m(hY, m)),
        b * Ys.divergence(m),
        np.einsum('...i,...i->...', Ys.comp, d_divergence_m(hX, m)),
    ]
    rhs = (lemma[0] + lemma[1]) - (lemma[2] + lemma[3])

    majorant = sum(np.abs(t) for t in direct + lemma)
    return BracketDivergence(
        lhs=lhs,
        rhs=rhs,
        discrepancy=float(np.max(np.abs(lhs - rhs))),
        scale=1.0 + float(np.max(majorant)),
    )


def curvature_op(X: TestVector, Y: TestVector, Z: TestVector, space: ChartSpace,
                 grid: QuadratureGrid) -> CovectorDistribution:
    """R(X,Y)Z = D_X(nabla_Y Z) - D_Y(nabla_X Z) - D_[X,Y] Z."""
    _check_grid(space, grid)
    m = grid.metric
    Xs, Ys, Zs = (_samples(V, grid) for V in (X, Y, Z))
    nabla_yz = VectorSample(cov_deriv_pointwise(Ys, Zs, m))
    nabla_xz = VectorSample(cov_deriv_pointwise(Xs, Zs, m))
    br = lie_bracket_pointwise(Xs, Ys, m)
    return CovectorDistribution(space, grid, (
        (1.0, (), _CovDerivTerm(Xs, nabla_yz)),
        (-1.0, (), _CovDerivTerm(Ys, nabla_xz)),
        (-1.0, (), _CovDerivTerm(br, Zs)),
    ), 'curvature')


def curvature_scalar(X: TestVector, Y: TestVector, Z: TestVector, W: TestVector,
                     space: ChartSpace, grid: QuadratureGrid) -> ScalarDistribution:
    """R(X,Y,Z,W)(f) = (R(X,Y)Z)(f W)."""
    space.require_admissible(W)
    return ScalarDistribution(curvature_op(X, Y, Z, space, grid), W, (), 'curvature_scalar')


# Classical comparison pairings

def classical_curvature_pairing(X: TestVector, Y: TestVector, Z: TestVector,
                                W: TestVector, f: TestFunction,
                                grid: QuadratureGrid) -> Pairing:
    """int f <R(X,Y)Z, W> dm with the Riemann tensor of the chart metric."""
    grid.space.require_admissible(f)
    Xs, Ys, Zs, Ws = (_samples(V, grid) for V in (X, Y, Z, W))
    values = grid.function_jet(f, 0).value * curvature_pairing(
        grid.riemann, Xs.comp, Ys.comp, Zs.comp, Ws.comp)
    return Pairing(integrate(grid, values), 1.0 + integrate(grid, np.abs(values)))


def wedge_norm_sq(X: Union[VectorSample, np.ndarray], Y: Union[VectorSample, np.ndarray],
                  m: MetricAtPoint) -> np.ndarray:
    """|X|^2 |Y|^2 - <X,Y>^2, clamped at zero."""
    x = X.comp if isinstance(X, VectorSample) else np.asarray(X, dtype=float)
    y = Y.comp if isinstance(Y, VectorSample) else np.asarray(Y, dtype=float)
    val = norm_sq(m, x) * norm_sq(m, y) - inner(m, x, y) ** 2
    return np.maximum(val, 0.0)


@dataclass(frozen=True)
class SectionalProbe:
    margin: float
    curvature: float      # R(X,Y,Y,X)(f)
    area: float           # int f |X^Y|^2 dm
    scale: float

    @property
    def ratio(self) -> float:
        """Probe of the sectional curvature: R(X,Y,Y,X)(f) / int f |X^Y|^2 dm."""
        return self.curvature / self.area if self.area > 0.0 else float('nan')


def sectional_probe(X: TestVector, Y: TestVector, f: TestFunction, k: float,
                    space: ChartSpace, grid: QuadratureGrid) -> SectionalProbe:
    space.require_admissible(f)
    fv = grid.function_jet(f, 0).value
    if np.any(fv < 0.0):
        node = grid.nodes[int(np.argmax(fv < 0.0))]
        coords = ", ".join(f"{c:.6g}" for c in node)
        raise NegativeProbeError(f"probe function '{f}' is negative at node ({coords})")
    curvature = curvature_scalar(X, Y, Y, X, space, grid)(f)
    wedge = wedge_norm_sq(_samples(X, grid), _samples(Y, grid), grid.metric)
    area = integrate(grid, fv * wedge)
    margin = float(curvature) - k * area
    return SectionalProbe(margin, float(curvature), area,
                          curvature.scale + abs(k) * area)


def sectional_margin(X: TestVector, Y: TestVector, f: TestFunction, k: float,
                     space: ChartSpace, grid: QuadratureGrid) -> Pairing:
    """R(X,Y,Y,X)(f) - k int f |X^Y|^2 dm; nonnegative means the lower bound holds here."""
    probe = sectional_probe(X, Y, f, k, space, grid)
    return Pairing(probe.margin, probe.scale)


def linear_combination(pairs: List[Tuple[float, TestVector]]) -> TestVector:
    """a1 W1 + a2 W2 + ... as a single test vector (constants scale the f_i)."""
    atoms = []
    for a, W in pairs:
        for f, g in W.atoms:
            const = TestFunction(ExprAST(Const(float(a)), f.expr.dim, repr(float(a))))
            atoms.append((const * f, g))
    return TestVector(tuple(atoms))
