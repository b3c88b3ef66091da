#!/usr/bin/env python3
"""
Identity battery over randomized test fields.

Every check takes its fields from ``draw_field`` (shared by all checks for
a given draw index), evaluates both sides of one identity on the quadrature grid and keeps the draw with the worst
residual/scale ratio. Results are ``CheckReport`` records; a check that
raises is reported with ``error`` set and the battery continues.
"""

import itertools
import logging
import math
import time
import zlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import (
    CHECKS,
    DEFAULT_DRAWS,
    DEFAULT_MAX_ATOMS,
    FAMILY_TOLERANCES,
    IDENTITY_CHECKS,
    MIN_ORDER,
    PERIODIC_RUNG_TOLERANCE,
    SATURATION_FLOOR,
    WITNESS_GAP,
    WITNESS_MIN_AREA,
    get_check_config,
    resolve_tolerance,
)
from .distr import (
    bracket_divergence,
    bracket_field,
    bracket_lief_formula,
    classical_curvature_pairing,
    classical_pairing,
    combined_scale,
    cov_deriv_field,
    curvature_op,
    curvature_scalar,
    distr_cov_deriv,
    distr_lie,
    distr_lie_of_bracket,
    lief_formula,
    linear_combination,
    sectional_probe,
    ScalarDistribution,
)
from .errors import BudgetError, ConvergenceSetupError, CurvatureError
from .quadrature import QuadratureGrid, build_grid
from .spaces import ChartSpace, TestFunction, TestVector

logger = logging.getLogger(__name__)

Field = Union[TestVector, TestFunction]
Ladder = List[Tuple[Tuple[int, ...], float]]

VECTOR_ROLES = ('X', 'Y', 'Z', 'W', 'V')
FUNCTION_ROLES = ('f', 'g', 'h')


@dataclass(frozen=True)
class FieldBudget:
    """How random test fields are drawn."""
    atoms: int = 2
    degree: int = 2
    coef_range: float = 2.0
    seed: int = 1
    family: Optional[str] = None
    draws: int = DEFAULT_DRAWS

    def __post_init__(self):
        if not 1 <= self.atoms <= 4:
            raise BudgetError(f"budget.atoms must be in 1..4, got {self.atoms}")
        if not 0 <= self.degree <= 3:
            raise BudgetError(f"budget.degree must be in 0..3, got {self.degree}")
        if not 0.0 < self.coef_range <= 2.0:
            raise BudgetError(f"budget.range must be in (0, 2], got {self.coef_range}")
        if self.seed < 0:
            raise BudgetError(f"budget.seed must be >= 0, got {self.seed}")
        if self.draws < 1:
            raise BudgetError(f"budget.draws must be >= 1, got {self.draws}")
        if self.family is not None and self.family not in FAMILY_TOLERANCES:
            supported = "\n".join(f"  - {name}" for name in FAMILY_TOLERANCES)
            raise BudgetError(
                f"Field family '{self.family}' is not supported.\n\n"
                f"Supported families:\n{supported}"
            )

    def family_for(self, space: ChartSpace) -> str:
        """The field family used on ``space``; raises BudgetError on a mismatch."""
        family = self.family or space.family
        if family == 'trig' and not space.all_periodic:
            raise BudgetError(
                f"trig family needs every axis periodic; '{space.name}' has bounded axes"
            )
        if family == 'bump' and (space.all_periodic or not space.bump_factor):
            raise BudgetError(
                f"bump family needs a bounded axis and a bump factor; '{space.name}' has none"
            )
        return family


@dataclass
class CheckReport:
    check_id: str
    backend: str
    residual: float
    scale: float
    tolerance: float
    passed: bool
    grid: str = ''
    ladder: Ladder = field(default_factory=list)
    order: Optional[float] = None
    seed: int = 1
    wall_time: float = 0.0
    note: str = ''
    details: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def ratio(self) -> float:
        return self.residual / self.scale if self.scale else math.inf

    def to_dict(self) -> Dict[str, Any]:
        return {
            'check_id': self.check_id,
            'backend': self.backend,
            'residual': self.residual,
            'scale': self.scale,
            'tolerance': self.tolerance,
            'passed': self.passed,
            'grid': self.grid,
            'ladder': [{'resolution': list(res), 'residual': r} for res, r in self.ladder],
            'order': self.order,
            'seed': self.seed,
            'wall_time': self.wall_time,
            'note': self.note,
            'details': dict(self.details),
            'error': self.error,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'CheckReport':
        values = dict(data)
        values['ladder'] = [(tuple(int(n) for n in rung['resolution']), float(rung['residual']))
                            for rung in values.get('ladder', [])]
        return cls(**values)


def _finish(check_id: str, space: ChartSpace, grid_label: str, residual: float,
            scale: float, tolerance: float, seed: int, started: float,
            gate: bool = True, **extra) -> CheckReport:
    return CheckReport(
        check_id=check_id,
        backend=space.name,
        residual=float(residual),
        scale=float(scale),
        tolerance=float(tolerance),
        passed=bool(residual <= tolerance * scale and gate),
        grid=grid_label,
        seed=seed,
        wall_time=time.perf_counter() - started,
        **extra,
    )


def _error_report(check_id: str, space: ChartSpace, grid_label: str, tolerance: float,
                  seed: int, started: float, exc: Exception) -> CheckReport:
    logger.debug("check %s on %s failed: %s", check_id, space.name, exc)
    return _finish(check_id, space, grid_label, math.inf, 1.0, tolerance, seed, started,
                   error=f"{type(exc).__name__}: {exc}")


# Random fields

def _trig_expr(space: ChartSpace, budget: FieldBudget, rng: np.random.Generator) -> str:
    omegas = [2.0 * math.pi / space.period(axis) for axis in range(space.dim)]
    terms = [f"({float(rng.uniform(-budget.coef_range, budget.coef_range))!r})"]
    for _ in range(budget.degree + 2):
        freqs = rng.integers(0, budget.degree + 1, size=space.dim)
        kinds = rng.integers(0, 2, size=space.dim)
        coef = float(rng.uniform(-budget.coef_range, budget.coef_range))
        factors = [f"({coef!r})"]
        for axis, (n, kind) in enumerate(zip(freqs, kinds)):
            if n == 0:
                continue
            func = 'sin' if kind else 'cos'
            factors.append(f"{func}({float(n) * omegas[axis]!r}*{space.coords[axis]})")
        terms.append("*".join(factors))
    return " + ".join(terms)


def _bump_expr(space: ChartSpace, budget: FieldBudget, rng: np.random.Generator) -> str:
    monomials = list(space.monomials) or list(space.coords)
    terms = [f"({float(rng.uniform(-budget.coef_range, budget.coef_range))!r})"]
    for deg in range(1, budget.degree + 1):
        for combo in itertools.combinations_with_replacement(monomials, deg):
            coef = float(rng.uniform(-budget.coef_range, budget.coef_range))
            terms.append("*".join([f"({coef!r})"] + [f"({m})" for m in combo]))
    return f"({space.bump_factor})*({' + '.join(terms)})"


def _random_function(space: ChartSpace, family: str, budget: FieldBudget,
                     rng: np.random.Generator) -> TestFunction:
    text = _trig_expr(space, budget, rng) if family == 'trig' else _bump_expr(space, budget, rng)
    return space.function(text)


def random_fields(space: ChartSpace, budget: FieldBudget, count: int, kind: str = 'vector',
                  rng: Optional[np.random.Generator] = None,
                  max_atoms: int = DEFAULT_MAX_ATOMS) -> List[Field]:
    """
    Draw ``count`` admissible fields.

    Args:
        kind: 'vector' (sum of ``budget.atoms`` atoms f_i grad g_i),
            'function', or 'probe' (h^2, nonnegative)
        rng: generator to draw from; seeded from ``budget.seed`` when omitted
    """
    family = budget.family_for(space)
    rng = rng if rng is not None else np.random.default_rng(budget.seed)
    out: List[Field] = []
    for _ in range(count):
        if kind == 'vector':
            pairs = [(_random_function(space, family, budget, rng),
                      _random_function(space, family, budget, rng))
                     for _ in range(budget.atoms)]
            obj: Field = space.vector(pairs, max_atoms)
        elif kind == 'function':
            obj = _random_function(space, family, budget, rng)
        elif kind == 'probe':
            h = _random_function(space, family, budget, rng)
            obj = h * h
        else:
            raise ValueError(f"unknown field kind '{kind}'")
        space.require_admissible(obj)
        out.append(obj)
    return out


@lru_cache(maxsize=1024)
def draw_field(space: ChartSpace, budget: FieldBudget, draw: int, role: str,
               kind: str = 'vector', max_atoms: int = DEFAULT_MAX_ATOMS) -> Field:
    """
    The random field playing ``role`` in draw ``draw``.

    Seeded from (budget.seed, draw, kind, role) only, so every check of a
    battery and every rung of a ladder sees the same admissible object, and
    its grid samples are computed once.
    """
    tag = zlib.crc32(f"{kind}:{role}".encode('utf-8'))
    rng = np.random.default_rng([int(budget.seed), int(draw), tag])
    return random_fields(space, budget, 1, kind, rng, max_atoms)[0]


@dataclass
class CheckContext:
    """Everything one check job needs; ``fields`` replace random draws in draw 0."""
    space: ChartSpace
    grid: QuadratureGrid
    budget: FieldBudget
    fields: Mapping[str, Field] = field(default_factory=dict)
    index: int = 0
    extras: Dict[str, Any] = field(default_factory=dict)

    def _draw(self, name: str, kind: str) -> Field:
        if self.index == 0 and name in self.fields:
            return self.fields[name]
        return draw_field(self.space, self.budget, self.index, name, kind)

    def vector(self, name: str) -> TestVector:
        return self._draw(name, 'vector')

    def function(self, name: str) -> TestFunction:
        return self._draw(name, 'function')

    def probe(self, name: str) -> TestFunction:
        return self._draw(name, 'probe')


# Identity checks. Each returns (residual, scale) pairs for one draw.

Sample = Tuple[float, float]


def _diff(a: float, b: float) -> Sample:
    return abs(float(a) - float(b)), combined_scale(a, b)


def _check_conscov(ctx: CheckContext) -> List[Sample]:
    X, Y, W = ctx.vector('X'), ctx.vector('Y'), ctx.vector('W')
    lhs = distr_cov_deriv(X, Y, ctx.space, ctx.grid)(W)
    rhs = classical_pairing(cov_deriv_field(X, Y, ctx.grid), ctx.space, ctx.grid)(W)
    return [_diff(lhs, rhs)]


def _check_divle(ctx: CheckContext) -> List[Sample]:
    X, Y, h = ctx.vector('X'), ctx.vector('Y'), ctx.function('h')
    out = []
    for weight in (ctx.space.function('1'), h):
        bd = bracket_divergence(weight, X, Y, ctx.grid)
        out.append((bd.discrepancy, bd.scale))
    return out


def _check_lief(ctx: CheckContext) -> List[Sample]:
    X, Y = ctx.vector('X'), ctx.vector('Y')
    f, g = ctx.function('f'), ctx.function('g')
    W = TestVector(((g, f),))
    lhs = distr_lie(X, Y, ctx.space, ctx.grid)(W)
    formula = lief_formula(X, Y, f, g, ctx.grid)
    classical = classical_pairing(bracket_field(X, Y, ctx.grid), ctx.space, ctx.grid)(W)
    return [_diff(lhs, formula), _diff(lhs, classical)]


def _check_jacobi(ctx: CheckContext) -> List[Sample]:
    X, Y, Z = ctx.vector('X'), ctx.vector('Y'), ctx.vector('Z')
    f, g = ctx.function('f'), ctx.function('g')
    W = TestVector(((g, f),))
    space, grid = ctx.space, ctx.grid
    xy = distr_lie_of_bracket(X, Y, Z, space, grid)
    cyclic = (xy
              + distr_lie_of_bracket(Y, Z, X, space, grid)
              + distr_lie_of_bracket(Z, X, Y, space, grid))
    total = cyclic(W)
    expanded = bracket_lief_formula(X, Y, Z, f, g, grid)
    return [(abs(float(total)), total.scale), _diff(xy(W), expanded)]


def _check_r1a(ctx: CheckContext) -> List[Sample]:
    X, Y, Z, W = (ctx.vector(n) for n in 'XYZW')
    a = curvature_op(X, Y, Z, ctx.space, ctx.grid)(W)
    b = curvature_op(Y, X, Z, ctx.space, ctx.grid)(W)
    return [(abs(float(a) + float(b)), combined_scale(a, b))]


def _check_zw(ctx: CheckContext) -> List[Sample]:
    X, Y, Z, W = (ctx.vector(n) for n in 'XYZW')
    f = ctx.function('f')
    a = curvature_scalar(X, Y, Z, W, ctx.space, ctx.grid)(f)
    b = curvature_scalar(X, Y, W, Z, ctx.space, ctx.grid)(f)
    return [(abs(float(a) + float(b)), combined_scale(a, b))]


def _check_r1b(ctx: CheckContext) -> List[Sample]:
    X, Y, Z, W = (ctx.vector(n) for n in 'XYZW')
    f = ctx.function('f')
    a = curvature_scalar(X, Y, Z, W, ctx.space, ctx.grid)(f)
    b = curvature_scalar(Z, W, X, Y, ctx.space, ctx.grid)(f)
    return [_diff(a, b)]


def _check_bianchi(ctx: CheckContext) -> List[Sample]:
    X, Y, Z, W = (ctx.vector(n) for n in 'XYZW')
    space, grid = ctx.space, ctx.grid
    total = (curvature_op(X, Y, Z, space, grid)
             + curvature_op(Y, Z, X, space, grid)
             + curvature_op(Z, X, Y, space, grid))(W)
    return [(abs(float(total)), total.scale)]


def _check_tensorial(ctx: CheckContext) -> List[Sample]:
    X, Y, Z, W = (ctx.vector(n) for n in 'XYZW')
    V = ctx.vector('V')
    f, h = ctx.function('f'), ctx.function('h')
    space, grid = ctx.space, ctx.grid

    reference = curvature_scalar(X, Y, Z, W, space, grid).times(f)(h)
    inserted = [
        curvature_scalar(X.scaled(f), Y, Z, W, space, grid)(h),
        curvature_scalar(X, Y.scaled(f), Z, W, space, grid)(h),
        curvature_scalar(X, Y, Z.scaled(f), W, space, grid)(h),
        curvature_scalar(X, Y, Z, W.scaled(f), space, grid)(h),
    ]
    out = [_diff(value, reference) for value in inserted]

    T = curvature_op(X, Y, Z, space, grid)
    combined = T(linear_combination([(2.0, W), (-0.5, V)]))
    tw, tv = T(W), T(V)
    out.append((abs(float(combined) - (2.0 * float(tw) - 0.5 * float(tv))),
                combined_scale(combined, tw, tv)))
    return out


def _check_module(ctx: CheckContext) -> List[Sample]:
    X, Y, W = ctx.vector('X'), ctx.vector('Y'), ctx.vector('W')
    f, g, h = ctx.function('f'), ctx.function('g'), ctx.function('h')
    space, grid = ctx.space, ctx.grid
    T = distr_cov_deriv(X, Y, space, grid)
    out = [_diff(T.times(g).times(f)(W), T.times(f * g)(W))]

    S = ScalarDistribution(T, W, (), 'cov_deriv_scalar')
    out.append(_diff(S.times(g).times(f)(h), S.times(f * g)(h)))

    U = distr_cov_deriv(Y, X, space, grid)
    together = (T + 2.0 * U)(W)
    t, u = T(W), U(W)
    out.append((abs(float(together) - (float(t) + 2.0 * float(u))),
                combined_scale(together, t, u)))
    return out


IDENTITY_RUNNERS: Dict[str, Callable[[CheckContext], List[Sample]]] = {
    'conscov': _check_conscov,
    'divle': _check_divle,
    'lief': _check_lief,
    'jacobi': _check_jacobi,
    'r1a': _check_r1a,
    'zw': _check_zw,
    'r1b': _check_r1b,
    'bianchi': _check_bianchi,
    'tensorial': _check_tensorial,
    'module': _check_module,
}


def _check_oracle(ctx: CheckContext) -> List[Sample]:
    X, Y, Z, W = (ctx.vector(n) for n in 'XYZW')
    f = ctx.function('f')
    distributional = curvature_scalar(X, Y, Z, W, ctx.space, ctx.grid)(f)
    classical = classical_curvature_pairing(X, Y, Z, W, f, ctx.grid)
    largest = ctx.extras.get('max_abs_distributional', 0.0)
    ctx.extras['max_abs_distributional'] = max(largest, abs(float(distributional)))
    return [_diff(distributional, classical)]


def _worse(r: float, s: float, residual: float, scale: float) -> bool:
    """Ratio order; equal ratios (all zero included) keep the larger scale."""
    if not math.isfinite(r):
        return True
    if r / s != residual / scale:
        return r / s > residual / scale
    return s > scale


def _worst_over_draws(ctx: CheckContext, runner: Callable[[CheckContext], List[Sample]],
                      draws: int) -> Tuple[float, float, Dict[str, Any]]:
    residual, scale, worst = 0.0, 1.0, 0
    for index in range(draws):
        ctx.index = index
        for r, s in runner(ctx):
            if _worse(r, s, residual, scale):
                residual, scale, worst = r, s, index
    return residual, scale, {'draws': draws, 'worst_draw': worst}


def _resolve_ids(which: Sequence[str]) -> List[str]:
    ids = list(which)
    for check_id in ids:
        get_check_config(check_id)
    return ids


def run_check(check_id: str, space: ChartSpace, grid: QuadratureGrid, budget: FieldBudget,
              tolerance: Optional[float] = None, fields: Optional[Mapping[str, Field]] = None,
              k: Optional[float] = None, target: Optional[str] = None,
              resolutions: Optional[Sequence[int]] = None) -> CheckReport:
    """Run one check id of any kind and report it; check errors become error reports."""
    kind = get_check_config(check_id)['kind']
    if kind == 'convergence':
        return convergence_study(space, target or 'conscov',
                                 resolutions or _default_ladder(space), budget,
                                 fields=fields, rules=grid.rules, tolerance=tolerance)
    if kind == 'conjecture':
        kappa = space.curvature if space.curvature is not None else 0.0
        return conjecture_probe(space, grid, kappa if k is None else k, budget.draws,
                                budget=budget, fields=fields, tolerance=tolerance)
    if kind == 'oracle':
        return oracle_compare(space, grid, budget, budget.draws, fields=fields,
                              tolerance=tolerance)

    started = time.perf_counter()
    tol = tolerance
    try:
        family = budget.family_for(space)
        tol = resolve_tolerance(check_id, family) if tolerance is None else tolerance
        ctx = CheckContext(space, grid, budget, fields or {})
        residual, scale, details = _worst_over_draws(ctx, IDENTITY_RUNNERS[check_id],
                                                     budget.draws)
    except CurvatureError as exc:
        return _error_report(check_id, space, grid.label(), tol if tol is not None else 0.0,
                             budget.seed, started, exc)
    return _finish(check_id, space, grid.label(), residual, scale, tol, budget.seed, started,
                   details=details)


def run_identity_checks(space: ChartSpace, grid: QuadratureGrid, budget: FieldBudget,
                        which: Optional[Sequence[str]] = None,
                        fields: Optional[Mapping[str, Field]] = None) -> List[CheckReport]:
    """
    Run identity checks in the given order (all of them by default).

    Raises UnknownCheckError before any work when an id is unknown.
    """
    ids = _resolve_ids(IDENTITY_CHECKS if which is None else which)
    return [run_check(check_id, space, grid, budget, fields=fields) for check_id in ids]


def oracle_compare(space: ChartSpace, grid: QuadratureGrid, budget: FieldBudget,
                   count: Optional[int] = None, fields: Optional[Mapping[str, Field]] = None,
                   tolerance: Optional[float] = None) -> CheckReport:
    """Distributional curvature against the classical Riemann tensor of the chart metric."""
    started = time.perf_counter()
    tol = tolerance
    try:
        tol = resolve_tolerance('oracle', budget.family_for(space)) if tol is None else tol
        ctx = CheckContext(space, grid, budget, fields or {})
        residual, scale, details = _worst_over_draws(ctx, _check_oracle, count or budget.draws)
        details.update(ctx.extras)
    except CurvatureError as exc:
        return _error_report('oracle', space, grid.label(), tol if tol is not None else 0.0,
                             budget.seed, started, exc)
    return _finish('oracle', space, grid.label(), residual, scale, tol, budget.seed, started,
                   details=details)


def _default_ladder(space: ChartSpace) -> List[int]:
    return [16, 32, 64] if space.all_periodic else [32, 48, 64, 96]


def _rung_residual(check_id: str, space: ChartSpace, grid: QuadratureGrid,
                   budget: FieldBudget, fields: Optional[Mapping[str, Field]]) -> Sample:
    ctx = CheckContext(space, grid, budget, fields or {})
    runner = _check_oracle if check_id == 'oracle' else IDENTITY_RUNNERS[check_id]
    residual, scale, _ = _worst_over_draws(ctx, runner, budget.draws)
    return residual, scale


def convergence_study(space: ChartSpace, check_id: str, resolutions: Sequence[int],
                      budget: FieldBudget, fields: Optional[Mapping[str, Field]] = None,
                      rules: Optional[Sequence[str]] = None,
                      tolerance: Optional[float] = None) -> CheckReport:
    """
    Rerun one identity (or the oracle) on a ladder of grids with the same fields.

    Bounded charts get a least-squares order estimate from log(residual)
    against log(h) on the first non-periodic axis; all-periodic charts must
    stay below PERIODIC_RUNG_TOLERANCE at every rung. A fitted order below
    MIN_ORDER fails the study even when the finest rung is within tolerance.
    Rungs below SATURATION_FLOOR * scale are left out of the fit; if none
    remain the study is reported as saturated and no order is required.
    """
    rungs = [int(n) for n in resolutions]
    if len(rungs) < 3:
        raise ConvergenceSetupError(f"convergence needs at least 3 resolutions, got {len(rungs)}")
    if any(b <= a for a, b in zip(rungs, rungs[1:])):
        raise ConvergenceSetupError(f"resolutions must be strictly increasing, got {rungs}")
    kind = get_check_config(check_id)['kind']
    if kind not in ('identity', 'oracle'):
        raise ConvergenceSetupError(f"'{check_id}' cannot be refined; pick an identity or 'oracle'")

    started = time.perf_counter()
    label = "->".join(str(n) for n in rungs)
    tol = tolerance
    try:
        family = budget.family_for(space)
        ladder: Ladder = []
        scales: List[float] = []
        for n in rungs:
            grid = build_grid(space, n, rules)
            r, s = _rung_residual(check_id, space, grid, budget, fields)
            ladder.append((grid.resolution, r))
            scales.append(s)
            logger.debug("convergence %s on %s: %s -> %.3e", check_id, space.name,
                         grid.label(), r)

        details: Dict[str, Any] = {'target': check_id}
        live = [(res, r) for (res, r), s in zip(ladder, scales) if r > SATURATION_FLOOR * s]
        order: Optional[float] = None
        if space.all_periodic:
            tol = PERIODIC_RUNG_TOLERANCE if tolerance is None else tolerance
            worst = max(range(len(ladder)), key=lambda i: ladder[i][1] / scales[i])
            residual, scale = ladder[worst][1], scales[worst]
            note = 'saturated' if not live else 'periodic'
        else:
            tol = resolve_tolerance(check_id, family) if tolerance is None else tolerance
            residual, scale = ladder[-1][1], scales[-1]
            axis = space.periodic.index(False)
            if len(live) < 2:
                note = 'saturated'
            else:
                h = np.array([space.period(axis) / res[axis] for res, _ in live])
                r = np.array([value for _, value in live])
                order = float(np.polyfit(np.log(h), np.log(r), 1)[0])
                note = '' if order >= MIN_ORDER else f"order below {MIN_ORDER:g}"
    except CurvatureError as exc:
        return _error_report('convergence', space, label,
                             tol if tol is not None else 0.0, budget.seed, started, exc)
    return _finish('convergence', space, label, residual, scale, tol, budget.seed, started,
                   gate=order is None or order >= MIN_ORDER,
                   ladder=ladder, order=order, note=note, details=details)


def conjecture_probe(space: ChartSpace, grid: QuadratureGrid, k: float, count: int,
                     budget: Optional[FieldBudget] = None,
                     fields: Optional[Mapping[str, Field]] = None,
                     tolerance: Optional[float] = None) -> CheckReport:
    """
    Probe R(X,Y,Y,X)(f) >= k int f|X^Y|^2 dm over random X, Y and f >= 0.

    For k at or below the known curvature every margin must stay above
    -tolerance * scale. Above it a witness is required: a draw with
    int f|X^Y|^2 dm >= WITNESS_MIN_AREA and margin / area <= -WITNESS_GAP.
    A finite probe can only refute the lower bound, so passing reports
    read "consistent with".
    """
    budget = budget or FieldBudget()
    started = time.perf_counter()
    tol = tolerance
    try:
        if space.curvature is None:
            raise CurvatureError(f"space '{space.name}' has no known constant curvature")
        kappa = float(space.curvature)
        family = budget.family_for(space)
        ctx = CheckContext(space, grid, budget, fields or {})
        details: Dict[str, Any] = {'k': float(k), 'curvature': kappa, 'draws': count}

        if k <= kappa:
            tol = resolve_tolerance('conjecture', family) if tol is None else tol
            residual, scale, worst_margin = 0.0, 1.0, math.inf
            for index in range(count):
                ctx.index = index
                probe = sectional_probe(ctx.vector('X'), ctx.vector('Y'), ctx.probe('f'),
                                        k, space, grid)
                worst_margin = min(worst_margin, probe.margin / probe.scale)
                r = max(0.0, -probe.margin)
                if _worse(r, probe.scale, residual, scale):
                    residual, scale = r, probe.scale
            details['min_normalized_margin'] = worst_margin
            note = f"consistent with curvature >= {k!r}" if residual <= tol * scale else \
                f"margin below -tolerance for k = {k!r}"
        else:
            tol = 0.0
            best: Optional[Dict[str, Any]] = None
            for index in range(count):
                ctx.index = index
                X, Y, f = ctx.vector('X'), ctx.vector('Y'), ctx.probe('f')
                probe = sectional_probe(X, Y, f, k, space, grid)
                if probe.area < WITNESS_MIN_AREA:
                    continue
                ratio = probe.margin / probe.area
                if best is None or ratio < best['margin_ratio']:
                    best = {'draw': index, 'margin': probe.margin, 'area': probe.area,
                            'margin_ratio': ratio, 'sectional_ratio': probe.ratio,
                            'X': str(X), 'Y': str(Y), 'f': str(f)}
            if best is None:
                residual, scale = math.inf, 1.0
                note = 'no draw with enough area for a witness'
            else:
                residual, scale = max(0.0, best['margin_ratio'] + WITNESS_GAP), 1.0
                details['witness'] = best
                note = (f"witness found: curvature >= {k!r} fails"
                        if residual == 0.0 else f"no witness for k = {k!r}")
    except CurvatureError as exc:
        return _error_report('conjecture', space, grid.label(),
                             tol if tol is not None else 0.0, budget.seed, started, exc)
    return _finish('conjecture', space, grid.label(), residual, scale, tol, budget.seed,
                   started, note=note, details=details)


def check_manifest() -> List[str]:
    """Stable check ids in registry order."""
    return list(CHECKS)
