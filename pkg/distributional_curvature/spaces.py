#!/usr/bin/env python3
"""
Weighted chart spaces and the test objects living on them.

A ``ChartSpace`` is a box in R^d (some axes periodic) with metric component
expressions g_ij and a positive weight w; its reference measure is
dm = w * sqrt(det g) dx. ``TestFunction`` wraps one expression and
``TestVector`` is a finite sum of atoms f_i * grad(g_i).
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import (
    ADMISSIBILITY_TOLERANCE,
    DEFAULT_MAX_ATOMS,
    MAX_DIM,
    get_backend_config,
)
from .errors import AdmissibilityError, MetricError
from .expr import ExprAST, faces_match, parse_expr, periodicity_check

logger = logging.getLogger(__name__)


def _number(value: Union[float, int, str]) -> float:
    """Box bounds may be written as expressions such as '2*pi'."""
    if isinstance(value, str):
        return float(parse_expr(value, 1).jet(np.zeros(1), 0).value)
    return float(value)


@dataclass(frozen=True)
class ChartSpace:
    name: str
    dim: int
    domain: Tuple[Tuple[float, float], ...]
    periodic: Tuple[bool, ...]
    metric: Tuple[Tuple[ExprAST, ...], ...]
    weight: ExprAST
    coords: Tuple[str, ...]
    curvature: Optional[float] = None
    family: str = 'bump'
    monomials: Tuple[str, ...] = ()
    bump_factor: Optional[str] = None
    resolution: Tuple[int, ...] = ()
    params: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        d = self.dim
        if not 1 <= d <= MAX_DIM:
            raise ValueError(f"dimension must be in 1..{MAX_DIM}, got {d}")
        if len(self.domain) != d or len(self.periodic) != d or len(self.coords) != d:
            raise ValueError("domain, periodic and coords must have one entry per axis")
        for axis, (a, b) in enumerate(self.domain):
            if not a < b:
                raise ValueError(f"axis {axis}: empty interval [{a}, {b}]")
        if len(self.metric) != d or any(len(row) != d for row in self.metric):
            raise MetricError(f"metric must be a {d}x{d} array of expressions")
        for i in range(d):
            for j in range(i + 1, d):
                if self.metric[i][j].root != self.metric[j][i].root:
                    raise MetricError(f"metric is not symmetric: g[{i}][{j}] != g[{j}][{i}]")
        for axis in range(d):
            if not self.periodic[axis]:
                continue
            for expr in self.metric_entries() + (self.weight,):
                if not faces_match(expr, self, axis, ADMISSIBILITY_TOLERANCE):
                    raise MetricError(
                        f"'{expr}' does not match across the faces of periodic axis {axis}"
                    )

    def metric_entries(self) -> Tuple[ExprAST, ...]:
        return tuple(self.metric[i][j] for i in range(self.dim) for j in range(i, self.dim))

    def period(self, axis: int) -> float:
        a, b = self.domain[axis]
        return b - a

    @property
    def all_periodic(self) -> bool:
        return all(self.periodic)

    def parse(self, text: str) -> ExprAST:
        return parse_expr(text, self.dim, dict(self.params), self.coords)

    def function(self, text: Union[str, ExprAST]) -> 'TestFunction':
        expr = text if isinstance(text, ExprAST) else self.parse(text)
        return TestFunction(expr)

    def vector(self, pairs: Sequence[Tuple[Union[str, 'TestFunction'], Union[str, 'TestFunction']]],
               max_atoms: int = DEFAULT_MAX_ATOMS) -> 'TestVector':
        """Build sum f_i grad(g_i) from (f_i, g_i) pairs."""
        if len(pairs) > max_atoms:
            raise AdmissibilityError(
                f"test vector has {len(pairs)} atoms, the maximum is {max_atoms}"
            )
        atoms = []
        for f, g in pairs:
            atoms.append((f if isinstance(f, TestFunction) else self.function(f),
                          g if isinstance(g, TestFunction) else self.function(g)))
        return TestVector(tuple(atoms))

    def require_admissible(self, obj: Union['TestFunction', 'TestVector'],
                           tol: float = ADMISSIBILITY_TOLERANCE) -> None:
        """Raise AdmissibilityError unless every constituent passes the boundary check."""
        functions = obj.functions() if isinstance(obj, TestVector) else (obj,)
        for fn in functions:
            if fn.expr.dim != self.dim:
                raise AdmissibilityError(
                    f"'{fn}' is over {fn.expr.dim} coordinates, space '{self.name}' has {self.dim}"
                )
            if not _admissible(self, fn.expr, tol):
                logger.debug("admissibility failed for %s on %s", fn, self.name)
                raise AdmissibilityError(
                    f"'{fn}' is not admissible on '{self.name}': it must match across "
                    f"periodic faces and vanish with its derivatives on the other faces"
                )


@lru_cache(maxsize=4096)
def _admissible(space: ChartSpace, expr: ExprAST, tol: float) -> bool:
    return periodicity_check(expr, space, tol)


@dataclass(frozen=True)
class TestFunction:
    __test__ = False

    expr: ExprAST

    def __mul__(self, other: 'TestFunction') -> 'TestFunction':
        return TestFunction(self.expr * other.expr)

    def __str__(self):
        return str(self.expr)


@dataclass(frozen=True)
class TestVector:
    """X = sum_i f_i grad(g_i), stored as the atom pairs (f_i, g_i)."""
    __test__ = False

    atoms: Tuple[Tuple[TestFunction, TestFunction], ...]

    def __post_init__(self):
        object.__setattr__(self, 'atoms', tuple(tuple(a) for a in self.atoms))
        if not self.atoms:
            raise ValueError("a test vector needs at least one atom")

    @property
    def dim(self) -> int:
        return self.atoms[0][0].expr.dim

    def scaled(self, f: TestFunction) -> 'TestVector':
        """The module action f * X: every f_i becomes f * f_i."""
        return TestVector(tuple((f * fi, gi) for fi, gi in self.atoms))

    def __add__(self, other: 'TestVector') -> 'TestVector':
        return TestVector(self.atoms + other.atoms)

    def functions(self) -> Iterator[TestFunction]:
        for f, g in self.atoms:
            yield f
            yield g

    def __str__(self):
        return " + ".join(f"({f})*grad({g})" for f, g in self.atoms)


def default_bump_factor(coords: Sequence[str], domain, periodic) -> Optional[str]:
    """Product of one-dimensional bumps vanishing at 90% of each bounded half-width."""
    factors = []
    for name, (a, b), per in zip(coords, domain, periodic):
        if per:
            continue
        mid, half = 0.5 * (a + b), 0.45 * (b - a)
        factors.append(f"bump((({name})-({mid!r}))^2/{half * half!r})")
    return "*".join(factors) if factors else None


def default_monomials(coords: Sequence[str], domain, periodic) -> Tuple[str, ...]:
    out = []
    for name, (a, b), per in zip(coords, domain, periodic):
        if per:
            k = 2.0 * math.pi / (b - a)
            out += [f"sin({k!r}*{name})", f"cos({k!r}*{name})"]
        else:
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            out.append(f"(({name})-({mid!r}))/{half!r}")
    return tuple(out)


def make_space(name: str, dim: int, domain, periodic, metric, weight: str = '1',
               coords: Optional[Sequence[str]] = None,
               params: Optional[Mapping[str, float]] = None,
               curvature: Optional[float] = None,
               family: Optional[str] = None,
               monomials: Optional[Sequence[str]] = None,
               bump_factor: Optional[str] = None,
               resolution: Optional[Sequence[int]] = None) -> ChartSpace:
    """Parse metric and weight strings into a validated ChartSpace."""
    coords = tuple(coords) if coords is not None else tuple(f"x{i}" for i in range(dim))
    params = dict(params or {})
    box = tuple((_number(a), _number(b)) for a, b in domain)
    periodic = tuple(bool(p) for p in periodic)
    parse = lambda text: parse_expr(str(text), dim, params, coords)  # noqa: E731
    metric_ast = tuple(tuple(parse(entry) for entry in row) for row in metric)
    if family is None:
        family = 'trig' if all(periodic) else 'bump'
    if bump_factor is None and family == 'bump':
        bump_factor = default_bump_factor(coords, box, periodic)
    if monomials is None:
        monomials = default_monomials(coords, box, periodic)
    return ChartSpace(
        name=name,
        dim=dim,
        domain=box,
        periodic=periodic,
        metric=metric_ast,
        weight=parse(weight),
        coords=coords,
        curvature=curvature,
        family=family,
        monomials=tuple(monomials),
        bump_factor=bump_factor,
        resolution=tuple(resolution or ()),
        params=tuple(sorted(params.items())),
    )


@lru_cache(maxsize=None)
def builtin_space(name: str) -> ChartSpace:
    """Expand a registered backend name into its ChartSpace."""
    cfg = get_backend_config(name)
    return make_space(
        name=name,
        dim=cfg['dim'],
        domain=cfg['domain'],
        periodic=cfg['periodic'],
        metric=cfg['metric'],
        weight=cfg['weight'],
        coords=cfg['coords'],
        curvature=cfg['curvature'],
        family=cfg['family'],
        monomials=cfg['monomials'],
        bump_factor=cfg['bump_factor'],
        resolution=cfg['resolution'],
    )
