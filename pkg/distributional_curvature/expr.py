#!/usr/bin/env python3
"""
Scalar expressions in chart coordinates.

Grammar::

    expr   :: term [ ('+' | '-') term ]*
    term   :: factor [ ('*' | '/') factor ]*
    factor :: base [ '^' factor ]            (right associative)
    base   :: number | ident '(' expr ')' | ident | '(' expr ')' | '-' factor

Identifiers are the coordinates ``x0..x{d-1}`` (plus optional per-space
aliases such as ``theta``), declared parameters, the constant ``pi`` and the
functions sin cos tan exp log sqrt tanh bump. Parameters are folded into
constants at parse time, so a parsed expression is immutable.
"""

import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pyparsing as pp

from . import jets
from .errors import (
    ArityError,
    ExprSyntaxError,
    JetDomainError,
    UnknownIdentifierError,
)
from .jets import Jet3

logger = logging.getLogger(__name__)

CONSTANTS = {'pi': math.pi}


@dataclass(frozen=True)
class _Rule:
    derivs: Callable[[np.ndarray], List[np.ndarray]]
    # points where the argument is outside the domain
    invalid: Optional[Callable[[np.ndarray, int], np.ndarray]] = None
    reason: str = ''


FUNCTIONS: Dict[str, _Rule] = {
    'sin': _Rule(jets.sin_derivs),
    'cos': _Rule(jets.cos_derivs),
    'tan': _Rule(jets.tan_derivs, lambda t, order: np.cos(t) == 0.0, 'tan pole'),
    'exp': _Rule(jets.exp_derivs),
    'log': _Rule(jets.log_derivs, lambda t, order: t <= 0.0,
                 'log of non-positive value'),
    'sqrt': _Rule(jets.sqrt_derivs,
                  lambda t, order: (t < 0.0) if order == 0 else (t <= 0.0),
                  'sqrt outside its domain'),
    'tanh': _Rule(jets.tanh_derivs),
    'bump': _Rule(jets.bump_derivs),
}


# Tree nodes

class Node:
    """Expression tree node; ``jet`` evaluates on points of shape (..., d)."""

    def jet(self, x: np.ndarray, order: int) -> Jet3:
        raise NotImplementedError

    def _domain_error(self, x: np.ndarray, bad: np.ndarray, reason: str) -> JetDomainError:
        bad = np.asarray(bad)
        if bad.ndim == 0:
            point = x
        else:
            point = x[tuple(np.argwhere(bad)[0])]
        return JetDomainError(reason, str(self), point)

    def _checked(self, x: np.ndarray, result: Jet3) -> Jet3:
        ok = result.is_finite()
        if not np.all(ok):
            raise self._domain_error(x, ~ok, 'non-finite result')
        return result


@dataclass(frozen=True)
class Const(Node):
    value: float

    def jet(self, x, order):
        return jets.constant(self.value, x, order)

    def __str__(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Var(Node):
    index: int
    name: str

    def jet(self, x, order):
        return jets.variable(x, self.index, order)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg(Node):
    operand: Node

    def jet(self, x, order):
        return jets.neg(self.operand.jet(x, order))

    def __str__(self):
        return f"(-{self.operand})"


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def jet(self, x, order):
        a = self.left.jet(x, order)
        b = self.right.jet(x, order)
        if self.op == '+':
            return jets.add(a, b)
        if self.op == '-':
            return jets.sub(a, b)
        if self.op == '*':
            return jets.mul(a, b)
        zero = b.value == 0.0
        if np.any(zero):
            raise self._domain_error(x, zero, 'division by zero')
        with np.errstate(all='ignore'):
            result = jets.div(a, b)
        return self._checked(x, result)

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


def _constant_value(e: Jet3) -> Optional[float]:
    """The common value of a jet with vanishing derivatives, else None."""
    first = e.value.flat[0]
    if np.all(e.value == first) and not any(np.any(d) for d in e.components()[1:]):
        return float(first)
    return None


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: Node

    def jet(self, x, order):
        b = self.base.jet(x, order)
        e = None if isinstance(self.exponent, Const) else self.exponent.jet(x, order)
        p = self.exponent.value if e is None else _constant_value(e)
        if p is not None:
            if float(p).is_integer():
                n = int(p)
                if n < 0 and np.any(b.value == 0.0):
                    raise self._domain_error(x, b.value == 0.0, 'zero to a negative power')
                with np.errstate(all='ignore'):
                    result = jets.int_power(b, n)
                return self._checked(x, result)
            bad = b.value <= 0.0 if (order > 0 or p < 0) else b.value < 0.0
            if np.any(bad):
                raise self._domain_error(x, bad, 'real power of non-positive base')
            with np.errstate(all='ignore'):
                result = jets.real_power(b, p)
            return self._checked(x, result)
        # b^e = exp(e log b)
        bad = b.value <= 0.0
        if np.any(bad):
            raise self._domain_error(x, bad, 'variable power of non-positive base')
        with np.errstate(all='ignore'):
            t = jets.mul(e, jets.compose(b, jets.log_derivs(b.value)))
            result = jets.compose(t, jets.exp_derivs(t.value))
        return self._checked(x, result)

    def __str__(self):
        return f"({self.base})^({self.exponent})"


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node

    def jet(self, x, order):
        u = self.arg.jet(x, order)
        rule = FUNCTIONS[self.func]
        if rule.invalid is not None:
            bad = rule.invalid(u.value, order)
            if np.any(bad):
                raise self._domain_error(x, bad, rule.reason)
        with np.errstate(all='ignore'):
            result = jets.compose(u, rule.derivs(u.value))
        return self._checked(x, result)

    def __str__(self):
        return f"{self.func}({self.arg})"


@dataclass(frozen=True)
class ExprAST:
    """A parsed scalar expression over ``dim`` chart coordinates."""
    root: Node
    dim: int
    source: str

    def jet(self, x, order: int = 3) -> Jet3:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(
                f"expression over {self.dim} coordinates evaluated at points "
                f"of dimension {x.shape[-1]}"
            )
        if not 0 <= order <= 3:
            raise ValueError(f"jet order must be in 0..3, got {order}")
        return self.root.jet(x, order)

    def __mul__(self, other: 'ExprAST') -> 'ExprAST':
        if other.dim != self.dim:
            raise ValueError("cannot multiply expressions of different dimension")
        return ExprAST(BinOp('*', self.root, other.root), self.dim,
                       f"({self.source})*({other.source})")

    def __str__(self):
        return self.source

    def __hash__(self):
        # equal expressions share their source text
        return hash((self.source, self.dim))


# Grammar

@dataclass(frozen=True)
class _Name(Node):
    name: str
    loc: int


@dataclass(frozen=True)
class _CallSite(Node):
    name: str
    args: Tuple[Node, ...]
    loc: int


def _fold(s, loc, toks):
    items = list(toks)
    node = items[0]
    for i in range(1, len(items), 2):
        node = BinOp(items[i], node, items[i + 1])
    return node


def _power(s, loc, toks):
    items = list(toks)
    if len(items) == 1:
        return items[0]
    return Pow(items[0], items[1])


def _build_grammar() -> pp.ParserElement:
    lpar, rpar = pp.Suppress('('), pp.Suppress(')')
    number = pp.Regex(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
    number.set_parse_action(lambda s, loc, t: Const(float(t[0])))
    ident = pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*")

    expr = pp.Forward()
    factor = pp.Forward()

    call = ident + lpar + pp.Group(pp.Optional(pp.DelimitedList(expr))) + rpar
    call.set_parse_action(lambda s, loc, t: _CallSite(t[0], tuple(t[1]), loc))
    name = ident.copy().set_parse_action(lambda s, loc, t: _Name(t[0], loc))
    negated = pp.Suppress('-') + factor
    negated.set_parse_action(lambda s, loc, t: Neg(t[0]))

    base = number | call | name | (lpar + expr + rpar) | negated
    factor <<= base + pp.Optional(pp.Suppress('^') + factor)
    factor.set_parse_action(_power)
    term = factor + pp.ZeroOrMore(pp.one_of('* /') + factor)
    term.set_parse_action(_fold)
    expr <<= term + pp.ZeroOrMore(pp.one_of('+ -') + term)
    expr.set_parse_action(_fold)
    return expr


_GRAMMAR = _build_grammar()
_GRAMMAR_LOCK = threading.Lock()


def _resolve(node: Node, names: Mapping[str, Node]) -> Node:
    if isinstance(node, _Name):
        if node.name in names:
            return names[node.name]
        if node.name in FUNCTIONS:
            raise ArityError(node.name, 1, 0, node.loc)
        raise UnknownIdentifierError(node.name, node.loc)
    if isinstance(node, _CallSite):
        if node.name not in FUNCTIONS:
            raise UnknownIdentifierError(node.name, node.loc)
        if len(node.args) != 1:
            raise ArityError(node.name, 1, len(node.args), node.loc)
        return Call(node.name, _resolve(node.args[0], names))
    if isinstance(node, Neg):
        inner = _resolve(node.operand, names)
        if isinstance(inner, Const):
            return Const(-inner.value)
        return Neg(inner)
    if isinstance(node, BinOp):
        return _fold_constants(BinOp(node.op, _resolve(node.left, names),
                                     _resolve(node.right, names)))
    if isinstance(node, Pow):
        return _fold_constants(Pow(_resolve(node.base, names), _resolve(node.exponent, names)))
    return node


def _fold_constants(node: Node) -> Node:
    """Collapse arithmetic on two constants; undefined cases stay for eval time."""
    if isinstance(node, BinOp) and isinstance(node.left, Const) and isinstance(node.right, Const):
        a, b = node.left.value, node.right.value
        if node.op == '+':
            return Const(a + b)
        if node.op == '-':
            return Const(a - b)
        if node.op == '*':
            return Const(a * b)
        if b != 0.0:
            return Const(a / b)
    if isinstance(node, Pow) and isinstance(node.base, Const) and isinstance(node.exponent, Const):
        a, p = node.base.value, node.exponent.value
        try:
            if float(p).is_integer() and (a != 0.0 or p >= 0):
                value = a ** int(p)
            elif a > 0.0:
                value = a ** p
            else:
                return node
        except OverflowError:
            return node
        if math.isfinite(value):
            return Const(float(value))
    return node


def parse_expr(text: str, dim: int, params: Optional[Mapping[str, float]] = None,
               coords: Optional[Sequence[str]] = None) -> ExprAST:
    """
    Parse ``text`` into an expression over ``dim`` coordinates.

    ``coords`` optionally names the coordinates (``x0..`` stay valid).
    Raises ExprSyntaxError, UnknownIdentifierError or ArityError.
    """
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    if not 1 <= dim <= 10:
        raise ValueError(f"dim must be in 1..10, got {dim}")

    names: Dict[str, Node] = {name: Const(value) for name, value in CONSTANTS.items()}
    for key, value in (params or {}).items():
        if key in FUNCTIONS:
            raise ValueError(f"parameter '{key}' shadows a function name")
        names[key] = Const(float(value))
    for i in range(dim):
        names[f"x{i}"] = Var(i, f"x{i}")
    if coords is not None:
        if len(coords) != dim:
            raise ValueError(f"expected {dim} coordinate names, got {len(coords)}")
        for i, alias in enumerate(coords):
            if alias in FUNCTIONS:
                raise ValueError(f"coordinate '{alias}' shadows a function name")
            names[alias] = Var(i, alias)

    try:
        with _GRAMMAR_LOCK:
            raw = _GRAMMAR.parse_string(text, parse_all=True)[0]
    except pp.ParseBaseException as exc:
        raise ExprSyntaxError(f"cannot parse '{text}': {exc.msg}", exc.loc) from None
    root = _resolve(raw, names)
    logger.debug("parsed %r", text)
    return ExprAST(root, dim, text.strip())


def eval_jet(e: ExprAST, p, order: int = 3) -> Jet3:
    """Jet of ``e`` at a point of shape (d,) or at points of shape (N, d)."""
    return e.jet(p, order)


def eval_jet_batch(e: ExprAST, points: np.ndarray, order: int = 3) -> Jet3:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return e.jet(points, order)


def _face_samples(space, axis: int, per_axis: int = 8) -> Tuple[np.ndarray, np.ndarray]:
    """Points on the low and high faces orthogonal to ``axis``."""
    grids = []
    for j, (a, b) in enumerate(space.domain):
        if j == axis:
            grids.append(np.array([a]))
        elif space.periodic[j]:
            grids.append(np.linspace(a, b, per_axis, endpoint=False))
        else:
            grids.append(np.linspace(a, b, per_axis))
    mesh = np.meshgrid(*grids, indexing='ij')
    low = np.stack([m.ravel() for m in mesh], axis=-1)
    high = low.copy()
    high[:, axis] = space.domain[axis][1]
    return low, high


def faces_match(e: ExprAST, space, axis: int, tol: float) -> bool:
    """True iff the jets of ``e`` agree across the two faces of a periodic axis."""
    low, high = _face_samples(space, axis)
    try:
        jl, jh = e.jet(low, 3), e.jet(high, 3)
    except JetDomainError:
        return False
    return all(np.max(np.abs(a - b)) <= tol
               for a, b in zip(jl.components(), jh.components()))


def periodicity_check(e: ExprAST, space, tol: float = 1e-9) -> bool:
    """
    Boundary admissibility of ``e`` on ``space``.

    Periodic axes: jets match across the identified faces. Other axes: the
    jet (value and all partials to order 3) is at most ``tol`` on both faces.
    """
    for axis in range(space.dim):
        if space.periodic[axis]:
            if not faces_match(e, space, axis, tol):
                return False
            continue
        low, high = _face_samples(space, axis)
        try:
            jl, jh = e.jet(low, 3), e.jet(high, 3)
        except JetDomainError:
            return False
        for comp in jl.components() + jh.components():
            if np.max(np.abs(comp)) > tol:
                return False
    return True
