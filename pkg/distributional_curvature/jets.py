"""
Third-order jets.

A ``Jet3`` holds a value and its coordinate partials up to order three.
Arrays carry optional leading axes, so one jet describes either a single
point (``value`` is 0-d, ``d1`` has shape ``(d,)``) or a batch of points
(``value`` has shape ``(N,)``, ``d1`` has shape ``(N, d)``, ...). Entries
above ``order`` are ``None``.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class Jet3:
    value: np.ndarray
    d1: Optional[np.ndarray]
    d2: Optional[np.ndarray]
    d3: Optional[np.ndarray]
    order: int

    def __post_init__(self):
        object.__setattr__(self, "value", np.asarray(self.value, dtype=float))

    @property
    def dim(self) -> int:
        if self.d1 is None:
            raise ValueError("order-0 jet has no dimension information")
        return self.d1.shape[-1]

    def at(self, index: int) -> 'Jet3':
        """Jet of a single point of a batch."""
        pick = lambda a: None if a is None else a[index]  # noqa: E731
        return Jet3(self.value[index], pick(self.d1), pick(self.d2),
                    pick(self.d3), self.order)

    def truncated(self, order: int) -> 'Jet3':
        order = min(order, self.order)
        return Jet3(
            self.value,
            self.d1 if order >= 1 else None,
            self.d2 if order >= 2 else None,
            self.d3 if order >= 3 else None,
            order,
        )

    def components(self) -> List[np.ndarray]:
        return [c for c in (self.value, self.d1, self.d2, self.d3) if c is not None]

    def is_finite(self) -> np.ndarray:
        """Per-point flag: every stored entry is finite."""
        ok = np.isfinite(self.value)
        lead = self.value.ndim
        for comp in self.components()[1:]:
            axes = tuple(range(lead, comp.ndim))
            ok = ok & np.all(np.isfinite(comp), axis=axes)
        return ok


def constant(c: float, x: np.ndarray, order: int) -> Jet3:
    """Constant jet on the points ``x`` (shape ``(..., d)``)."""
    lead, d = x.shape[:-1], x.shape[-1]
    return Jet3(
        np.full(lead, float(c)),
        np.zeros(lead + (d,)) if order >= 1 else None,
        np.zeros(lead + (d, d)) if order >= 2 else None,
        np.zeros(lead + (d, d, d)) if order >= 3 else None,
        order,
    )


def variable(x: np.ndarray, index: int, order: int) -> Jet3:
    """Jet of the coordinate function ``x[index]``."""
    lead, d = x.shape[:-1], x.shape[-1]
    d1 = None
    if order >= 1:
        d1 = np.zeros(lead + (d,))
        d1[..., index] = 1.0
    return Jet3(
        np.array(x[..., index], dtype=float),
        d1,
        np.zeros(lead + (d, d)) if order >= 2 else None,
        np.zeros(lead + (d, d, d)) if order >= 3 else None,
        order,
    )


def _sym_outer(a2: np.ndarray, b1: np.ndarray) -> np.ndarray:
    """a_ij b_k + a_ik b_j + a_jk b_i."""
    return (a2[..., :, :, None] * b1[..., None, None, :]
            + a2[..., :, None, :] * b1[..., None, :, None]
            + a2[..., None, :, :] * b1[..., :, None, None])


def _outer3(a1: np.ndarray) -> np.ndarray:
    return a1[..., :, None, None] * a1[..., None, :, None] * a1[..., None, None, :]


def add(a: Jet3, b: Jet3) -> Jet3:
    order = min(a.order, b.order)
    a, b = a.truncated(order), b.truncated(order)
    return Jet3(*(None if x is None else x + y for x, y in
                  zip((a.value, a.d1, a.d2, a.d3), (b.value, b.d1, b.d2, b.d3))),
                order)


def scale(a: Jet3, c: float) -> Jet3:
    return Jet3(*(None if x is None else c * x for x in (a.value, a.d1, a.d2, a.d3)),
                a.order)


def neg(a: Jet3) -> Jet3:
    return Jet3(*(None if x is None else -x for x in (a.value, a.d1, a.d2, a.d3)),
                a.order)


def sub(a: Jet3, b: Jet3) -> Jet3:
    return add(a, neg(b))


def mul(a: Jet3, b: Jet3) -> Jet3:
    order = min(a.order, b.order)
    a0, b0 = a.value, b.value
    value = a0 * b0
    d1 = d2 = d3 = None
    if order >= 1:
        d1 = a.d1 * b0[..., None] + a0[..., None] * b.d1
    if order >= 2:
        d2 = (a.d2 * b0[..., None, None]
              + a.d1[..., :, None] * b.d1[..., None, :]
              + b.d1[..., :, None] * a.d1[..., None, :]
              + a0[..., None, None] * b.d2)
    if order >= 3:
        d3 = (a.d3 * b0[..., None, None, None]
              + _sym_outer(a.d2, b.d1)
              + _sym_outer(b.d2, a.d1)
              + a0[..., None, None, None] * b.d3)
    return Jet3(value, d1, d2, d3, order)


def compose(u: Jet3, derivs: Sequence[np.ndarray]) -> Jet3:
    """
    Chain rule for phi(u).

    ``derivs`` holds phi, phi', phi'', phi''' evaluated at ``u.value``
    (only the first ``u.order + 1`` are used).
    """
    order = u.order
    derivs = [np.asarray(d, dtype=float) for d in derivs]
    phi = derivs[0]
    d1 = d2 = d3 = None
    if order >= 1:
        d1 = derivs[1][..., None] * u.d1
    if order >= 2:
        d2 = (derivs[2][..., None, None] * u.d1[..., :, None] * u.d1[..., None, :]
              + derivs[1][..., None, None] * u.d2)
    if order >= 3:
        d3 = (derivs[3][..., None, None, None] * _outer3(u.d1)
              + derivs[2][..., None, None, None] * _sym_outer(u.d2, u.d1)
              + derivs[1][..., None, None, None] * u.d3)
    return Jet3(phi, d1, d2, d3, order)


def reciprocal(u: Jet3) -> Jet3:
    t = u.value
    inv = 1.0 / t
    return compose(u, [inv, -inv ** 2, 2.0 * inv ** 3, -6.0 * inv ** 4])


def div(a: Jet3, b: Jet3) -> Jet3:
    return mul(a, reciprocal(b))


def int_power(u: Jet3, n: int) -> Jet3:
    """u**n for an integer n; derivative coefficients are falling factorials."""
    t = u.value
    derivs = []
    coeff = 1.0
    for k in range(4):
        if coeff == 0.0:
            derivs.append(np.zeros_like(t, dtype=float))
        else:
            derivs.append(coeff * np.power(t, float(n - k)))
        coeff *= (n - k)
    return compose(u, derivs)


def real_power(u: Jet3, p: float) -> Jet3:
    """u**p for real p; requires u > 0."""
    t = u.value
    derivs = []
    coeff = 1.0
    for k in range(4):
        derivs.append(coeff * np.power(t, p - k))
        coeff *= (p - k)
    return compose(u, derivs)


# Elementary functions: value -> [phi, phi', phi'', phi''']

def sin_derivs(t: np.ndarray) -> List[np.ndarray]:
    s, c = np.sin(t), np.cos(t)
    return [s, c, -s, -c]


def cos_derivs(t: np.ndarray) -> List[np.ndarray]:
    s, c = np.sin(t), np.cos(t)
    return [c, -s, -c, s]


def tan_derivs(t: np.ndarray) -> List[np.ndarray]:
    v = np.tan(t)
    s = 1.0 + v * v
    return [v, s, 2.0 * v * s, 2.0 * s * (1.0 + 3.0 * v * v)]


def exp_derivs(t: np.ndarray) -> List[np.ndarray]:
    e = np.exp(t)
    return [e, e, e, e]


def log_derivs(t: np.ndarray) -> List[np.ndarray]:
    inv = 1.0 / t
    return [np.log(t), inv, -inv ** 2, 2.0 * inv ** 3]


def sqrt_derivs(t: np.ndarray) -> List[np.ndarray]:
    s = np.sqrt(t)
    with np.errstate(divide='ignore'):
        return [s, 0.5 / s, -0.25 / s ** 3, 0.375 / s ** 5]


def tanh_derivs(t: np.ndarray) -> List[np.ndarray]:
    v = np.tanh(t)
    s = 1.0 - v * v
    return [v, s, -2.0 * v * s, -2.0 * s * (1.0 - 3.0 * v * v)]


def bump_derivs(t: np.ndarray) -> List[np.ndarray]:
    """
    bump(t) = exp(1 - 1/(1 - t^2)) for |t| < 1, else 0.

    Outside the open support every derivative is an exact zero, and so is
    every point where the value underflows.
    """
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    ts = np.where(inside, t, 0.0)
    q = 1.0 - ts * ts
    with np.errstate(over='ignore', under='ignore', divide='ignore',
                     invalid='ignore'):
        phi = np.exp(1.0 - 1.0 / q)
        g1 = -2.0 * ts / q ** 2
        g2 = -2.0 / q ** 2 - 8.0 * ts * ts / q ** 3
        g3 = -24.0 * ts / q ** 3 - 48.0 * ts ** 3 / q ** 4
        vals = [
            phi,
            phi * g1,
            phi * (g1 * g1 + g2),
            phi * (g1 ** 3 + 3.0 * g1 * g2 + g3),
        ]
    live = inside & (phi > 0.0)
    return [np.where(live, v, 0.0) for v in vals]
