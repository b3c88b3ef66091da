#!/usr/bin/env python3
"""
Tensor-product quadrature over the reference measure of a chart space.

Periodic axes use the equispaced (trapezoid) rule, bounded axes use
Gauss-Legendre nodes. Weights already include w * sqrt(det g), so
``integrate`` only has to reduce weights * values. Reduction is a fixed
pairwise tree, independent of how the values were produced.
"""

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .config import MIN_RESOLUTION, QUADRATURE_RULES
from .errors import QuadratureError
from .geom import MetricAtPoint, VectorSample, field_sample, metric_at, riemann_from_metric
from .jets import Jet3
from .spaces import ChartSpace, TestFunction, TestVector

logger = logging.getLogger(__name__)


def pairwise_sum(values) -> float:
    """Sum by repeated halving; the association order depends only on the length."""
    buf = np.asarray(values, dtype=float).ravel()
    if buf.size == 0:
        return 0.0
    while buf.size > 1:
        if buf.size % 2:
            buf = np.append(buf, 0.0)
        buf = buf[0::2] + buf[1::2]
    return float(buf[0])


def _axis_rule(a: float, b: float, n: int, rule: str) -> Tuple[np.ndarray, np.ndarray]:
    if rule == 'equispaced':
        h = (b - a) / n
        return a + h * np.arange(n), np.full(n, h)
    nodes, weights = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * nodes, half * weights


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    space: ChartSpace
    resolution: Tuple[int, ...]
    rules: Tuple[str, ...]
    nodes: np.ndarray            # (N, d)
    coord_weights: np.ndarray    # (N,)
    metric: MetricAtPoint        # batched over nodes

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @cached_property
    def weights(self) -> np.ndarray:
        return self.coord_weights * self.metric.density

    @cached_property
    def riemann(self) -> np.ndarray:
        """Lowered classical Riemann tensor at every node."""
        return riemann_from_metric(self.metric)

    def label(self) -> str:
        return "x".join(str(n) for n in self.resolution)

    def function_jet(self, f: TestFunction, order: int = 3) -> Jet3:
        return _function_jet(f, self, order)

    def samples(self, X: TestVector) -> VectorSample:
        return _field_samples(X, self)


def default_rules(space: ChartSpace) -> Tuple[str, ...]:
    return tuple('equispaced' if p else 'gauss-legendre' for p in space.periodic)


def build_grid(space: ChartSpace, resolution: Union[int, Sequence[int]],
               rule: Optional[Union[str, Sequence[str]]] = None) -> QuadratureGrid:
    """
    Build the node set and measure weights.

    Raises QuadratureError for a resolution below the minimum or a rule that
    does not fit the axis, and MetricError where the metric or the weight
    degenerate at a node.
    """
    d = space.dim
    res = (int(resolution),) * d if np.isscalar(resolution) else tuple(int(n) for n in resolution)
    if len(res) != d:
        raise QuadratureError(f"expected {d} resolutions, got {len(res)}")
    for axis, n in enumerate(res):
        if n < MIN_RESOLUTION:
            raise QuadratureError(f"resolution[{axis}] < {MIN_RESOLUTION}")

    if rule is None:
        rules = default_rules(space)
    elif isinstance(rule, str):
        rules = (rule,) * d
    else:
        rules = tuple(rule)
    if len(rules) != d:
        raise QuadratureError(f"expected {d} rules, got {len(rules)}")
    for axis, r in enumerate(rules):
        if r not in QUADRATURE_RULES:
            raise QuadratureError(f"unknown quadrature rule '{r}' on axis {axis}")
        if r == 'equispaced' and not space.periodic[axis]:
            raise QuadratureError(f"equispaced rule on non-periodic axis {axis}")

    axes = [_axis_rule(a, b, n, r) for (a, b), n, r in zip(space.domain, res, rules)]
    mesh = np.meshgrid(*[nodes for nodes, _ in axes], indexing='ij')
    wmesh = np.meshgrid(*[w for _, w in axes], indexing='ij')
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    coord_weights = np.prod(np.stack([w.ravel() for w in wmesh], axis=-1), axis=-1)

    metric = metric_at(space, nodes)
    logger.debug("built %s grid on %s (%d nodes)", "x".join(map(str, res)), space.name,
                 nodes.shape[0])
    return QuadratureGrid(space, res, rules, nodes, coord_weights, metric)


def integrate(grid: QuadratureGrid,
              integrand: Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]) -> float:
    """
    Sum of weights * integrand over the nodes.

    ``integrand`` is either an array of node values or a vectorized callable
    taking the (N, d) node array.
    """
    values = integrand(grid.nodes) if callable(integrand) else integrand
    values = np.broadcast_to(np.asarray(values, dtype=float), (grid.size,))
    finite = np.isfinite(values)
    if not np.all(finite):
        node = grid.nodes[int(np.argmin(finite))]
        coords = ", ".join(f"{c:.6g}" for c in node)
        raise QuadratureError(f"integrand is not finite at node ({coords})")
    return pairwise_sum(grid.weights * values)


@lru_cache(maxsize=256)
def _function_jet(f: TestFunction, grid: QuadratureGrid, order: int) -> Jet3:
    return f.expr.jet(grid.nodes, order)


@lru_cache(maxsize=256)
def _field_samples(X: TestVector, grid: QuadratureGrid) -> VectorSample:
    return field_sample(X, grid.nodes, grid.metric)
