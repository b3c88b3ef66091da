#!/usr/bin/env python3
"""
Pointwise Riemannian geometry on a weighted chart.

Every array carries optional leading axes: evaluated at one point the
objects have their natural shapes, evaluated on a grid they gain a leading
node axis. Index conventions (after the leading axes):

    dg[k, i, j]        = d_k g_ij
    d2g[l, k, i, j]    = d_l d_k g_ij
    Gamma[k, i, j]     = Gamma^k_ij
    dGamma[l, k, i, j] = d_l Gamma^k_ij
    dcomp[i, j]        = d_j X^i
    d2comp[i, j, k]    = d_k d_j X^i
    R[i, j, k, l]      = <R(d_k, d_l) d_j, d_i>
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import MetricError
from .jets import Jet3
from .spaces import ChartSpace, TestFunction, TestVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MetricAtPoint:
    g: np.ndarray
    ginv: np.ndarray
    sqrt_det: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray
    dginv: np.ndarray
    d2ginv: np.ndarray
    Gamma: np.ndarray
    dGamma: np.ndarray
    w_jet: Jet3
    dlogrho: np.ndarray    # d_k log(w sqrt(det g))
    d2logrho: np.ndarray   # d_l d_k log(w sqrt(det g))

    @property
    def weight(self) -> np.ndarray:
        return self.w_jet.value

    @property
    def density(self) -> np.ndarray:
        """w * sqrt(det g), the Radon-Nikodym density of m."""
        return self.w_jet.value * self.sqrt_det


@dataclass(frozen=True, eq=False)
class VectorSample:
    """Components of a vector field and (optionally) their derivatives."""
    comp: np.ndarray
    dcomp: Optional[np.ndarray] = None
    d2comp: Optional[np.ndarray] = None
    div: Optional[np.ndarray] = None

    def divergence(self, m: MetricAtPoint) -> np.ndarray:
        if self.div is not None:
            return self.div
        return divergence_m(self, m)


def _first_bad(mask: np.ndarray) -> tuple:
    mask = np.asarray(mask)
    if mask.ndim == 0:
        return ()
    return tuple(np.argwhere(mask)[0])


def metric_at(space: ChartSpace, p) -> MetricAtPoint:
    """
    Metric data at a point (shape (d,)) or at a batch of points (shape (N, d)).

    Raises MetricError where g is not positive definite or the weight is not
    positive.
    """
    x = np.asarray(p, dtype=float)
    d = space.dim
    lead = x.shape[:-1]

    g = np.empty(lead + (d, d))
    dg = np.empty(lead + (d, d, d))
    d2g = np.empty(lead + (d, d, d, d))
    for i in range(d):
        for j in range(i, d):
            jet = space.metric[i][j].jet(x, 2)
            for a, b in ((i, j), (j, i)):
                g[..., a, b] = jet.value
                dg[..., :, a, b] = jet.d1
                d2g[..., :, :, a, b] = jet.d2

    if not np.all(np.isfinite(g)):
        bad = ~np.all(np.isfinite(g), axis=(-2, -1))
        raise MetricError("metric is not finite", x[_first_bad(bad)])
    eig_min = np.linalg.eigvalsh(g)[..., 0]
    if np.any(eig_min <= 0.0):
        raise MetricError("metric is not positive definite", x[_first_bad(eig_min <= 0.0)])

    w_jet = space.weight.jet(x, 2)
    if np.any(w_jet.value <= 0.0):
        raise MetricError("weight is not positive", x[_first_bad(w_jet.value <= 0.0)])

    ginv = np.linalg.inv(g)
    sqrt_det = np.sqrt(np.linalg.det(g))

    dginv = -np.einsum('...ia,...kab,...bj->...kij', ginv, dg, ginv)
    d2ginv = -(np.einsum('...lia,...kab,...bj->...lkij', dginv, dg, ginv)
               + np.einsum('...ia,...lkab,...bj->...lkij', ginv, d2g, ginv)
               + np.einsum('...ia,...kab,...lbj->...lkij', ginv, dg, dginv))

    # Gamma_{l,ij} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    gamma1 = 0.5 * (np.einsum('...ijl->...lij', dg)
                    + np.einsum('...jil->...lij', dg)
                    - dg)
    dgamma1 = 0.5 * (np.einsum('...mijl->...mlij', d2g)
                     + np.einsum('...mjil->...mlij', d2g)
                     - d2g)
    Gamma = np.einsum('...kl,...lij->...kij', ginv, gamma1)
    dGamma = (np.einsum('...mkl,...lij->...mkij', dginv, gamma1)
              + np.einsum('...kl,...mlij->...mkij', ginv, dgamma1))

    w = w_jet.value
    dlogw = w_jet.d1 / w[..., None]
    d2logw = (w_jet.d2 / w[..., None, None]
              - dlogw[..., :, None] * dlogw[..., None, :])
    dlogrho = dlogw + 0.5 * np.einsum('...ij,...kij->...k', ginv, dg)
    d2logrho = d2logw + 0.5 * (np.einsum('...lij,...kij->...lk', dginv, dg)
                               + np.einsum('...ij,...lkij->...lk', ginv, d2g))

    return MetricAtPoint(g, ginv, sqrt_det, dg, d2g, dginv, d2ginv, Gamma, dGamma,
                         w_jet, dlogrho, d2logrho)


def inner(m: MetricAtPoint, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum('...ij,...i,...j->...', m.g, a, b)


def norm_sq(m: MetricAtPoint, a: np.ndarray) -> np.ndarray:
    return inner(m, a, a)


def grad_vec(f: TestFunction, p, m: MetricAtPoint) -> np.ndarray:
    """(grad f)^i = g^{ij} d_j f."""
    jet = f.expr.jet(p, 1)
    return np.einsum('...ij,...j->...i', m.ginv, jet.d1)


def hessian_bilinear(f: TestFunction, p, m: MetricAtPoint) -> np.ndarray:
    """(Hf)_ij = d_i d_j f - Gamma^k_ij d_k f."""
    jet = f.expr.jet(p, 2)
    return jet.d2 - np.einsum('...kij,...k->...ij', m.Gamma, jet.d1)


def directional(X: VectorSample, jet: Jet3) -> np.ndarray:
    """X(f) = X^i d_i f."""
    return np.einsum('...i,...i->...', X.comp, jet.d1)


def second_directional(X: VectorSample, Y: VectorSample, jet: Jet3) -> np.ndarray:
    """X(Y(f)) = X^i (d_i Y^j d_j f + Y^j d_i d_j f)."""
    return (np.einsum('...i,...ji,...j->...', X.comp, Y.dcomp, jet.d1)
            + np.einsum('...i,...j,...ij->...', X.comp, Y.comp, jet.d2))


def _scale_by(h: Jet3, v: np.ndarray, dv: np.ndarray,
              d2v: Optional[np.ndarray]) -> VectorSample:
    """Samples of h*V from the jet of h and the samples of V."""
    h0 = h.value
    comp = h0[..., None] * v
    dcomp = h.d1[..., None, :] * v[..., :, None] + h0[..., None, None] * dv
    d2comp = None
    if d2v is not None and h.order >= 2:
        d2comp = (h.d2[..., None, :, :] * v[..., :, None, None]
                  + h.d1[..., None, :, None] * dv[..., :, None, :]
                  + h.d1[..., None, None, :] * dv[..., :, :, None]
                  + h0[..., None, None, None] * d2v)
    return VectorSample(comp, dcomp, d2comp)


def scale_sample(h: Jet3, V: VectorSample) -> VectorSample:
    """h*V; needs the jet of h to order 2 for second derivatives."""
    return _scale_by(h, V.comp, V.dcomp, V.d2comp)


def field_sample(X: TestVector, p, m: MetricAtPoint) -> VectorSample:
    """
    Components of X = sum f_i grad(g_i) with first and second derivatives.

    grad(u)^i = g^{ij} d_j u is differentiated twice, which uses the third
    derivatives of u and the second derivatives of g.
    """
    x = np.asarray(p, dtype=float)
    total = None
    for f, u in X.atoms:
        fj = f.expr.jet(x, 2)
        uj = u.expr.jet(x, 3)
        v = np.einsum('...ij,...j->...i', m.ginv, uj.d1)
        dv = (np.einsum('...kij,...j->...ik', m.dginv, uj.d1)
              + np.einsum('...ij,...jk->...ik', m.ginv, uj.d2))
        d2v = (np.einsum('...lkij,...j->...ikl', m.d2ginv, uj.d1)
               + np.einsum('...kij,...jl->...ikl', m.dginv, uj.d2)
               + np.einsum('...lij,...jk->...ikl', m.dginv, uj.d2)
               + np.einsum('...ij,...jkl->...ikl', m.ginv, uj.d3))
        atom = _scale_by(fj, v, dv, d2v)
        if total is None:
            total = atom
        else:
            total = VectorSample(total.comp + atom.comp,
                                 total.dcomp + atom.dcomp,
                                 total.d2comp + atom.d2comp)
    return total


def cov_deriv_pointwise(X: VectorSample, Y: VectorSample, m: MetricAtPoint) -> np.ndarray:
    """(nabla_X Y)^k = X^j d_j Y^k + Gamma^k_ij X^i Y^j."""
    return (np.einsum('...j,...kj->...k', X.comp, Y.dcomp)
            + np.einsum('...kij,...i,...j->...k', m.Gamma, X.comp, Y.comp))


def covariant_jacobian(W: VectorSample, m: MetricAtPoint) -> np.ndarray:
    """(nabla W)^i_j = d_j W^i + Gamma^i_jk W^k."""
    return W.dcomp + np.einsum('...ijk,...k->...ij', m.Gamma, W.comp)


def hs_norm(A: np.ndarray, m: MetricAtPoint) -> np.ndarray:
    """Hilbert-Schmidt norm of a (1,1)-tensor."""
    sq = np.einsum('...ik,...jl,...ij,...kl->...', m.g, m.ginv, A, A)
    return np.sqrt(np.maximum(sq, 0.0))


def divergence_m(X: VectorSample, m: MetricAtPoint) -> np.ndarray:
    """div_m X = d_i X^i + X^i d_i log(w sqrt(det g))."""
    if X.dcomp is None:
        raise ValueError("vector sample carries no derivatives")
    return (np.einsum('...ii->...', X.dcomp)
            + np.einsum('...i,...i->...', X.comp, m.dlogrho))


def d_divergence_m(X: VectorSample, m: MetricAtPoint) -> np.ndarray:
    """d_k div_m X."""
    if X.d2comp is None:
        raise ValueError("vector sample carries no second derivatives")
    return (np.einsum('...iik->...k', X.d2comp)
            + np.einsum('...ik,...i->...k', X.dcomp, m.dlogrho)
            + np.einsum('...i,...ik->...k', X.comp, m.d2logrho))


def lie_bracket_pointwise(X: VectorSample, Y: VectorSample, m: MetricAtPoint) -> VectorSample:
    """[X,Y]^k = X^j d_j Y^k - Y^j d_j X^k with its first derivatives."""
    comp = (np.einsum('...j,...kj->...k', X.comp, Y.dcomp)
            - np.einsum('...j,...kj->...k', Y.comp, X.dcomp))
    # grouped so that [X,X] and [X,Y] + [Y,X] cancel exactly
    dcomp = ((np.einsum('...jl,...kj->...kl', X.dcomp, Y.dcomp)
              + np.einsum('...j,...kjl->...kl', X.comp, Y.d2comp))
             - (np.einsum('...jl,...kj->...kl', Y.dcomp, X.dcomp)
                + np.einsum('...j,...kjl->...kl', Y.comp, X.d2comp)))
    return VectorSample(comp, dcomp)


def riemann_from_metric(m: MetricAtPoint) -> np.ndarray:
    """
    Lowered Riemann tensor R[i,j,k,l] = g_im R^m_jkl with
    R^m_jkl = d_k Gamma^m_lj - d_l Gamma^m_kj + Gamma^m_kp Gamma^p_lj - Gamma^m_lp Gamma^p_kj.
    """
    up = (np.einsum('...kmlj->...mjkl', m.dGamma)
          - np.einsum('...lmkj->...mjkl', m.dGamma)
          + np.einsum('...mkp,...plj->...mjkl', m.Gamma, m.Gamma)
          - np.einsum('...mlp,...pkj->...mjkl', m.Gamma, m.Gamma))
    return np.einsum('...im,...mjkl->...ijkl', m.g, up)


def riemann_oracle(space: ChartSpace, p) -> np.ndarray:
    """Classical Riemann tensor of the chart metric (the weight does not enter)."""
    return riemann_from_metric(metric_at(space, p))


def curvature_pairing(R: np.ndarray, X: np.ndarray, Y: np.ndarray,
                      Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """<R(X,Y)Z, W> = R[w,z,x,y] W^w Z^z X^x Y^y."""
    return np.einsum('...ijkl,...i,...j,...k,...l->...', R, W, Z, X, Y)
