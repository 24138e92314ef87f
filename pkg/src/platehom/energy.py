"""Heterogeneous and homogenized bending energies over a chart.

All integrals are taken in chart coordinates ``(t, s)`` with the exact
weight ``1 - s kappa(t)``.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .cellprob import q_av_direction, solve_cell
from .errors import ChartMismatch, QuadratureNotConverged
from .material import PeriodicQuadraticForm, rank_one_coords
from .surface import CONICAL, CYLINDRICAL, DevelopableChart, ImmersionSampler


@dataclass(frozen=True)
class QuadratureSpec:
    nodes_per_cell: int = 4
    richardson_tol: float = 1e-3
    max_refine: int = 4

    def __post_init__(self):
        if self.nodes_per_cell < 2:
            raise ValueError("nodes_per_cell must be >= 2")
        if not self.richardson_tol > 0:
            raise ValueError("richardson_tol must be positive")
        if self.max_refine < 1:
            raise ValueError("max_refine must be >= 1")

    def to_dict(self) -> dict:
        return {"nodes_per_cell": self.nodes_per_cell, "richardson_tol": self.richardson_tol,
                "max_refine": self.max_refine}


def gauss_partition(knots, h, npts):
    """Composite Gauss rule on ``[knots[0], knots[-1]]``.

    Every knot is an interval endpoint, and intervals are subdivided
    uniformly to length at most ``h``.
    """
    x, w = np.polynomial.legendre.leggauss(npts)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    knots = np.asarray(knots, dtype=float)
    lens = np.diff(knots)
    m = np.maximum(1, np.ceil(lens / h - 1e-9).astype(int))
    edges = np.concatenate([np.linspace(a, b, k + 1)[:-1] for a, b, k in zip(knots[:-1], knots[1:], m)]
                           + [knots[-1:]])
    d = np.diff(edges)
    keep = d > 0
    a, d = edges[:-1][keep], d[keep]
    nodes = (a[:, None] + d[:, None] * x[None, :]).ravel()
    wts = (d[:, None] * w[None, :]).ravel()
    return nodes, wts


def _t_knots(chart: DevelopableChart, *samplers):
    pts = [chart.breaks]
    for S in samplers:
        if S is not None and S.theta is not None:
            pts.append(S.theta.breakpoints())
    k = np.unique(np.clip(np.concatenate(pts), 0.0, chart.length))
    return k[np.concatenate([[True], np.diff(k) > 1e-13])]


def _energy_eps_once(Q, sampler, eps, h, npts, chunk=2048):
    ch = sampler.chart
    tn, tw = gauss_partition(_t_knots(ch, sampler), h, npts)
    sn, sw = gauss_partition([ch.s_lo, ch.s_hi], h, npts)
    G, T, N = ch.planar(tn)
    kap, kn_eff = sampler.coefficients(tn)
    tables = np.einsum("ta,ijab,tb->tij", rank_one_coords(T), Q.cells, rank_one_coords(T))
    n = Q.grid_n
    partial = []
    for a in range(0, len(tn), chunk):
        sl = slice(a, a + chunk)
        x = G[sl, None, :] + sn[None, :, None] * N[sl, None, :]
        y = x / eps
        frac = y - np.floor(y)
        idx = np.clip(np.floor(frac * n).astype(np.int64), 0, n - 1)
        it = np.arange(len(tn))[sl][:, None]
        qv = tables[it, idx[..., 0], idx[..., 1]]
        wgt = 1.0 - sn[None, :] * kap[sl, None]
        mu = kn_eff[sl, None] / wgt
        f = qv * mu * mu * wgt
        partial.append(np.sum(f * sw[None, :], axis=1) @ tw[sl])
    return math.fsum(partial)


def energy_eps(Q: PeriodicQuadraticForm, sampler: ImmersionSampler, eps: float,
               quad: QuadratureSpec = QuadratureSpec()) -> float:
    """``int Q(Phi/eps, mu T (x) T) (1 - s kappa) ds dt`` with Richardson acceptance."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    ch = sampler.chart
    h0 = min(eps / Q.grid_n, ch.length / 8.0, (ch.s_hi - ch.s_lo) / 2.0)
    prev = _energy_eps_once(Q, sampler, eps, h0, quad.nodes_per_cell)
    for level in range(1, quad.max_refine + 1):
        cur = _energy_eps_once(Q, sampler, eps, h0 / 2 ** level, quad.nodes_per_cell)
        if abs(cur - prev) <= quad.richardson_tol * abs(cur) or abs(cur - prev) < 1e-300:
            return cur
        prev = cur
    raise QuadratureNotConverged(
        f"energy at eps={eps} not converged after {quad.max_refine} refinements (last change {abs(cur - prev):.3g})")


def bending_moment(chart: DevelopableChart, piece_index: int, npts: int = 16) -> float:
    """``int_piece int mu^2 (1 - s kappa) ds dt`` for the unmodulated surface."""
    p = chart.pieces[piece_index]
    tn, tw = gauss_partition([p.t_lo, p.t_hi], p.length / 8.0, npts)
    sn, sw = gauss_partition([chart.s_lo, chart.s_hi], (chart.s_hi - chart.s_lo) / 4.0, npts)
    kap = p.kappa(tn - p.t_lo)
    kn = p.kappa_n(tn - p.t_lo)
    wgt = 1.0 - sn[None, :] * kap[:, None]
    return float(tw @ ((kn[:, None] ** 2 / wgt) @ sw))


def _qav_moment(Q, chart, k, npts):
    """``int_piece int Q_av(T(t) (x) T(t)) mu^2 (1 - s kappa) ds dt``."""
    p = chart.pieces[k]
    tn, tw = gauss_partition([p.t_lo, p.t_hi], p.length / 8.0, npts)
    sn, sw = gauss_partition([chart.s_lo, chart.s_hi], (chart.s_hi - chart.s_lo) / 4.0, npts)
    _, T, _ = chart.planar(tn)
    v = rank_one_coords(T)
    qav = np.einsum("ta,ab,tb->t", v, Q.mean_matrix(), v)
    kn = p.kappa_n(tn - p.t_lo)
    wgt = 1.0 - sn[None, :] * p.kappa(tn - p.t_lo)[:, None]
    return float(tw @ (qav * ((kn[:, None] ** 2 / wgt) @ sw)))


def energy_hom(Q: PeriodicQuadraticForm, chart: DevelopableChart, npts: int = 16) -> float:
    """Homogenized energy: ``Q_av`` on conical pieces, ``Q_hom`` on cylindrical ones.

    Cylindrical pieces with a generic (irrational) direction fall back to
    ``Q_av`` through ``solve_cell``.
    """
    total = 0.0
    cache = {}
    for k, p in enumerate(chart.pieces):
        if p.kind == CYLINDRICAL:
            if p.direction not in cache:
                cache[p.direction] = solve_cell(Q, p.direction)
            total += cache[p.direction].Q_hom * bending_moment(chart, k, npts)
        elif p.kind == CONICAL:
            total += _qav_moment(Q, chart, k, npts)
    return total


def energy_av(Q: PeriodicQuadraticForm, chart: DevelopableChart, npts: int = 16) -> float:
    """Energy with ``Q_av`` everywhere, the weak limit for unmodulated surfaces."""
    total = 0.0
    for k, p in enumerate(chart.pieces):
        if p.kind == CYLINDRICAL:
            total += q_av_direction(Q, p.direction) * bending_moment(chart, k, npts)
        elif p.kind == CONICAL:
            total += _qav_moment(Q, chart, k, npts)
    return total


def l2_distance(A: ImmersionSampler, B: ImmersionSampler, h_max: float | None = None) -> float:
    """``L^2`` distance of two immersions over the shared chart."""
    if not A.chart.same_planar_chart(B.chart):
        raise ChartMismatch("samplers are built on different planar charts")
    ch = A.chart
    knots = np.unique(np.concatenate([A.nodes, B.nodes, _t_knots(ch, A, B)]))
    knots = knots[np.concatenate([[True], np.diff(knots) > 1e-13])]
    h = h_max if h_max is not None else ch.length / 256.0
    tn, tw = gauss_partition(knots, h, 4)
    # u is affine in s, so three nodes integrate the cubic integrand exactly
    sn, sw = gauss_partition([ch.s_lo, ch.s_hi], ch.s_hi - ch.s_lo, 3)
    TT, SS = np.meshgrid(tn, sn, indexing="ij")
    ua, _ = A.immersion(TT, SS)
    ub, _ = B.immersion(TT, SS)
    wgt = ch.weight(TT, SS)
    d2 = np.sum((ua - ub) ** 2, axis=-1) * wgt
    return float(math.sqrt(max(tw @ d2 @ sw, 0.0)))
