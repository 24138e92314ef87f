"""Developable isometric immersions in line-of-curvature coordinates.

A chart is a planar curve ``Gamma`` with tangent ``T = (cos phi, sin phi)``
and ruling normal ``N = T^perp = (-T2, T1)``; the chart map is
``Phi(t, s) = Gamma(t) + s N(t)`` with Jacobian determinant ``1 - s kappa(t)``
where ``phi' = kappa``.  The immersion is carried by a framed curve
``R = (gamma', nu, n)^t`` (rows) solving ``R' = A R`` with

    A = [[0, kappa, kn], [-kappa, 0, 0], [-kn, 0, 0]],   kn = (1 + theta) kappa_n

and ``u(Phi(t, s)) = gamma(t) + s nu(t)``.

Piece polynomials are given by ascending coefficients in the local variable
``t - t_lo``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import hashlib
import json
import math

import numpy as np
from numpy.polynomial import Polynomial
from scipy.spatial import cKDTree

from .cellprob import Direction
from .errors import (ClassificationMismatch, DetDegenerate, NewtonDivergence,
                     NonContiguousPieces, OutOfRange, SelfOverlap)
from .material import SymTensor2

FLAT, CYLINDRICAL, CONICAL = "flat", "cylindrical", "conical"
KINDS = (FLAT, CYLINDRICAL, CONICAL)
RANGE_TOL = 1e-12
ORTHO_EVERY = 1000

_GX, _GW = np.polynomial.legendre.leggauss(16)
_GX = 0.5 * (_GX + 1.0)
_GW = 0.5 * _GW


def _poly(coeffs) -> Polynomial:
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if c.size == 0:
        c = np.zeros(1)
    return Polynomial(c).trim()


def _is_zero_poly(P: Polynomial, tol: float = 1e-14) -> bool:
    return bool(np.all(np.abs(P.coef) <= tol))


def _poly_extrema(P: Polynomial, a: float, b: float):
    """Min and max of a polynomial over ``[a, b]``."""
    pts = [a, b]
    if P.degree() >= 2:
        for z in P.deriv().roots():
            if abs(z.imag) < 1e-12 and a < z.real < b:
                pts.append(z.real)
    vals = P(np.array(pts))
    return float(vals.min()), float(vals.max())


@dataclass(frozen=True, eq=False)
class CurvaturePiece:
    t_lo: float
    t_hi: float
    kappa: Polynomial
    kappa_n: Polynomial
    kind: str
    direction: Direction | None = None

    @property
    def length(self) -> float:
        return self.t_hi - self.t_lo

    @property
    def constant(self) -> bool:
        return self.kappa.degree() <= 0 and self.kappa_n.degree() <= 0

    def to_dict(self) -> dict:
        d = {
            "t_lo": self.t_lo,
            "t_hi": self.t_hi,
            "kappa": self.kappa.coef.tolist(),
            "kappa_n": self.kappa_n.coef.tolist(),
            "kind": self.kind,
        }
        if self.direction is not None:
            d["direction"] = self.direction.to_dict()
        return d


@dataclass(frozen=True)
class RankOneForm:
    """Second fundamental form ``mu T (x) T``."""

    mu: float
    T: np.ndarray

    def matrix(self) -> np.ndarray:
        return self.mu * np.outer(self.T, self.T)

    def as_sym(self) -> SymTensor2:
        return SymTensor2.rank_one(self.T, self.mu)


@dataclass(eq=False)
class DevelopableChart:
    pieces: tuple
    s_lo: float
    s_hi: float
    gamma0: np.ndarray
    phi0: float = 0.0
    frame0: np.ndarray = field(default_factory=lambda: np.eye(3))
    pos0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    delta_det: float = 0.5
    kappa_min: float = 1e-6
    dist_min: float | None = None

    def __post_init__(self):
        self.pieces = tuple(self.pieces)
        self.gamma0 = np.asarray(self.gamma0, dtype=float).reshape(2)
        self.frame0 = np.asarray(self.frame0, dtype=float).reshape(3, 3)
        self.pos0 = np.asarray(self.pos0, dtype=float).reshape(3)
        self._validate_structure()
        self._precompute()
        self._validate_geometry()

    # ------------------------------------------------------------------ setup
    @property
    def length(self) -> float:
        return self.pieces[-1].t_hi

    @property
    def breaks(self) -> np.ndarray:
        return self._breaks

    def _validate_structure(self):
        if not self.pieces:
            raise NonContiguousPieces("chart needs at least one piece")
        if abs(self.pieces[0].t_lo) > RANGE_TOL:
            raise NonContiguousPieces("first piece must start at t = 0")
        for a, b in zip(self.pieces[:-1], self.pieces[1:]):
            if abs(a.t_hi - b.t_lo) > RANGE_TOL:
                raise NonContiguousPieces(f"gap between pieces at t = {a.t_hi} and {b.t_lo}")
        for p in self.pieces:
            if not p.t_hi > p.t_lo:
                raise NonContiguousPieces(f"empty piece [{p.t_lo}, {p.t_hi}]")
            if p.kappa.degree() > 3 or p.kappa_n.degree() > 3:
                raise ValueError("curvature polynomials must have degree <= 3")
            if p.kind not in KINDS:
                raise ValueError(f"unknown piece kind {p.kind!r}")
        if not self.s_hi > self.s_lo:
            raise ValueError("need s_lo < s_hi")
        R = self.frame0
        if np.linalg.norm(R @ R.T - np.eye(3)) > 1e-12 or abs(np.linalg.det(R) - 1.0) > 1e-12:
            raise ValueError("frame0 must be a rotation matrix")

    def _precompute(self):
        self._breaks = np.array([p.t_lo for p in self.pieces] + [self.pieces[-1].t_hi])
        self._phi_int = [p.kappa.integ() for p in self.pieces]
        phis = [self.phi0]
        for p, P in zip(self.pieces, self._phi_int):
            phis.append(phis[-1] + float(P(p.length)))
        self._phi_start = np.array(phis[:-1])
        # Gauss blocks for curves with non-constant curvature
        blocks, gam = [], []
        g = self.gamma0.copy()
        for k, p in enumerate(self.pieces):
            nb = max(1, math.ceil(p.length / 0.0625)) if p.kappa.degree() > 0 else 1
            edges = np.linspace(p.t_lo, p.t_hi, nb + 1)
            for a, b in zip(edges[:-1], edges[1:]):
                blocks.append(a)
                gam.append(g.copy())
                g = g + self._gamma_step(k, np.array([a]), np.array([b]))[0]
        blocks.append(self.pieces[-1].t_hi)
        gam.append(g)
        self._block_t = np.array(blocks)
        self._block_gamma = np.array(gam)

    def _phi_vec(self, k, tau):
        """Tangent angle for piece indices ``k`` and local coordinates ``tau``."""
        k = np.asarray(k)
        out = np.empty(np.broadcast(k, tau).shape)
        tau = np.broadcast_to(tau, out.shape)
        kk = np.broadcast_to(k, out.shape)
        for i in np.unique(kk):
            m = kk == i
            out[m] = self._phi_start[i] + self._phi_int[i](tau[m])
        return out

    def _gamma_step(self, k, a, b):
        """``int_a^b (cos phi, sin phi) dt`` within piece ``k``."""
        p = self.pieces[k]
        if p.kappa.degree() <= 0:
            kap = float(p.kappa.coef[0])
            phia = self._phi_start[k] + kap * (a - p.t_lo)
            d = b - a
            half = 0.5 * kap * d
            sinc = np.sinc(half / np.pi)
            mid = phia + half
            return np.stack([d * sinc * np.cos(mid), d * sinc * np.sin(mid)], axis=-1)
        nodes = a[:, None] + (b - a)[:, None] * _GX[None, :]
        phi = self._phi_start[k] + self._phi_int[k](nodes - p.t_lo)
        w = (b - a)[:, None] * _GW[None, :]
        return np.stack([(w * np.cos(phi)).sum(1), (w * np.sin(phi)).sum(1)], axis=-1)

    def _validate_geometry(self):
        for k, p in enumerate(self.pieces):
            for side, s in (("s_lo", self.s_lo), ("s_hi", self.s_hi)):
                lo, _ = _poly_extrema(Polynomial([1.0]) - s * p.kappa, 0.0, p.length)
                if lo < self.delta_det:
                    raise DetDegenerate(
                        f"piece {k}: 1 - s*kappa = {lo:.6g} < {self.delta_det} at s = {s}", side=side)
            self._check_kind(k, p)
        self._check_overlap()

    def _check_kind(self, k, p):
        if p.kind == FLAT:
            if not _is_zero_poly(p.kappa_n):
                raise ClassificationMismatch(f"piece {k}: flat piece needs kappa_n == 0")
            return
        if _is_zero_poly(p.kappa_n):
            raise ClassificationMismatch(f"piece {k}: {p.kind} piece needs kappa_n != 0")
        if p.kind == CYLINDRICAL:
            if not _is_zero_poly(p.kappa):
                raise ClassificationMismatch(f"piece {k}: cylindrical piece needs kappa == 0")
            phi = self._phi_start[k]
            T = np.array([math.cos(phi), math.sin(phi)])
            if p.direction is None:
                object.__setattr__(p, "direction", Direction.generic(phi))
            elif not p.direction.matches(T):
                raise ClassificationMismatch(
                    f"piece {k}: declared direction {p.direction.label()} does not match tangent {T}")
        else:
            lo, hi = _poly_extrema(p.kappa, 0.0, p.length)
            sample = np.abs(p.kappa(np.linspace(0.0, p.length, 257)))
            roots_inside = [z for z in p.kappa.roots() if abs(z.imag) < 1e-12 and 0 < z.real < p.length] \
                if p.kappa.degree() > 0 else []
            if roots_inside or sample.min() < self.kappa_min or (lo < 0 < hi):
                raise ClassificationMismatch(
                    f"piece {k}: conical piece needs |kappa| >= {self.kappa_min}; split mixed pieces")

    def _check_overlap(self):
        """Sampled injectivity test of ``Phi``.

        Points closer than the sampling radius ``rho`` must also be close in
        chart parameters; with ``det >= delta_det`` a single sheet keeps
        parameter distance below ``rho / delta_det``.
        """
        ell = self.length
        ns = 21
        nt = min(20000, max(400, int(math.ceil(ell / (self.s_hi - self.s_lo) * (ns - 1))) + 1))
        t = np.linspace(0.0, ell, nt)
        s = np.linspace(self.s_lo, self.s_hi, ns)
        dt, ds = t[1] - t[0], s[1] - s[0]
        wmax = max(1.0 + max(abs(self.s_lo), abs(self.s_hi)) * self._kappa_sup(), 1.0)
        rho = self.dist_min if self.dist_min is not None else 0.75 * math.hypot(dt * wmax, ds)
        TT, SS = np.meshgrid(t, s, indexing="ij")
        X = self.phi(TT.ravel(), SS.ravel())
        pairs = cKDTree(X).query_pairs(rho, output_type="ndarray")
        if len(pairs):
            it, is_ = np.divmod(pairs, ns)
            pdist = np.hypot((it[:, 0] - it[:, 1]) * dt, (is_[:, 0] - is_[:, 1]) * ds)
            if np.any(pdist > 2.0 * rho / min(self.delta_det, 1.0) + 2.0 * max(dt, ds)):
                raise SelfOverlap("chart image overlaps itself")

    def _kappa_sup(self):
        return max(max(abs(v) for v in _poly_extrema(p.kappa, 0.0, p.length)) for p in self.pieces)

    # ------------------------------------------------------------ evaluation
    def check_range(self, t, s=None):
        t = np.asarray(t, dtype=float)
        if np.any(t < -RANGE_TOL) or np.any(t > self.length + RANGE_TOL):
            raise OutOfRange(f"t outside [0, {self.length}]")
        if s is not None:
            s = np.asarray(s, dtype=float)
            if np.any(s < self.s_lo - RANGE_TOL) or np.any(s > self.s_hi + RANGE_TOL):
                raise OutOfRange(f"s outside [{self.s_lo}, {self.s_hi}]")

    def piece_index(self, t):
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self._breaks, t, side="right") - 1
        return np.clip(k, 0, len(self.pieces) - 1)

    def curvatures(self, t):
        """``kappa(t)`` and ``kappa_n(t)`` (right-continuous at piece breaks)."""
        t = np.asarray(t, dtype=float)
        k = self.piece_index(t)
        kap = np.empty(t.shape)
        kn = np.empty(t.shape)
        for i in np.unique(k):
            m = k == i
            p = self.pieces[i]
            kap[m] = p.kappa(t[m] - p.t_lo)
            kn[m] = p.kappa_n(t[m] - p.t_lo)
        return kap, kn

    def angle(self, t):
        t = np.asarray(t, dtype=float)
        k = self.piece_index(t)
        return self._phi_vec(k, t - self._breaks[k])

    def planar(self, t):
        """``(Gamma(t), T(t), N(t))`` for scalar or array ``t``."""
        t = np.asarray(t, dtype=float)
        self.check_range(t)
        tt = np.atleast_1d(t)
        phi = self.angle(tt)
        T = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        N = np.stack([-T[..., 1], T[..., 0]], axis=-1)
        j = np.clip(np.searchsorted(self._block_t, tt, side="right") - 1, 0, len(self._block_t) - 2)
        G = self._block_gamma[j].copy()
        k = self.piece_index(tt)
        for i in np.unique(k):
            m = k == i
            G[m] += self._gamma_step(i, self._block_t[j[m]], tt[m])
        if t.ndim == 0:
            return G[0], T[0], N[0]
        return G.reshape(t.shape + (2,)), T.reshape(t.shape + (2,)), N.reshape(t.shape + (2,))

    def phi(self, t, s):
        """Chart map ``Phi(t, s) = Gamma(t) + s N(t)``."""
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        G, _, N = self.planar(t)
        return G + s[..., None] * N

    def weight(self, t, s):
        kap, _ = self.curvatures(t)
        return 1.0 - np.asarray(s) * kap

    def invert(self, x, guess, tol: float = 1e-15, maxiter: int = 60):
        """Newton solve of ``Phi(t, s) = x`` with the analytic Jacobian ``[(1-s kappa) T, N]``."""
        x = np.asarray(x, dtype=float)
        t, s = float(guess[0]), float(guess[1])
        scale = 1.0 + np.linalg.norm(x)
        for _ in range(maxiter):
            tc = min(max(t, 0.0), self.length)
            G, T, N = self.planar(tc)
            kap, _ = self.curvatures(tc)
            res = x - (G + (t - tc) * T + s * N)
            if np.linalg.norm(res) <= tol * scale:
                break
            t += float(T @ res) / (1.0 - s * float(kap))
            s += float(N @ res)
        else:
            if np.linalg.norm(res) > 1e-12 * scale:
                raise NewtonDivergence(f"chart inversion did not converge at x = {x}")
        self.check_range(t, s)
        return t, s

    def to_dict(self) -> dict:
        d = {
            "s_lo": self.s_lo,
            "s_hi": self.s_hi,
            "gamma0": self.gamma0.tolist(),
            "phi0": self.phi0,
            "frame0": self.frame0.tolist(),
            "pos0": self.pos0.tolist(),
            "delta_det": self.delta_det,
            "kappa_min": self.kappa_min,
            "pieces": [p.to_dict() for p in self.pieces],
        }
        if self.dist_min is not None:
            d["dist_min"] = self.dist_min
        return d

    def fingerprint(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]

    def same_planar_chart(self, other: "DevelopableChart") -> bool:
        a, b = self.to_dict(), other.to_dict()
        for key in ("frame0", "pos0"):
            a.pop(key)
            b.pop(key)
        return a == b


def _direction_from(d):
    if d is None or isinstance(d, Direction):
        return d
    if "angle" in d:
        return Direction.generic(d["angle"])
    return Direction.rational(d["p"], d["q"])


def build_chart(data: dict) -> DevelopableChart:
    """Validated chart from a plain mapping (the ``chart`` config section).

    Pieces are contiguous ``{"t_lo", "t_hi", "kappa", "kappa_n", "kind",
    "direction"}`` records; a missing ``t_lo`` continues the previous piece.
    """
    pieces = []
    t = 0.0
    for rec in data["pieces"]:
        lo = float(rec.get("t_lo", t))
        hi = float(rec["t_hi"]) if "t_hi" in rec else lo + float(rec["length"])
        pieces.append(CurvaturePiece(
            lo, hi, _poly(rec.get("kappa", [0.0])), _poly(rec.get("kappa_n", [0.0])),
            rec.get("kind", CONICAL), _direction_from(rec.get("direction"))))
        t = hi
    kw = {}
    for key in ("phi0", "delta_det", "kappa_min", "dist_min"):
        if key in data and data[key] is not None:
            kw[key] = float(data[key])
    if data.get("frame0") is not None:
        kw["frame0"] = np.asarray(data["frame0"], dtype=float)
    if data.get("pos0") is not None:
        kw["pos0"] = np.asarray(data["pos0"], dtype=float)
    return DevelopableChart(tuple(pieces), float(data["s_lo"]), float(data["s_hi"]),
                            np.asarray(data.get("gamma0", [0.0, 0.0]), dtype=float), **kw)


# ------------------------------------------------------------------ frames
def _skew_blocks(kap, kn):
    W = np.zeros(np.shape(kap) + (3, 3))
    W[..., 0, 1] = kap
    W[..., 0, 2] = kn
    W[..., 1, 0] = -kap
    W[..., 2, 0] = -kn
    return W


def _rot_step(kap, kn, h):
    """``exp(hA)`` and ``int_0^h exp(tau A) dtau`` for frozen coefficients."""
    kap = np.asarray(kap, dtype=float)
    kn = np.asarray(kn, dtype=float)
    h = np.asarray(h, dtype=float)
    W = _skew_blocks(kap, kn) * h[..., None, None]
    W2 = W @ W
    th = np.abs(h) * np.hypot(kap, kn)
    small = th < 1e-4
    ths = np.where(small, 1.0, th)
    f1 = np.where(small, 1 - th ** 2 / 6 + th ** 4 / 120, np.sin(ths) / ths)
    f2 = np.where(small, 0.5 - th ** 2 / 24 + th ** 4 / 720, (1 - np.cos(ths)) / ths ** 2)
    f3 = np.where(small, 1 / 6 - th ** 2 / 120 + th ** 4 / 5040, (ths - np.sin(ths)) / ths ** 3)
    eye = np.eye(3)
    E = eye + f1[..., None, None] * W + f2[..., None, None] * W2
    I = h[..., None, None] * (eye + f2[..., None, None] * W + f3[..., None, None] * W2)
    return E, I


def _polar(R):
    U, _, Vt = np.linalg.svd(R)
    return U @ Vt


class ImmersionSampler:
    """Framed-curve evaluation of ``u`` and ``grad u`` for a chart.

    ``theta`` optionally modulates the normal curvature; it must provide
    ``values(t)``, ``breakpoints()``, ``constant_on(a, b)`` and ``min_scale``.
    """

    def __init__(self, chart: DevelopableChart, theta=None, h_frame: float | None = None):
        self.chart = chart
        self.theta = theta
        ell = chart.length
        h = ell / 512.0
        if theta is not None and theta.min_scale is not None:
            h = min(h, theta.min_scale / 16.0)
        if h_frame is not None:
            h = min(h, h_frame)
        self.h_frame = h
        self._build(h)

    def theta_values(self, t):
        if self.theta is None:
            return np.zeros(np.shape(t))
        return self.theta.values(t)

    def coefficients(self, t):
        """``(kappa, (1 + theta) kappa_n)`` at ``t``."""
        kap, kn = self.chart.curvatures(t)
        return kap, (1.0 + self.theta_values(t)) * kn

    def _build(self, h):
        ch = self.chart
        ell = ch.length
        pts = [ch.breaks, np.linspace(0.0, ell, 65)]
        if self.theta is not None:
            pts.append(self.theta.breakpoints())
        knots = np.unique(np.clip(np.concatenate(pts), 0.0, ell))
        knots = knots[np.concatenate([[True], np.diff(knots) > 1e-13])]
        knots[-1] = ell
        nodes = [knots[0]]
        for a, b in zip(knots[:-1], knots[1:]):
            k = int(ch.piece_index(0.5 * (a + b)))
            exact = ch.pieces[k].constant and (self.theta is None or self.theta.constant_on(a, b))
            m = 1 if exact else max(1, math.ceil((b - a) / h))
            nodes.extend(np.linspace(a, b, m + 1)[1:])
        nodes = np.array(nodes)
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        kap, kn = self.coefficients(mids)
        E, I = _rot_step(kap, kn, np.diff(nodes))
        R = np.empty((len(nodes), 3, 3))
        g = np.empty((len(nodes), 3))
        R[0] = ch.frame0
        g[0] = ch.pos0
        for i in range(len(nodes) - 1):
            g[i + 1] = g[i] + (I[i] @ R[i])[0]
            R[i + 1] = E[i] @ R[i]
            if (i + 1) % ORTHO_EVERY == 0:
                R[i + 1] = _polar(R[i + 1])
        self.nodes = nodes
        self._R = R
        self._g = g

    def frame_and_curve(self, t):
        t = np.asarray(t, dtype=float)
        self.chart.check_range(t)
        tt = np.atleast_1d(t).ravel()
        j = np.clip(np.searchsorted(self.nodes, tt, side="right") - 1, 0, len(self.nodes) - 1)
        h = tt - self.nodes[j]
        kap, kn = self.coefficients(self.nodes[j] + 0.5 * h)
        E, I = _rot_step(kap, kn, h)
        R = E @ self._R[j]
        g = self._g[j] + np.einsum("nab,nbc->nac", I, self._R[j])[:, 0, :]
        return R.reshape(t.shape + (3, 3)), g.reshape(t.shape + (3,))

    def frame(self, t):
        return self.frame_and_curve(t)[0]

    def immersion(self, t, s):
        """``u(Phi(t, s))`` and the 3x2 gradient ``gamma' (x) T + nu (x) N``."""
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        self.chart.check_range(t, s)
        R, g = self.frame_and_curve(t)
        _, T, N = self.chart.planar(t)
        u = g + s[..., None] * R[..., 1, :]
        grad = R[..., 0, :, None] * T[..., None, :] + R[..., 1, :, None] * N[..., None, :]
        return u, grad

    def mu(self, t, s):
        kap, kn = self.coefficients(t)
        return kn / (1.0 - np.asarray(s) * kap)

    def second_form(self, t, s) -> RankOneForm:
        self.chart.check_range(t, s)
        _, T, _ = self.chart.planar(float(t))
        return RankOneForm(float(self.mu(np.float64(t), s)), T)

    def second_form_fd(self, t, s, h: float) -> SymTensor2:
        """Finite-difference second fundamental form in plane coordinates.

        Inverts the chart around ``x0 = Phi(t, s)`` and applies central
        differences of spacing ``h`` to ``u`` (3x3 stencil so that the mixed
        derivative is also central).
        """
        ch = self.chart
        ch.check_range(t, s)
        x0 = ch.phi(t, s)
        _, T, N = ch.planar(float(t))
        kap, _ = ch.curvatures(float(t))
        U = {}
        for a in (-1, 0, 1):
            for b in (-1, 0, 1):
                dx = h * np.array([a, b], dtype=float)
                guess = (t + float(T @ dx) / (1.0 - s * float(kap)), s + float(N @ dx))
                ti, si = ch.invert(x0 + dx, guess)
                U[a, b] = self.immersion(ti, si)[0]
        u1 = (U[1, 0] - U[-1, 0]) / (2 * h)
        u2 = (U[0, 1] - U[0, -1]) / (2 * h)
        n = np.cross(u1, u2)
        n /= np.linalg.norm(n)
        u11 = (U[1, 0] - 2 * U[0, 0] + U[-1, 0]) / h ** 2
        u22 = (U[0, 1] - 2 * U[0, 0] + U[0, -1]) / h ** 2
        u12 = (U[1, 1] - U[1, -1] - U[-1, 1] + U[-1, -1]) / (4 * h ** 2)
        return SymTensor2(float(u11 @ n), float(u22 @ n), float(u12 @ n))


def planar(chart: DevelopableChart, t):
    return chart.planar(t)


def frame(sampler: ImmersionSampler, t):
    return sampler.frame(t)


def immersion(sampler: ImmersionSampler, t, s):
    return sampler.immersion(t, s)


def second_form(sampler: ImmersionSampler, t, s) -> RankOneForm:
    return sampler.second_form(t, s)


def second_form_fd(sampler: ImmersionSampler, t, s, h: float) -> SymTensor2:
    return sampler.second_form_fd(t, s, h)


def _area_moment(chart, p):
    """``int_piece int_s (1 - s kappa) ds dt`` in closed form."""
    s0, s1 = chart.s_lo, chart.s_hi
    integrand = Polynomial([s1 - s0]) - 0.5 * (s1 ** 2 - s0 ** 2) * p.kappa
    P = integrand.integ()
    return float(P(p.length) - P(0.0))


def classify(chart: DevelopableChart) -> dict:
    """Chart-area measures per kind; cylindrical mass keyed by direction."""
    out = {"flat_measure": 0.0, "cylindrical_measure_per_direction": {}, "conical_measure": 0.0}
    for p in chart.pieces:
        m = _area_moment(chart, p)
        if p.kind == FLAT:
            out["flat_measure"] += m
        elif p.kind == CONICAL:
            out["conical_measure"] += m
        else:
            cyl = out["cylindrical_measure_per_direction"]
            cyl[p.direction] = cyl.get(p.direction, 0.0) + m
    return out


def write_mesh(sampler: ImmersionSampler, path, nt: int = 65, ns: int = 17) -> None:
    """ASCII triangle mesh of ``u`` on a rectangular ``(t, s)`` grid."""
    ch = sampler.chart
    t = np.linspace(0.0, ch.length, nt)
    s = np.linspace(ch.s_lo, ch.s_hi, ns)
    TT, SS = np.meshgrid(t, s, indexing="ij")
    u, _ = sampler.immersion(TT, SS)
    with open(path, "w") as fh:
        for x in u.reshape(-1, 3):
            fh.write(f"v {x[0]:.17g} {x[1]:.17g} {x[2]:.17g}\n")
        for i in range(nt - 1):
            for j in range(ns - 1):
                a = i * ns + j + 1
                b = (i + 1) * ns + j + 1
                fh.write(f"f {a} {b} {b + 1}\n")
                fh.write(f"f {a} {b + 1} {a + 1}\n")
