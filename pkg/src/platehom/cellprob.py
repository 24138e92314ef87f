"""Direction-dependent cell problem: rationality, line averages, Q_av and Q_hom.

For a rational direction ``T = (p, q)/sqrt(p^2 + q^2)`` the family of
lines ``{y : T.y - t in r Z}`` wraps around the torus, and the cell problem
reduces to a one-dimensional homogenization along ``T``: the homogenized
coefficient is the harmonic mean of the line averages ``q_av,T``.  On a
piecewise-constant grid material ``q_av,T`` is exactly piecewise affine in
``t`` with breakpoints at multiples of ``r/n``, so everything below is
computed in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import IrrationalDirection
from .material import PeriodicQuadraticForm, rank_one_coords

BREAK_TOL = 1e-12


@dataclass(frozen=True)
class Direction:
    """Unit direction in the plane, rational ``(p, q)`` or generic ``angle``.

    Directions are line directions: ``T`` and ``-T`` are identified through
    the canonical sign ``p > 0`` (or ``p == 0, q > 0``), and generic angles
    are reduced to ``(-pi/2, pi/2]``.
    """

    p: int | None = None
    q: int | None = None
    angle: float | None = None

    def __post_init__(self):
        if self.angle is None:
            if self.p is None or self.q is None:
                raise ValueError("rational direction needs integers p and q")
            p, q = int(self.p), int(self.q)
            if (p, q) == (0, 0):
                raise ValueError("(p, q) = (0, 0) is not a direction")
            g = math.gcd(abs(p), abs(q))
            p, q = p // g, q // g
            if p < 0 or (p == 0 and q < 0):
                p, q = -p, -q
            object.__setattr__(self, "p", p)
            object.__setattr__(self, "q", q)
        else:
            if self.p is not None or self.q is not None:
                raise ValueError("give either (p, q) or angle, not both")
            a = math.remainder(float(self.angle), math.pi)
            if a <= -math.pi / 2:
                a += math.pi
            object.__setattr__(self, "angle", a)

    @classmethod
    def rational(cls, p: int, q: int) -> "Direction":
        return cls(p=p, q=q)

    @classmethod
    def generic(cls, angle: float) -> "Direction":
        return cls(angle=angle)

    @property
    def is_rational(self) -> bool:
        return self.angle is None

    @property
    def unit(self) -> np.ndarray:
        if self.is_rational:
            return np.array([self.p, self.q], dtype=float) / math.hypot(self.p, self.q)
        return np.array([math.cos(self.angle), math.sin(self.angle)])

    def label(self) -> str:
        if self.is_rational:
            return f"rational({self.p},{self.q})"
        return f"generic({self.angle!r})"

    def to_dict(self) -> dict:
        if self.is_rational:
            return {"p": self.p, "q": self.q}
        return {"angle": self.angle}

    def matches(self, T, tol: float = 1e-9) -> bool:
        """Whether the unit vector ``T`` spans the same line, within ``tol``."""
        u = self.unit
        T = np.asarray(T, dtype=float)
        return min(np.linalg.norm(T - u), np.linalg.norm(T + u)) <= tol


def rationality(T: Direction) -> float:
    if T.is_rational:
        return 1.0 / math.hypot(T.p, T.q)
    return 0.0


def _require_rational(T: Direction) -> float:
    r = rationality(T)
    if r == 0.0:
        raise IrrationalDirection(f"{T.label()} has r(T) = 0")
    return r


def _clip_line(p: int, q: int, c: float):
    """Clip ``{p*y1 + q*y2 = c}`` to the closed unit square (Liang-Barsky)."""
    nrm2 = p * p + q * q
    x0 = np.array([p, q], dtype=float) * (c / nrm2)
    d = np.array([-q, p], dtype=float) / math.sqrt(nrm2)
    lo, hi = -np.inf, np.inf
    for k in range(2):
        if d[k] == 0.0:
            if x0[k] < -1e-15 or x0[k] > 1.0 + 1e-15:
                return None
            continue
        a = (0.0 - x0[k]) / d[k]
        b = (1.0 - x0[k]) / d[k]
        lo = max(lo, min(a, b))
        hi = min(hi, max(a, b))
    if hi - lo <= 1e-14:
        return None
    return x0 + lo * d, x0 + hi * d


def line_family(T: Direction, t: float):
    """Maximal segments of ``L_t = {y in [0,1)^2 : T.y - t in r(T) Z}``.

    Returns a list of ``(start, end)`` pairs of 2-vectors.  Segments lying
    on the excluded edges ``y1 = 1`` or ``y2 = 1`` are dropped.
    """
    r = _require_rational(T)
    p, q = T.p, T.q
    tau = (t / r) % 1.0
    lo = min(0, p) + min(0, q)
    hi = max(0, p) + max(0, q)
    segs = []
    for m in range(math.floor(lo - tau) - 1, math.ceil(hi - tau) + 2):
        c = tau + m
        seg = _clip_line(p, q, c)
        if seg is None:
            continue
        a, b = seg
        if (a[0] >= 1.0 - 1e-15 and b[0] >= 1.0 - 1e-15) or (a[1] >= 1.0 - 1e-15 and b[1] >= 1.0 - 1e-15):
            continue
        segs.append((a, b))
    return segs


def _segment_integral(table: np.ndarray, a, b) -> float:
    """Exact integral along a segment of a function constant on grid cells."""
    n = table.shape[0]
    a = np.asarray(a)
    b = np.asarray(b)
    d = b - a
    cuts = [0.0, 1.0]
    for k in range(2):
        if d[k] != 0.0:
            lines = np.arange(0, n + 1) / n
            s = (lines - a[k]) / d[k]
            cuts.extend(s[(s > 0.0) & (s < 1.0)])
    cuts = np.unique(cuts)
    mids = a + np.outer(0.5 * (cuts[:-1] + cuts[1:]), d)
    idx = np.clip(np.floor(mids * n).astype(int), 0, n - 1)
    vals = table[idx[:, 0], idx[:, 1]]
    return float(np.linalg.norm(d) * np.sum(np.diff(cuts) * vals))


def q_av(Q: PeriodicQuadraticForm, T: Direction, t: float) -> float:
    """Line average ``r(T) * int_{L_t} Q(y, T (x) T) dH^1``."""
    r = _require_rational(T)
    table = Q.rank_one_table(T.unit)
    total = sum(_segment_integral(table, a, b) for a, b in line_family(T, t))
    return r * total


def q_av_direction(Q: PeriodicQuadraticForm, T: Direction) -> float:
    """``Q_av(T (x) T)``: full cell average of ``Q(y, T (x) T)``."""
    v = rank_one_coords(T.unit)
    return float(v @ Q.mean_matrix() @ v)


def _inverse_integral(q0, q1, width):
    """``int dt / q`` over an interval where ``q`` is affine from q0 to q1."""
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    x = (q1 - q0) / q0
    small = np.abs(x) < 1e-6
    xs = np.where(small, 0.0, x)
    exact = np.log1p(xs) / np.where(small, 1.0, xs)
    series = 1.0 - x / 2.0 + x * x / 3.0 - x ** 3 / 4.0
    return width / q0 * np.where(small, series, exact)


@dataclass(frozen=True, eq=False)
class CellSolution:
    """Solved cell problem for one direction.

    ``breaks`` partitions ``[0, r]``; on piece ``k`` the line average is affine
    from ``q_lo[k]`` to ``q_hi[k]``.  For irrational directions all profile
    arrays are empty.
    """

    direction: Direction
    r: float
    breaks: np.ndarray
    q_lo: np.ndarray
    q_hi: np.ndarray
    Q_av: float
    Q_hom: float
    piecewise_constant: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.piecewise_constant is None:
            const = np.abs(self.q_hi - self.q_lo) <= BREAK_TOL * np.maximum(1.0, np.abs(self.q_lo))
            object.__setattr__(self, "piecewise_constant", const)

    @property
    def q_samples(self):
        return [((a, b), (lo, hi)) for a, b, lo, hi in
                zip(self.breaks[:-1], self.breaks[1:], self.q_lo, self.q_hi)]

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        tt = np.mod(t, self.r)
        k = np.searchsorted(self.breaks, tt, side="right") - 1
        k = np.clip(k, 0, len(self.q_lo) - 1)
        return tt, k

    def q_profile(self, t):
        """Evaluate ``q_av,T`` at (periodically extended) ``t``."""
        if self.r == 0.0:
            raise IrrationalDirection("no line profile for an irrational direction")
        tt, k = self._locate(t)
        a, b = self.breaks[k], self.breaks[k + 1]
        lam = (tt - a) / (b - a)
        return self.q_lo[k] + lam * (self.q_hi[k] - self.q_lo[k])

    def alpha_prime(self, t):
        """Optimal corrector derivative ``Q_hom / q_av,T(t) - 1``."""
        return self.Q_hom / self.q_profile(t) - 1.0

    @property
    def alpha_lo(self):
        return self.Q_hom / self.q_lo - 1.0

    @property
    def alpha_hi(self):
        return self.Q_hom / self.q_hi - 1.0

    def profile_is_constant(self, rtol: float = 1e-12) -> bool:
        if self.r == 0.0:
            return True
        vals = np.concatenate([self.q_lo, self.q_hi])
        return bool(np.ptp(vals) <= rtol * np.max(np.abs(vals)))

    def alpha_prime_mean(self) -> float:
        if self.r == 0.0:
            return 0.0
        w = np.diff(self.breaks)
        inv = _inverse_integral(self.q_lo, self.q_hi, w)
        return float(self.Q_hom * inv.sum() / self.r - 1.0)

    def to_csv(self) -> str:
        T = self.direction
        lines = [
            f"# T = {T.label()}",
            f"# unit = {self.direction.unit[0]:.17g} {self.direction.unit[1]:.17g}",
            f"# r = {self.r:.17g}",
            f"# Q_av = {self.Q_av:.17g}",
            f"# Q_hom = {self.Q_hom:.17g}",
            "t_lo,t_hi,q_av,alpha_prime,q_av_hi,alpha_prime_hi",
        ]
        for k in range(len(self.q_lo)):
            vals = (self.breaks[k], self.breaks[k + 1], self.q_lo[k], self.alpha_lo[k],
                    self.q_hi[k], self.alpha_hi[k])
            lines.append(",".join(f"{v:.17g}" for v in vals))
        return "\n".join(lines) + "\n"


def _profile_pieces(Q: PeriodicQuadraticForm, T: Direction):
    r = rationality(T)
    n = Q.grid_n
    # q_av,T is affine between consecutive multiples of r/n; two Gauss points fix it
    g = 0.5 / math.sqrt(3.0)
    tau_breaks = np.arange(n + 1) / n
    q_lo, q_hi = [], []
    for k in range(n):
        a, b = tau_breaks[k], tau_breaks[k + 1]
        m, h = 0.5 * (a + b), b - a
        v1 = q_av(Q, T, r * (m - g * h))
        v2 = q_av(Q, T, r * (m + g * h))
        slope = (v2 - v1) / (2 * g * h)
        q_lo.append(0.5 * (v1 + v2) - slope * h / 2)
        q_hi.append(0.5 * (v1 + v2) + slope * h / 2)
    q_lo = np.array(q_lo)
    q_hi = np.array(q_hi)
    # merge neighbouring constant pieces with equal values
    keep_breaks = [0.0]
    out_lo, out_hi = [q_lo[0]], [q_hi[0]]
    for k in range(1, n):
        prev_const = abs(out_hi[-1] - out_lo[-1]) <= BREAK_TOL * abs(out_lo[-1])
        cur_const = abs(q_hi[k] - q_lo[k]) <= BREAK_TOL * abs(q_lo[k])
        if prev_const and cur_const and abs(q_lo[k] - out_lo[-1]) <= BREAK_TOL * abs(q_lo[k]):
            continue
        keep_breaks.append(tau_breaks[k])
        out_lo.append(q_lo[k])
        out_hi.append(q_hi[k])
    keep_breaks.append(1.0)
    return r * np.array(keep_breaks), np.array(out_lo), np.array(out_hi)


def solve_cell(Q: PeriodicQuadraticForm, T: Direction) -> CellSolution:
    r = rationality(T)
    Qav = q_av_direction(Q, T)
    if r == 0.0:
        empty = np.zeros(0)
        return CellSolution(T, 0.0, empty, empty, empty, Qav, Qav)
    breaks, q_lo, q_hi = _profile_pieces(Q, T)
    inv_mean = _inverse_integral(q_lo, q_hi, np.diff(breaks)).sum() / r
    Qhom = 1.0 / inv_mean
    const = np.abs(q_hi - q_lo) <= BREAK_TOL * np.abs(q_lo)
    if np.all(const) and np.ptp(np.concatenate([q_lo, q_hi])) <= BREAK_TOL * np.max(q_lo):
        Qhom = float(np.mean(q_lo))
    # round-off guard for the harmonic <= arithmetic inequality
    Qhom = min(Qhom, Qav) if Qhom > Qav and Qhom - Qav < 1e-13 * Qav else Qhom
    return CellSolution(T, r, breaks, q_lo, q_hi, Qav, float(Qhom))


def _gauss01(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _clip_halfplane(poly, normal, offset, keep_ge: bool):
    """Sutherland-Hodgman clip of a convex polygon against ``normal.x >= offset``."""
    if not poly:
        return poly
    sgn = 1.0 if keep_ge else -1.0
    out = []
    m = len(poly)
    for k in range(m):
        P, R = poly[k], poly[(k + 1) % m]
        fp = sgn * (normal @ P - offset)
        fr = sgn * (normal @ R - offset)
        if fp >= 0:
            out.append(P)
        if (fp >= 0) != (fr >= 0):
            lam = fp / (fp - fr)
            out.append(P + lam * (R - P))
    return out


def _triangle_rule(a, b, c, order=16):
    """Collapsed-square Gauss points and weights on the triangle ``abc``."""
    x, w = _gauss01(order)
    U, W = np.meshgrid(x, x, indexing="ij")
    WU, WW = np.meshgrid(w, w, indexing="ij")
    pts = a + U[..., None] * (b - a) + (U * W)[..., None] * (c - b)
    jac = abs((b - a)[0] * (c - b)[1] - (b - a)[1] * (c - b)[0])
    return pts.reshape(-1, 2), (WU * WW * U).reshape(-1) * jac


def verify_cell(Q: PeriodicQuadraticForm, sol: CellSolution) -> float:
    """2-d quadrature residual ``|int Q(y, (1 + alpha'(T.y)) T(x)T) dy - Q_hom|``.

    Each material cell is clipped against the strips on which the corrector
    is smooth and the pieces are integrated with a high-order triangle rule.
    """
    T = sol.direction
    r = _require_rational(T)
    n = Q.grid_n
    table = Q.rank_one_table(T.unit)
    normal = np.array([T.p, T.q], dtype=float)
    taus = sol.breaks / r
    total = 0.0
    for i in range(n):
        for j in range(n):
            sq = [np.array(v, dtype=float) / n for v in ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))]
            levels = [normal @ v for v in sq]
            for m in range(math.floor(min(levels)) - 1, math.ceil(max(levels)) + 1):
                for k in range(len(sol.q_lo)):
                    poly = _clip_halfplane(sq, normal, m + taus[k], True)
                    poly = _clip_halfplane(poly, normal, m + taus[k + 1], False)
                    if len(poly) < 3:
                        continue
                    for a_idx in range(1, len(poly) - 1):
                        pts, wts = _triangle_rule(poly[0], poly[a_idx], poly[a_idx + 1])
                        if wts.sum() < 1e-300:
                            continue
                        t = r * (pts @ normal - m)
                        lam = (t - sol.breaks[k]) / (sol.breaks[k + 1] - sol.breaks[k])
                        qv = sol.q_lo[k] + lam * (sol.q_hi[k] - sol.q_lo[k])
                        fac = sol.Q_hom / qv
                        total += table[i, j] * np.sum(wts * fac * fac)
    return abs(total - sol.Q_hom)
