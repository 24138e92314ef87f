"""Recovery sequences, convergence sweeps and two-scale diagnostics.

The recovery immersion ``u^eps`` keeps the planar chart and modulates the
normal curvature, ``kappa_n -> (1 + theta^eps) kappa_n``.  On a cylindrical
piece with rational direction ``T`` the modulation is the optimal cell
corrector ``alpha_*'`` evaluated at the physical coordinate ``T.x / eps``;
elsewhere it vanishes.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from .cellprob import CellSolution, rationality, solve_cell
from .energy import QuadratureSpec, energy_eps, energy_hom, gauss_partition, l2_distance
from .errors import QuadratureNotConverged
from .material import PeriodicQuadraticForm
from .surface import CYLINDRICAL, DevelopableChart, ImmersionSampler


@dataclass(frozen=True, eq=False)
class PeriodicShape:
    """Periodic function of a phase variable with known break points.

    ``breaks`` lists the discontinuities inside one period (``0`` included);
    ``piecewise_constant`` says the function is constant between them.
    """

    period: float
    func: object
    breaks: tuple = (0.0,)
    piecewise_constant: bool = False

    def __call__(self, phase):
        return self.func(np.mod(phase, self.period))


def corrector_shape(sol: CellSolution, shift: float = 0.0) -> PeriodicShape:
    """``alpha_*'`` as a shape of period ``r``, optionally phase-shifted."""
    r = sol.r
    breaks = tuple(np.sort(np.mod(np.asarray(sol.breaks[:-1]) - shift, r)))
    return PeriodicShape(r, lambda y: sol.alpha_prime(y + shift), breaks,
                         bool(np.all(sol.piecewise_constant)))


def cosine_shape(amplitude: float = 0.5) -> PeriodicShape:
    return PeriodicShape(1.0, lambda y: amplitude * np.cos(2 * np.pi * y))


def square_shape(amplitude: float = 0.5) -> PeriodicShape:
    return PeriodicShape(1.0, lambda y: np.where(y < 0.5, amplitude, -amplitude), (0.0, 0.5), True)


@dataclass(frozen=True, eq=False)
class ThetaSegment:
    """``theta(t) = shape((offset + sign (t - t_lo)) / eps)`` on ``[t_lo, t_hi)``."""

    t_lo: float
    t_hi: float
    shape: PeriodicShape
    eps: float
    offset: float = 0.0
    sign: float = 1.0

    def phase(self, t):
        return (self.offset + self.sign * (np.asarray(t) - self.t_lo)) / self.eps

    def breakpoints(self):
        P = self.shape.period
        # phase runs monotonically between these values over the segment
        p0, p1 = sorted((self.phase(self.t_lo), self.phase(self.t_hi)))
        out = [self.t_lo, self.t_hi]
        for b in self.shape.breaks:
            m = np.arange(math.floor((p0 - b) / P), math.ceil((p1 - b) / P) + 1)
            ph = b + m * P
            t = self.t_lo + self.sign * (ph * self.eps - self.offset)
            out.extend(t[(t > self.t_lo) & (t < self.t_hi)])
        return np.array(out)


@dataclass(frozen=True, eq=False)
class ThetaProfile:
    """Piecewise modulation ``theta`` of the normal curvature; zero off segments."""

    segments: tuple = ()
    eps: float | None = None
    cell_solutions: dict = field(default_factory=dict)
    t_end: float | None = None  # chart length; a segment ending there is closed on the right

    def values(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for seg in self.segments:
            last = self.t_end is not None and seg.t_hi >= self.t_end
            m = (t >= seg.t_lo) & ((t < seg.t_hi) | (last & (t <= seg.t_hi)))
            if np.any(m):
                out[m] = seg.shape(seg.phase(t[m]))
        return out

    __call__ = values

    def breakpoints(self):
        if not self.segments:
            return np.zeros(0)
        return np.unique(np.concatenate([s.breakpoints() for s in self.segments]))

    def constant_on(self, a: float, b: float) -> bool:
        mid = 0.5 * (a + b)
        for seg in self.segments:
            if seg.t_lo <= mid < seg.t_hi:
                return seg.shape.piecewise_constant
        return True

    @property
    def min_scale(self):
        scales = [s.eps * s.shape.period for s in self.segments if not s.shape.piecewise_constant]
        return min(scales) if scales else None


OscillationProfile = ThetaProfile


def build_theta(chart: DevelopableChart, Q: PeriodicQuadraticForm, eps: float,
                phase_shift: float = 0.0, solutions: dict | None = None) -> ThetaProfile:
    """Optimal modulation ``theta^eps`` for the recovery sequence.

    ``phase_shift`` (in units of the cell period ``r``) deliberately
    de-phases the corrector; it is only used by the lower-bound probe.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    sols = {} if solutions is None else solutions
    segs = []
    for p in chart.pieces:
        if p.kind != CYLINDRICAL or p.direction is None or rationality(p.direction) == 0.0:
            continue
        if p.direction not in sols:
            sols[p.direction] = solve_cell(Q, p.direction)
        sol = sols[p.direction]
        u = p.direction.unit
        G, T, _ = chart.planar(p.t_lo)
        sign = float(np.sign(u @ T))
        segs.append(ThetaSegment(p.t_lo, p.t_hi, corrector_shape(sol, phase_shift * sol.r), eps,
                                 offset=float(u @ G), sign=sign))
    return ThetaProfile(tuple(segs), eps, dict(sols), chart.length)


def uniform_theta(chart: DevelopableChart, shape: PeriodicShape, eps: float) -> ThetaProfile:
    """``theta(t) = shape(t / eps)`` over the whole chart parameter range."""
    return ThetaProfile((ThetaSegment(0.0, chart.length, shape, eps),), eps, t_end=chart.length)


def boundary_mismatch(A: ImmersionSampler, B: ImmersionSampler, ns: int = 101) -> float:
    """``max_s |u_A - u_B| + max_s |grad u_A - grad u_B|`` on the line ``t = 0``."""
    s = np.linspace(A.chart.s_lo, A.chart.s_hi, ns)
    ua, ga = A.immersion(np.zeros(ns), s)
    ub, gb = B.immersion(np.zeros(ns), s)
    return float(np.max(np.linalg.norm(ua - ub, axis=-1))
                 + np.max(np.linalg.norm(ga - gb, axis=(-2, -1))))


REPORT_HEADER = "eps,E_eps,E_hom,rel_gap,l2_dist,bc_err"


@dataclass
class ConvergenceReport:
    rows: list
    metadata: dict = field(default_factory=dict)

    @property
    def eps(self):
        return [r[0] for r in self.rows]

    def column(self, name: str) -> np.ndarray:
        idx = REPORT_HEADER.split(",").index(name)
        return np.array([r[idx] for r in self.rows])

    def to_csv(self) -> str:
        lines = [f"# {k} = {v}" for k, v in self.metadata.items()]
        lines.append(REPORT_HEADER)
        for row in self.rows:
            lines.append(",".join(f"{v:.17g}" for v in row))
        return "\n".join(lines) + "\n"


def rel_gap(E_eps: float, E_hom: float) -> float:
    return abs(E_eps - E_hom) / max(E_hom, 1e-30)


def convergence_study(Q: PeriodicQuadraticForm, chart: DevelopableChart, eps_list,
                      quad: QuadratureSpec = QuadratureSpec(), threads: int = 1) -> ConvergenceReport:
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise ValueError("eps_list must not be empty")
    base = ImmersionSampler(chart)
    E_hom = energy_hom(Q, chart)
    sols = {}
    for p in chart.pieces:
        if p.kind == CYLINDRICAL and p.direction is not None and rationality(p.direction) > 0:
            sols.setdefault(p.direction, solve_cell(Q, p.direction))

    def one(eps):
        theta = build_theta(chart, Q, eps, solutions=dict(sols))
        S = ImmersionSampler(chart, theta)
        E = energy_eps(Q, S, eps, quad)
        return (eps, E, E_hom, rel_gap(E, E_hom), l2_distance(S, base), boundary_mismatch(S, base))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(one, eps_list))
    else:
        rows = [one(e) for e in eps_list]
    meta = {"chart": chart.fingerprint(), "material": Q.fingerprint(), "quadrature": quad.to_dict()}
    return ConvergenceReport(rows, meta)


@dataclass(frozen=True)
class BumpWindow:
    """Smooth bump ``b(t) b(s)`` supported in ``[t_lo, t_hi] x [s_lo, s_hi]``."""

    t_lo: float
    t_hi: float
    s_lo: float
    s_hi: float

    @classmethod
    def interior(cls, chart: DevelopableChart, margin: float = 0.1) -> "BumpWindow":
        ell = chart.length
        ds = chart.s_hi - chart.s_lo
        return cls(margin * ell, (1 - margin) * ell, chart.s_lo + margin * ds, chart.s_hi - margin * ds)

    @staticmethod
    def _bump(x, a, b):
        z = (2 * x - (a + b)) / (b - a)
        out = np.zeros(np.shape(z))
        inside = np.abs(z) < 1
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - z[inside] ** 2))
        return out

    def __call__(self, t, s):
        return self._bump(np.asarray(t, float), self.t_lo, self.t_hi) * \
            self._bump(np.asarray(s, float), self.s_lo, self.s_hi)


def _two_scale_once(sampler, eps, k, window, h, npts):
    ch = sampler.chart
    knots = [window.t_lo, window.t_hi]
    if sampler.theta is not None:
        bp = sampler.theta.breakpoints()
        knots = np.concatenate([knots, bp[(bp > window.t_lo) & (bp < window.t_hi)]])
    knots = np.unique(knots)
    tn, tw = gauss_partition(knots, h, npts)
    sn, sw = gauss_partition([window.s_lo, window.s_hi], h, npts)
    G, _, N = ch.planar(tn)
    kap, kn_eff = sampler.coefficients(tn)
    wt = BumpWindow._bump(tn, window.t_lo, window.t_hi)
    ws = BumpWindow._bump(sn, window.s_lo, window.s_hi)
    kv = np.asarray(k, dtype=float)
    phase_t = (G @ kv) / eps
    phase_n = (N @ kv) / eps
    arg = 2 * np.pi * (phase_t[:, None] + sn[None, :] * phase_n[:, None])
    # mu (1 - s kappa) = (1 + theta) kappa_n, independent of s
    f = (wt * kn_eff)[:, None] * ws[None, :] * np.exp(1j * arg)
    return complex(tw @ f @ sw)


def two_scale_coefficient(sampler: ImmersionSampler, eps: float, k, window: BumpWindow | None = None,
                          npts: int = 6, tol: float = 1e-6, max_refine: int = 4) -> complex:
    """Windowed oscillatory moment ``M_k(eps)`` of the normal-curvature density."""
    k = np.asarray(k, dtype=int)
    if not np.any(k):
        raise ValueError("k must be a nonzero integer vector")
    if window is None:
        window = BumpWindow.interior(sampler.chart)
    h = eps / (4.0 * float(np.linalg.norm(k)))
    if sampler.theta is not None and sampler.theta.min_scale is not None:
        h = min(h, sampler.theta.min_scale / 4.0)
    # absolute floor relative to the non-oscillatory mass of the integrand
    mass = abs(_two_scale_once(sampler, 1.0, np.zeros(2), window, h, npts))
    prev = _two_scale_once(sampler, eps, k, window, h, npts)
    for level in range(1, max_refine + 1):
        cur = _two_scale_once(sampler, eps, k, window, h / 2 ** level, npts)
        if abs(cur - prev) <= tol * abs(cur) + 1e-13 * mass:
            return cur
        prev = cur
    raise QuadratureNotConverged(f"M_k at eps={eps} not converged")


def shifted_cell_energy(sol: CellSolution, shift: float) -> float:
    """``mean_t q(t) (1 + alpha_*'(t + shift))^2`` over one period, by exact splitting."""
    r = sol.r
    b = np.asarray(sol.breaks)
    knots = np.unique(np.concatenate([b, np.mod(b - shift, r)]))
    knots = knots[(knots >= 0) & (knots <= r)]
    knots = np.unique(np.concatenate([[0.0, r], knots]))
    tn, tw = gauss_partition(knots, r, 8)
    a = 1.0 + sol.alpha_prime(tn + shift)
    return float(tw @ (sol.q_profile(tn) * a * a) / r)


@dataclass
class LowerBoundReport:
    rows: list
    E_hom: float
    limits: dict
    tolerance: float
    passed: bool

    def to_csv(self) -> str:
        lines = [f"# E_hom = {self.E_hom:.17g}", f"# tolerance = {self.tolerance:.17g}",
                 f"# passed = {self.passed}", "profile,eps,E_eps"]
        lines += [f"{name},{eps:.17g},{E:.17g}" for name, eps, E in self.rows]
        return "\n".join(lines) + "\n"


def lower_bound_probe(Q: PeriodicQuadraticForm, chart: DevelopableChart, theta_family: dict, eps_list,
                      quad: QuadratureSpec = QuadratureSpec()) -> LowerBoundReport:
    """Energies of modulated surfaces against ``E_hom``.

    ``theta_family`` maps a name to a factory ``eps -> ThetaProfile`` (or
    ``None`` for the unmodulated surface).  The probe passes when every
    profile's energy at the smallest ``eps`` is at least
    ``E_hom (1 - richardson_tol - 0.01)``.
    """
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    E_hom = energy_hom(Q, chart)
    rows, limits = [], {}
    for name, factory in theta_family.items():
        for eps in eps_list:
            theta = factory(eps) if factory is not None else None
            E = energy_eps(Q, ImmersionSampler(chart, theta), eps, quad)
            rows.append((name, eps, E))
        limits[name] = rows[-1][2]
    tol = quad.richardson_tol + 0.01
    passed = min(limits.values()) >= E_hom - tol * E_hom
    return LowerBoundReport(rows, E_hom, limits, tol, bool(passed))
