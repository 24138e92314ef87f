"""Cell-periodic quadratic energy densities Q(y, F).

A material is piecewise constant on an ``n x n`` axis-aligned grid over the
unit cell.  Each grid cell carries a symmetric 3x3 matrix acting on the
orthonormal coordinates ``(F11, F22, sqrt(2) F12)`` of ``sym F``, so the
eigenvalues of the cell matrix are exactly the bounds of the quadratic form.
Cells are indexed ``cells[i, j]`` with ``i`` counting along ``y1`` and ``j``
along ``y2``.
"""
from __future__ import annotations

from dataclasses import dataclass
import hashlib

import numpy as np

from .errors import EllipticityViolation, EmptyCoefficients

SQRT2 = np.sqrt(2.0)
ELLIPTICITY_TOL = 1e-12


@dataclass(frozen=True)
class SymTensor2:
    m11: float
    m22: float
    m12: float

    @classmethod
    def from_matrix(cls, F) -> "SymTensor2":
        F = np.asarray(F, dtype=float)
        return cls(F[0, 0], F[1, 1], 0.5 * (F[0, 1] + F[1, 0]))

    @classmethod
    def rank_one(cls, T, mu: float = 1.0) -> "SymTensor2":
        """``mu * T (x) T`` for a 2-vector ``T``."""
        t1, t2 = float(T[0]), float(T[1])
        return cls(mu * t1 * t1, mu * t2 * t2, mu * t1 * t2)

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m12, self.m22]])

    def coords(self) -> np.ndarray:
        return np.array([self.m11, self.m22, SQRT2 * self.m12])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords()))


def sym_coords(F) -> np.ndarray:
    """Orthonormal coordinates of ``sym F``.

    ``F`` may be a SymTensor2, a 2x2 array, or a stack of 2x2 arrays with
    shape ``(..., 2, 2)``; the result has shape ``(..., 3)``.
    """
    if isinstance(F, SymTensor2):
        return F.coords()
    F = np.asarray(F, dtype=float)
    off = 0.5 * (F[..., 0, 1] + F[..., 1, 0])
    return np.stack([F[..., 0, 0], F[..., 1, 1], SQRT2 * off], axis=-1)


def rank_one_coords(T) -> np.ndarray:
    """Coordinates of ``T (x) T`` for unit vectors ``T`` of shape ``(..., 2)``."""
    T = np.asarray(T, dtype=float)
    t1, t2 = T[..., 0], T[..., 1]
    return np.stack([t1 * t1, t2 * t2, SQRT2 * t1 * t2], axis=-1)


@dataclass(frozen=True, eq=False)
class PeriodicQuadraticForm:
    cells: np.ndarray
    alpha_ell: float

    def __post_init__(self):
        cells = np.array(self.cells, dtype=float)
        if cells.ndim != 4 or cells.shape[0] != cells.shape[1] or cells.shape[2:] != (3, 3):
            raise ValueError(f"cells must have shape (n, n, 3, 3), got {cells.shape}")
        if cells.shape[0] < 1:
            raise EmptyCoefficients("material grid is empty")
        if not np.allclose(cells, np.swapaxes(cells, -1, -2), rtol=0.0, atol=1e-14):
            raise ValueError("cell matrices must be symmetric")
        if not self.alpha_ell > 0:
            raise ValueError("alpha_ell must be positive")
        cells = 0.5 * (cells + np.swapaxes(cells, -1, -2))
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def grid_n(self) -> int:
        return self.cells.shape[0]

    def cell_index(self, y):
        """Half-open cell lookup ``[k/n, (k+1)/n)`` of periodic points ``y``."""
        y = np.asarray(y, dtype=float)
        n = self.grid_n
        frac = y - np.floor(y)
        idx = np.floor(frac * n).astype(np.int64)
        # frac can round to exactly 1.0 for tiny negative inputs
        np.clip(idx, 0, n - 1, out=idx)
        return idx[..., 0], idx[..., 1]

    def evaluate(self, y, F) -> float:
        """Energy density ``Q(y, F)``; depends on ``F`` only through ``sym F``."""
        v = sym_coords(F)
        i, j = self.cell_index(y)
        M = self.cells[i, j]
        return float(v @ M @ v)

    def evaluate_coords(self, y, v) -> np.ndarray:
        """Vectorised evaluation on points ``y`` (..., 2) and coordinates ``v`` (..., 3)."""
        i, j = self.cell_index(y)
        M = self.cells[i, j]
        return np.einsum("...a,...ab,...b->...", v, M, v)

    def rank_one_table(self, T) -> np.ndarray:
        """Per-cell values ``Q(cell, T (x) T)`` as an ``n x n`` array."""
        v = rank_one_coords(T)
        return np.einsum("a,ijab,b->ij", v, self.cells, v)

    def mean_matrix(self) -> np.ndarray:
        return self.cells.mean(axis=(0, 1))

    def eigen_bounds(self):
        w = np.linalg.eigvalsh(self.cells)
        return float(w.min()), float(w.max())

    def with_alpha(self, alpha_ell: float) -> "PeriodicQuadraticForm":
        """Same cells with a different declared ellipticity constant (unchecked)."""
        return PeriodicQuadraticForm(self.cells, alpha_ell)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.cells).tobytes())
        h.update(np.float64(self.alpha_ell).tobytes())
        return h.hexdigest()[:16]

    def __eq__(self, other):
        if not isinstance(other, PeriodicQuadraticForm):
            return NotImplemented
        return self.alpha_ell == other.alpha_ell and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash(self.fingerprint())


def validate_ellipticity(Q: PeriodicQuadraticForm) -> bool:
    lo, hi = Q.eigen_bounds()
    return lo >= Q.alpha_ell - ELLIPTICITY_TOL and hi <= 1.0 / Q.alpha_ell + ELLIPTICITY_TOL


def identity_form(alpha_ell: float = 1.0, n: int = 1) -> PeriodicQuadraticForm:
    cells = np.broadcast_to(np.eye(3), (n, n, 3, 3))
    return PeriodicQuadraticForm(cells, alpha_ell)


def laminate(coeffs, axis: int = 1, alpha_ell: float | None = None) -> PeriodicQuadraticForm:
    """Stripe material ``Q(y, F) = a(y_axis) |sym F|^2`` with equal-width stripes.

    When ``alpha_ell`` is omitted the largest constant compatible with the
    coefficients is used.
    """
    a = np.asarray(list(coeffs), dtype=float)
    if a.size == 0:
        raise EmptyCoefficients("laminate needs at least one coefficient")
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    if np.any(a <= 0):
        raise EllipticityViolation("laminate coefficients must be positive")
    if alpha_ell is None:
        alpha_ell = min(a.min(), 1.0 / a.max())
    elif a.min() < alpha_ell - ELLIPTICITY_TOL or a.max() > 1.0 / alpha_ell + ELLIPTICITY_TOL:
        raise EllipticityViolation(
            f"coefficients {a.tolist()} outside [{alpha_ell}, {1.0 / alpha_ell}]")
    n = a.size
    scal = np.repeat(a[:, None], n, axis=1) if axis == 1 else np.repeat(a[None, :], n, axis=0)
    return PeriodicQuadraticForm(scal[..., None, None] * np.eye(3), alpha_ell)


def grid(values, alpha_ell: float | None = None) -> PeriodicQuadraticForm:
    """Grid material from an ``n x n`` array of scalars (isotropic cells) or 3x3 matrices."""
    v = np.asarray(values, dtype=float)
    if v.ndim == 2:
        cells = v[..., None, None] * np.eye(3)
    elif v.ndim == 4:
        cells = v
    else:
        raise ValueError("grid values must have shape (n, n) or (n, n, 3, 3)")
    if alpha_ell is None:
        w = np.linalg.eigvalsh(cells)
        alpha_ell = min(w.min(), 1.0 / w.max())
    return PeriodicQuadraticForm(cells, alpha_ell)


def random_material(rng: np.random.Generator, n: int, alpha_ell: float = 0.2) -> PeriodicQuadraticForm:
    """Random SPD grid material with spectrum inside ``[alpha_ell, 1/alpha_ell]``."""
    lo, hi = alpha_ell, 1.0 / alpha_ell
    eig = rng.uniform(lo, hi, size=(n, n, 3))
    A = rng.normal(size=(n, n, 3, 3))
    Qm, _ = np.linalg.qr(A)
    cells = np.einsum("ijab,ijb,ijcb->ijac", Qm, eig, Qm)
    return PeriodicQuadraticForm(cells, alpha_ell)
