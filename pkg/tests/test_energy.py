import math

import numpy as np
import pytest

import charts
from platehom import (ChartMismatch, ImmersionSampler, QuadratureNotConverged, QuadratureSpec, energy_av,
                      energy_eps, energy_hom, grid, identity_form, l2_distance, laminate, random_material)
from platehom.energy import bending_moment, gauss_partition

CONE_MOMENT = math.log(1.25 / 0.75)  # int_0^1 int_{-1/4}^{1/4} ds / (1 - s)


def test_gauss_partition_exact_on_polynomials():
    x, w = gauss_partition([0.0, 0.3, 1.0], 0.2, 4)
    assert w.sum() == pytest.approx(1.0)
    assert w @ x ** 7 == pytest.approx(1 / 8, rel=1e-14)
    assert np.all(np.diff(x) > 0)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(nodes_per_cell=1)
    with pytest.raises(ValueError):
        QuadratureSpec(richardson_tol=0.0)
    assert QuadratureSpec().to_dict() == {"nodes_per_cell": 4, "richardson_tol": 1e-3, "max_refine": 4}


def test_bending_moments():
    assert bending_moment(charts.cylinder(), 0) == pytest.approx(1.0)
    assert bending_moment(charts.cone(), 0) == pytest.approx(CONE_MOMENT, rel=1e-13)


def test_identity_material_energy():
    # |mu T (x) T|^2 = mu^2, so the energy is the bending moment for every eps
    Q = identity_form()
    S = ImmersionSampler(charts.cone())
    for eps in (0.5, 0.1, 0.013):
        assert energy_eps(Q, S, eps) == pytest.approx(CONE_MOMENT, rel=1e-10)


def test_energy_hom_values():
    lam = laminate([1.0, 4.0])
    assert energy_hom(lam, charts.cylinder()) == pytest.approx(1.6)
    assert energy_hom(lam, charts.cone()) == pytest.approx(2.5 * CONE_MOMENT)
    assert energy_av(lam, charts.cylinder()) == pytest.approx(2.5)
    # mixed: cylinder half carries 1.6 * 0.25, cone half carries 2.5 * moment
    E = energy_hom(lam, charts.mixed())
    assert E == pytest.approx(1.6 * 0.5 * 0.5 + 2.5 * 0.5 * math.log(1.25 / 0.75), rel=1e-12)


def test_unmodulated_cylinder_weak_limit():
    lam = laminate([1.0, 4.0])
    S = ImmersionSampler(charts.cylinder())
    for eps in (1 / 8, 1 / 64):
        assert energy_eps(lam, S, eps) == pytest.approx(2.5, rel=1e-12)


def test_cone_energy_approaches_average():
    lam = laminate([1.0, 4.0])
    S = ImmersionSampler(charts.cone())
    E = [energy_eps(lam, S, e) for e in (1 / 8, 1 / 32, 1 / 64)]
    target = 2.5 * CONE_MOMENT
    gaps = [abs(x - target) for x in E]
    assert gaps[-1] < gaps[0] and gaps[-1] / target < 0.01


def test_not_converged():
    Q = random_material(np.random.default_rng(0), 3)
    S = ImmersionSampler(charts.cone())
    with pytest.raises(QuadratureNotConverged):
        energy_eps(Q, S, 0.1, QuadratureSpec(richardson_tol=1e-15, max_refine=1))


def test_energy_scales_with_material():
    Q = random_material(np.random.default_rng(1), 2)
    S = ImmersionSampler(charts.cone())
    E1 = energy_eps(Q, S, 0.1)
    E2 = energy_eps(grid(2.0 * Q.cells, Q.alpha_ell / 2), S, 0.1)
    assert E2 == pytest.approx(2 * E1, rel=1e-12)


def test_l2_distance():
    A = ImmersionSampler(charts.cylinder())
    assert l2_distance(A, A) == 0.0
    with pytest.raises(ChartMismatch):
        l2_distance(A, ImmersionSampler(charts.cone()))
