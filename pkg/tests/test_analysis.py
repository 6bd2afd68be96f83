import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from tripodslow.analysis import (
    LossQuery,
    edge_power_fraction,
    exponential_integral_ei,
    loss_curve,
    loss_ratio_analytic,
    loss_ratio_from_fields,
    loss_ratio_numeric,
    peak_ring_radius,
    winding_number,
    winding_residual,
)
from tripodslow.beams import ControlBeamSpec, lg_field, make_pair
from tripodslow.errors import AmplitudeTooSmall, GridTooCoarse, WidthMismatch
from tripodslow.grid import ComplexField2D, constant_field, gaussian_field, make_grid
from tripodslow.medium import MediumParams
from tripodslow.quadrature import adaptive_quad
from tripodslow.storage import (
    lambda_store_tripod_retrieve,
    retrieve,
    store,
    tripod_store_lambda_retrieve,
)

GRID = make_grid(128, 128, 40, 40)


def ei_oracle(x):
    """-int_{-x}^inf e^{-t}/t dt with t = -x e^s, by the in-repo quadrature."""
    u = -x
    with np.errstate(over="ignore"):
        v, _ = adaptive_quad(lambda s: np.exp(-u * np.exp(np.asarray(s))), 0.0, math.inf,
                             abs_tol=1e-15, rel_tol=1e-15, max_intervals=5000)
    return -v


def test_ei_examples():
    assert exponential_integral_ei(-1.0) == pytest.approx(-0.21938393439552, abs=1e-14)
    assert exponential_integral_ei(-2.0) == pytest.approx(-0.04890051070806, abs=1e-14)
    assert exponential_integral_ei(-1e-8) < -17
    g = 0.5772156649015329
    assert exponential_integral_ei(-1e-8) == pytest.approx(g + math.log(1e-8), abs=1e-7)


@pytest.mark.parametrize("x", [0.0, 1.0, float("nan")])
def test_ei_rejects_nonnegative(x):
    with pytest.raises(ValueError):
        exponential_integral_ei(x)


def test_ei_against_quadrature_oracle():
    xs = -np.concatenate([np.geomspace(1e-6, 50, 120), np.linspace(9.5, 10.5, 21)])
    worst = max(abs(exponential_integral_ei(x) - ei_oracle(x)) for x in xs)
    assert worst <= 1e-12


@given(st.floats(1e-6, 50))
def test_ei_against_mpmath(u):
    assert abs(exponential_integral_ei(-u) - float(mpmath.ei(-u))) <= 1e-12


def test_ei_deep_tail_is_tiny_and_negative():
    v = exponential_integral_ei(-700.0)
    assert v < 0 and v == pytest.approx(float(mpmath.ei(-700)), rel=1e-12)


# -- loss law ---------------------------------------------------------------

def test_loss_examples():
    assert loss_ratio_analytic(LossQuery(0.0, 10.0)) == 1.0
    assert loss_ratio_numeric(LossQuery(0.0, 10.0)) == pytest.approx(1.0, rel=1e-12)
    r = loss_ratio_analytic(LossQuery(10.0, 10.0))
    assert r == pytest.approx(1 + 2 * math.e**2 * float(mpmath.ei(-2)), rel=1e-13)
    assert r == pytest.approx(0.2773, abs=5e-5)
    assert loss_ratio_analytic(LossQuery(100.0, 10.0)) == pytest.approx(0.005, rel=0.01)


def test_loss_query_validation():
    with pytest.raises(ValueError):
        LossQuery(-1.0, 10.0)
    with pytest.raises(ValueError):
        LossQuery(1.0, 0.0)
    with pytest.raises(WidthMismatch):
        loss_ratio_analytic(LossQuery(1.0, 10.0, 20.0, 25.0))


@pytest.mark.parametrize("b", [0.5, 3.0, 10.0, 30.0, 80.0])
def test_analytic_matches_numeric(b):
    q = LossQuery(b, 10.0)
    assert loss_ratio_analytic(q) == pytest.approx(loss_ratio_numeric(q), rel=1e-8)


def test_numeric_with_unequal_widths_against_direct_quadrature():
    # the radial integral written in x = rho^2, as an independent formulation
    b, sp, sr, sr3 = 7.0, 10.0, 20.0, 35.0

    def integrand(x):
        num = x * mpmath.exp(-2 * x * (1 / sr**2 + 1 / sp**2))
        den = x * mpmath.exp(-2 * x / sr**2) + b**2 * mpmath.exp(-2 * x / sr3**2)
        return num / den

    ref = float(mpmath.quad(integrand, [0, 50, 500, mpmath.inf])) / (0.5 * sp**2)
    got = loss_ratio_numeric(LossQuery(b, sp, sr, sr3))
    assert got == pytest.approx(ref, rel=1e-9)


def test_loss_monotone_and_bounded():
    bs = np.linspace(0, 100, 101)
    r = np.array([loss_ratio_analytic(LossQuery(b, 10.0)) for b in bs])
    assert r[0] == 1.0
    assert np.all(np.diff(r) < 0) and np.all(r > 0)
    n = np.array([loss_ratio_numeric(LossQuery(b, 10.0, 20.0, 30.0)) for b in bs[::10]])
    assert np.all(np.diff(n) <= 0)


def test_loss_curve_rows():
    rows = loss_curve([0, 3, 10], 10.0)
    assert [r[0] for r in rows] == [0.0, 3.0, 10.0]
    assert rows[0][1] == 1.0
    rows = loss_curve([3], 10.0, 20.0, 30.0)
    assert math.isnan(rows[0][1]) and 0 < rows[0][2] < 1


# -- winding number ---------------------------------------------------------

def lg1(grid=GRID, width=8.0):
    return lg_field(ControlBeamSpec(1, 1.0, width), grid)


def test_winding_examples():
    assert winding_number(gaussian_field(GRID, 1.0, 8.0)) == 0
    f = lg1()
    assert winding_number(f) == 1
    assert winding_number(f.with_values(np.conj(f.values))) == -1
    assert winding_number(f.with_values(f.values**2)) == 2


@given(st.floats(-math.pi, math.pi), st.floats(2.0, 30.0), st.floats(0.2, 4.0))
def test_winding_invariances(theta, width, power):
    f = lg1()
    env = np.exp(-(GRID.rho / width) ** 2) * (1 + GRID.rho) ** power
    g = f.with_values(f.values * env * np.exp(1j * theta))
    assert winding_number(g) == 1


def test_winding_explicit_radius_and_residual():
    f = lg1()
    assert winding_residual(f, radius=5.0) == pytest.approx(1.0, abs=1e-12)
    assert winding_number(f, radius=3.3, n_samples=200) == 1


def test_peak_ring_radius_of_lg1():
    # |rho exp(-rho^2/w^2)| peaks at w / sqrt(2)
    r = peak_ring_radius(lg1(make_grid(256, 256, 40, 40)))
    assert r == pytest.approx(8 / math.sqrt(2), abs=40 / 256)


def test_winding_rejects_dark_circle():
    with pytest.raises(AmplitudeTooSmall):
        winding_number(constant_field(GRID, 0.0))
    f = gaussian_field(GRID, 1.0, 2.0)
    with pytest.raises(AmplitudeTooSmall):
        winding_number(f, radius=19.0)
    with pytest.raises(ValueError):
        winding_number(f, radius=-1.0)


# -- field-based losses -----------------------------------------------------

def test_edge_fraction():
    g = make_grid(20, 20, 20, 20)
    dens = np.zeros(g.shape)
    dens[0, :] = 1.0
    assert edge_power_fraction(dens, g) == 1.0
    assert edge_power_fraction(np.abs(gaussian_field(g, 1, 2).values) ** 2, g) < 1e-10


def test_fields_loss_matches_law_for_both_protocols():
    sp = 10.0
    grid = make_grid(512, 512, 16 * sp, 16 * sp)
    probe = gaussian_field(grid, 1.0, sp)
    p = MediumParams()
    law = loss_ratio_analytic(LossQuery(10.0, sp))
    r1 = loss_ratio_from_fields(lambda_store_tripod_retrieve(probe, 1.0, 10.0, 20.0, 20.0, 20.0, p))
    r2 = loss_ratio_from_fields(tripod_store_lambda_retrieve(probe, 1.0, 10.0, 20.0, 20.0, p))
    assert r1 == pytest.approx(law, rel=0.01)
    assert r2 == pytest.approx(law, rel=0.01)
    assert r1 == pytest.approx(r2, rel=0.01)


def test_fields_loss_identical_ratios_is_lossless():
    grid = make_grid(128, 128, 80, 80)
    probe = gaussian_field(grid, 1.0, 5.0)
    storing = make_pair(ControlBeamSpec(1, 1.0, 20.0), ControlBeamSpec(0, 1.0, 20.0, 2.0), grid)
    p = MediumParams()
    res = retrieve(store(probe, storing, p), storing.scaled(3.0), p)
    # exact weights leave only the (Omega_r^2 + G) / (Omega_s^2 + G) correction
    w2 = np.abs(storing.omega_c2.values) ** 2 + np.abs(storing.omega_c3.values) ** 2
    G = p.coupling_density
    dens = np.abs(probe.values) ** 2
    exact = np.sum(dens * (9 * w2 + G) / (w2 + G)) / np.sum(dens)
    assert loss_ratio_from_fields(res) == pytest.approx(exact, rel=1e-12)
    assert abs(exact - 1) < 1e-5
    assert np.max(np.abs(res.frozen_phiD.values)) < 1e-10 * np.max(np.abs(store(probe, storing, p).norm))


def test_fields_loss_unequal_widths_uses_numeric():
    sp = 10.0
    grid = make_grid(512, 512, 16 * sp, 16 * sp)
    probe = gaussian_field(grid, 1.0, sp)
    res = lambda_store_tripod_retrieve(probe, 1.0, 5.0, 20.0, 20.0, 30.0, MediumParams())
    assert loss_ratio_from_fields(res) == pytest.approx(
        loss_ratio_numeric(LossQuery(5.0, sp, 20.0, 30.0)), rel=0.01)


def test_grid_too_coarse():
    grid = make_grid(64, 64, 30, 30)
    probe = gaussian_field(grid, 1.0, 10.0)
    res = lambda_store_tripod_retrieve(probe, 1.0, 10.0, 20.0, 20.0, 20.0, MediumParams())
    with pytest.raises(GridTooCoarse):
        loss_ratio_from_fields(res)
