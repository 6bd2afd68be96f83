import csv
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from tripodslow.beams import ControlBeamSpec, ControlPair, make_pair
from tripodslow.errors import StepTooLarge, ZeroControlField
from tripodslow.grid import (
    ComplexField2D,
    centroid_and_width,
    constant_field,
    field_power,
    gaussian_field,
    make_grid,
)
from tripodslow.medium import MediumParams, group_velocity_array, photon_fraction
from tripodslow.propagation import (
    DIAGNOSTIC_COLUMNS,
    Boundary,
    PropagationConfig,
    absorber_mask,
    propagate_through_medium,
    slowlight_step,
    transit_pulse,
    vacuum_step,
    write_diagnostics_csv,
)


def uniform(grid, omega):
    return ControlPair(constant_field(grid, omega), constant_field(grid, 0.0))


# -- vacuum -----------------------------------------------------------------

def test_plane_wave_only_gains_global_phase():
    g = make_grid(32, 32, 16, 16)
    X, _ = g.xy
    f = ComplexField2D(g, np.exp(2j * np.pi * 2 * X / g.lx))
    out = vacuum_step(f, 3.7).values / f.values
    assert np.max(np.abs(out - out[0, 0])) < 1e-12
    assert abs(abs(out[0, 0]) - 1) < 1e-12


def test_vacuum_power_and_composition(rng):
    g = make_grid(64, 64, 20, 20)
    f = ComplexField2D(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
    one = vacuum_step(f, 2.0)
    two = vacuum_step(vacuum_step(f, 1.0), 1.0)
    assert abs(field_power(one) - field_power(f)) <= 1e-12 * field_power(f)
    assert np.linalg.norm(one.values - two.values) <= 1e-12 * np.linalg.norm(f.values)


def test_gaussian_width_law():
    w0 = 4.0
    g = make_grid(512, 512, 16 * w0, 16 * w0)
    f = gaussian_field(g, 1.0, w0)
    z_r = math.pi * w0**2
    for _ in range(10):
        f = vacuum_step(f, z_r / 10)
    width = math.sqrt(2) * centroid_and_width(f)[2]
    assert width == pytest.approx(w0 * math.sqrt(2), rel=1e-3)


# -- slow-light step ---------------------------------------------------------

def test_no_medium_reduces_to_vacuum(rng):
    g = make_grid(32, 32, 16, 16)
    f = gaussian_field(g, 1.0, 3.0)
    p = MediumParams(coupling_density=0.0)
    pair = make_pair(ControlBeamSpec(0, 1.0, 5.0), ControlBeamSpec(0, 1.0, 5.0, 0.5), g)
    a = slowlight_step(f, pair, p, 2.5).values
    b = vacuum_step(f, 2.5).values
    assert np.max(np.abs(a - b)) < 1e-12


def test_static_real_delta_conserves_power():
    g = make_grid(64, 64, 40, 40)
    f = gaussian_field(g, 1.0, 5.0)
    p = MediumParams(coupling_density=50.0, length=40.0)
    pair = make_pair(ControlBeamSpec(1, 1.0, 10.0), ControlBeamSpec(0, 1.0, 10.0, 0.5), g)
    delta = 0.3 * np.exp(-(g.rho / 6) ** 2)
    res = propagate_through_medium(f, pair, p, PropagationConfig(2.0, 20), delta=delta)
    assert field_power(res.field) == pytest.approx(field_power(f), rel=1e-3)


def _strang_run(f, pair, p, delta, z, n):
    for _ in range(n):
        f = slowlight_step(f, pair, p, z / n, delta=delta)
    return f.values


def test_strang_splitting_is_second_order():
    g = make_grid(64, 64, 20, 20)
    f = gaussian_field(g, 1.0, 3.0)
    p = MediumParams(coupling_density=9.0)
    pair = uniform(g, 1.0)
    delta = 0.05 * np.exp(-(g.rho / 3) ** 2)
    z = 20.0
    ref = _strang_run(f, pair, p, delta, z, 512)
    e1 = np.linalg.norm(_strang_run(f, pair, p, delta, z, 4) - ref)
    e2 = np.linalg.norm(_strang_run(f, pair, p, delta, z, 8) - ref)
    e3 = np.linalg.norm(_strang_run(f, pair, p, delta, z, 16) - ref)
    assert e1 / e2 == pytest.approx(4.0, rel=0.1)
    assert e2 / e3 == pytest.approx(4.0, rel=0.1)


def test_ramp_gain_matches_ode():
    # uniform Omega(t) ramp, delta = 0, diffraction irrelevant for a constant field
    g = make_grid(8, 8, 8, 8)
    G = 99.0
    p = MediumParams(coupling_density=G, length=1e3)

    def omega(t):
        return 1.0 + 0.5 * math.sin(t)

    def domega(t):
        return 0.5 * math.cos(t)

    n, t_end = 40, 3.0
    times = np.linspace(0, t_end, n + 1)
    planes = [uniform(g, omega(t)) for t in times]
    res = propagate_through_medium(constant_field(g, 1.0), planes, p, PropagationConfig(1.0, n))
    got = res.field.values[0, 0]

    def rhs(t, e):
        w = omega(t)
        v = w**2 / (w**2 + G)
        return (1 - v) * domega(t) / w * e

    sol = solve_ivp(rhs, (0, t_end), [1.0], rtol=1e-12, atol=1e-14)
    assert abs(got) == pytest.approx(sol.y[0, -1], rel=1e-9)
    assert abs(got.imag) < 1e-14


def test_slow_ramp_quasi_static_power_law():
    g = make_grid(8, 8, 8, 8)
    p = MediumParams(coupling_density=99.0)
    w0, w1 = 1.0, 1.2
    out = slowlight_step(constant_field(g, 1.0), (uniform(g, w0), uniform(g, w1)), p, 1.0)
    v = float(group_velocity_array(np.array(w0), 99.0))
    assert abs(out.values[0, 0]) == pytest.approx((w1 / w0) ** (1 - v), rel=0.01)
    exact = photon_fraction(np.array(w1), 99.0) / photon_fraction(np.array(w0), 99.0)
    assert abs(out.values[0, 0]) == pytest.approx(float(exact), rel=1e-14)


def test_zero_control_on_support_raises():
    g = make_grid(32, 32, 16, 16)
    f = gaussian_field(g, 1.0, 3.0)
    core = make_pair(ControlBeamSpec(1, 1.0, 5.0), None, g)
    with pytest.raises(ZeroControlField):
        slowlight_step(f, core, MediumParams(), 1.0)
    # a probe that vanishes at the core is fine
    ring = f.with_values(f.values * g.rho**2)
    slowlight_step(ring, core, MediumParams(coupling_density=10.0), 1.0)


# -- full march --------------------------------------------------------------

def test_zero_length_is_identity():
    g = make_grid(16, 16, 8, 8)
    f = gaussian_field(g, 1.0, 2.0)
    res = propagate_through_medium(f, uniform(g, 1.0), MediumParams(), PropagationConfig(1.0, 0))
    assert np.array_equal(res.field.values, f.values)
    assert len(res.diagnostics) == 1


def test_uniform_controls_conserve_power_and_delay():
    g = make_grid(128, 128, 160, 160)
    f = gaussian_field(g, 1.0, 10.0)
    p = MediumParams(coupling_density=99.0, length=50.0)
    for frame, offset in (("lab", 0.0), ("comoving", 50.0)):
        res = propagate_through_medium(f, uniform(g, 1.0), p, PropagationConfig(2.5, 20, frame))
        assert field_power(res.field) == pytest.approx(field_power(f), rel=5e-3)
        assert res.delay == pytest.approx(5000.0 - offset, rel=1e-12)


def test_tripod_controls_pass_the_vortex_core():
    g = make_grid(128, 128, 160, 160)
    f = gaussian_field(g, 1.0, 10.0)
    p = MediumParams(coupling_density=1e4, length=50.0)
    pair = make_pair(ControlBeamSpec(1, 1.0, 40.0), ControlBeamSpec(0, 1.0, 40.0, 1.0), g)
    res = propagate_through_medium(f, pair, p, PropagationConfig(5.0, 10))
    assert field_power(res.field) == pytest.approx(field_power(f), rel=5e-3)
    with pytest.raises(ZeroControlField):
        propagate_through_medium(f, make_pair(ControlBeamSpec(1, 1.0, 40.0), None, g), p,
                                 PropagationConfig(5.0, 10))


def test_march_validation():
    g = make_grid(16, 16, 16, 16)
    f = gaussian_field(g, 1.0, 2.0)
    p = MediumParams(length=10.0)
    with pytest.raises(ValueError):
        propagate_through_medium(f, uniform(g, 1.0), p, PropagationConfig(1.0, 11))
    with pytest.raises(ValueError):
        propagate_through_medium(f, [uniform(g, 1.0)] * 3, p, PropagationConfig(1.0, 5))
    with pytest.raises(ValueError):
        PropagationConfig(0.0, 1)
    with pytest.raises(ValueError):
        PropagationConfig(1.0, 1, "sideways")
    with pytest.raises(ValueError):
        absorber_mask(g, Boundary("absorbing", 4.0, 1.0), 1.0)
    with pytest.raises(ValueError):
        Boundary("absorbing", 0.0, 1.0)


def test_absorbing_boundary_removes_edge_power():
    g = make_grid(64, 64, 40, 40)
    X, _ = g.xy
    f = ComplexField2D(g, np.exp(-((X - 18) / 1.5) ** 2))  # hugging the edge
    p = MediumParams(coupling_density=0.0, length=100.0)
    cfg = PropagationConfig(1.0, 10, boundary=Boundary("absorbing", 6.0, 0.5))
    res = propagate_through_medium(f, uniform(g, 1.0), p, cfg)
    assert field_power(res.field) < 0.5 * field_power(f)
    centre = gaussian_field(g, 1.0, 2.0)
    res = propagate_through_medium(centre, uniform(g, 1.0), p,
                                   PropagationConfig(1.0, 3, boundary=Boundary("absorbing", 6.0, 0.5)))
    assert field_power(res.field) == pytest.approx(field_power(centre), rel=1e-10)


def test_diagnostics_csv(tmp_path):
    g = make_grid(16, 16, 16, 16)
    f = gaussian_field(g, 1.0, 2.0)
    res = propagate_through_medium(f, uniform(g, 1.0), MediumParams(length=10), PropagationConfig(1.0, 4))
    path = write_diagnostics_csv(res.diagnostics, tmp_path / "d.csv")
    rows = list(csv.DictReader(open(path)))
    assert tuple(rows[0].keys()) == DIAGNOSTIC_COLUMNS
    assert [int(r["step"]) for r in rows] == [0, 1, 2, 3, 4]
    assert float(rows[-1]["z"]) == 4.0


# -- z-resolved transit ------------------------------------------------------

def test_transit_delay_and_power():
    p = MediumParams(coupling_density=99.0, length=50.0)
    v, T = 0.01, 1000.0
    nz = 4000
    dt = 0.8 * (50.0 / nz) / v
    res = transit_pulse(lambda t: math.exp(-(((t - 4 * T) / T) ** 2)), 1.0, p,
                        nz=nz, dt=dt, t_end=8 * T + 50 / v)
    assert res.delay == pytest.approx(50 / v, rel=1e-2)
    assert res.power_ratio == pytest.approx(1.0, abs=5e-3)
    # shape preserved: exit trace is the entry trace shifted by L / v_g
    shifted = np.interp(res.times - 50 / v, res.times, np.abs(res.inflow), left=0.0)
    assert np.max(np.abs(np.abs(res.outflow) - shifted)) < 5e-3


def test_transit_cfl_violation():
    p = MediumParams(coupling_density=99.0, length=50.0)
    with pytest.raises(StepTooLarge):
        transit_pulse(lambda t: 0.0, 1.0, p, nz=100, dt=51.0, t_end=100.0)


def test_transit_probe_without_controls_raises():
    p = MediumParams(coupling_density=99.0, length=50.0)
    with pytest.raises(ZeroControlField):
        transit_pulse(lambda t: 1.0, 0.0, p, nz=10, dt=1.0, t_end=5.0)
