"""Storage and retrieval of the probe in the tripod medium.

Switch-off and switch-on are instantaneous maps; the finite
``gamma / Omega_c^2`` settling of the regenerated field is resolved separately
by :func:`regeneration_transient`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beams import ControlBeamSpec, ControlPair, _ratios, _total, make_pair
from .errors import StepTooLarge
from .grid import ComplexField2D, same_grid
from .medium import MediumParams, group_velocity_array
from .propagation import _support


@dataclass(frozen=True)
class StoredCoherence:
    """Ground-state coherences frozen in the medium after switch-off.

    ``storage_rabi`` keeps the total control Rabi frequency present just before
    switch-off; it fixes the storage-stage group velocity.
    """

    phi2: ComplexField2D
    phi3: ComplexField2D
    stored_xi2: ComplexField2D
    stored_xi3: ComplexField2D
    storage_rabi: ComplexField2D

    def __post_init__(self):
        same_grid(self.phi2, self.phi3, self.stored_xi2, self.stored_xi3, self.storage_rabi)

    @property
    def grid(self):
        return self.phi2.grid

    @property
    def bright(self) -> ComplexField2D:
        """Bright-state amplitude with respect to the storage-time controls."""
        return self.phi2.with_values(
            self.stored_xi2.values * self.phi2.values + self.stored_xi3.values * self.phi3.values
        )

    @property
    def norm(self) -> np.ndarray:
        return np.sqrt(np.abs(self.phi2.values) ** 2 + np.abs(self.phi3.values) ** 2)


@dataclass(frozen=True)
class RetrievalResult:
    probe: ComplexField2D
    frozen_phiD: ComplexField2D
    energy_in: float
    energy_out: float
    probe_in: ComplexField2D
    length_weight: np.ndarray  # v_g(storage) / v_g(retrieval) per sample


def store(probe_s: ComplexField2D, controls_s: ControlPair, params: MediumParams) -> StoredCoherence:
    """Map the probe onto atomic coherences at the moment the controls switch off."""
    same_grid(probe_s, controls_s.omega_c2)
    support = _support(probe_s.values)
    xi2, xi3, omega = _ratios(controls_s, mask=support)
    live = omega > 0
    phiB = np.where(live, -params.g_phi1 * probe_s.values / np.where(live, omega, 1.0), 0.0)
    g = probe_s.grid
    return StoredCoherence(
        ComplexField2D(g, np.conj(xi2) * phiB),
        ComplexField2D(g, np.conj(xi3) * phiB),
        ComplexField2D(g, xi2),
        ComplexField2D(g, xi3),
        ComplexField2D(g, omega),
    )


def stored_probe(stored: StoredCoherence, params: MediumParams) -> ComplexField2D:
    """Probe field that was mapped into ``stored``."""
    omega = stored.storage_rabi.values.real
    return stored.phi2.with_values(-omega * stored.bright.values / params.g_phi1)


def retrieve(stored: StoredCoherence, controls_r: ControlPair, params: MediumParams) -> RetrievalResult:
    """Restore the probe when the controls are switched back on.

    The projection of the coherence onto the retrieval-time dark state stays
    behind as ``frozen_phiD``.
    """
    same_grid(stored.phi2, controls_r.omega_c2)
    norm = stored.norm
    peak = norm.max()
    support = norm > 1e-12 * peak if peak > 0 else np.zeros(norm.shape, bool)
    xi2r, xi3r, omega_r = _ratios(controls_r, mask=support)
    p2, p3 = stored.phi2.values, stored.phi3.values
    probe = -(controls_r.omega_c2.values * p2 + controls_r.omega_c3.values * p3) / params.g_phi1
    dark = np.conj(xi3r) * p2 - np.conj(xi2r) * p3
    # without retrieval light everything stays in the medium
    frozen = np.where(omega_r > 0, dark, stored.bright.values)

    G = params.coupling_density
    v_s = group_velocity_array(stored.storage_rabi.values, G)
    v_r = group_velocity_array(omega_r, G)
    weight = np.where(v_r > 0, v_s / np.where(v_r > 0, v_r, 1.0), 0.0)
    probe_in = stored_probe(stored, params)
    g = stored.grid
    return RetrievalResult(
        probe=ComplexField2D(g, probe),
        frozen_phiD=ComplexField2D(g, frozen),
        energy_in=float(np.sum(np.abs(probe_in.values) ** 2) * g.cell_area),
        energy_out=float(np.sum(np.abs(probe) ** 2 * weight) * g.cell_area),
        probe_in=probe_in,
        length_weight=weight,
    )


def steady_state_field(bright0, omega, params: MediumParams):
    """Regenerated probe once the transient has died out, ``-Omega_c phi_B(0) / (g phi1)``."""
    return -np.asarray(omega) * np.asarray(bright0) / params.g_phi1


@dataclass
class RegenerationSeries:
    times: np.ndarray
    fields: list[ComplexField2D]
    steady_state: ComplexField2D


def regeneration_transient(
    stored: StoredCoherence,
    controls_r: ControlPair,
    params: MediumParams,
    dt: float,
    t_max: float,
    *,
    record_every: int = 1,
) -> RegenerationSeries:
    """Build-up of the probe after abrupt switch-on, starting from E(0) = 0.

    Solves, sample by sample,
    ``[1 + (G/W^2)(1 - e^{-W^2 t/gamma})] dE/dt = -(g phi1*/gamma)(g phi1 E + W phi_B(0)) e^{-W^2 t/gamma}``
    (``W`` the total retrieval Rabi frequency).  The right side is a pure
    relaxation towards the steady state, so each step applies the exponential
    of the trapezoid-averaged rate: second order, and monotone even across the
    stiff start of duration ``gamma / G``.
    """
    omega = _total(controls_r)
    wmax = omega.max()
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if wmax > 0 and dt > 0.1 * params.gamma / wmax**2:
        raise StepTooLarge(
            f"dt = {dt:g} exceeds 0.1 gamma / Omega_max^2 = {0.1 * params.gamma / wmax**2:g}"
        )
    norm = stored.norm
    peak = norm.max()
    support = norm > 1e-12 * peak if peak > 0 else np.zeros(norm.shape, bool)
    xi2r, xi3r, _ = _ratios(controls_r, mask=support)
    bright0 = xi2r * stored.phi2.values + xi3r * stored.phi3.values

    G, gamma = params.coupling_density, params.gamma
    live = omega > 0
    w2 = np.where(live, omega**2, 1.0)
    rate = w2 / gamma
    ratio = G / w2
    # the right-hand side equals -k(t) (E - E_ss) with E_ss fixed
    e_ss = np.where(live, steady_state_field(bright0, omega, params), 0.0)

    def relaxation_rate(t):
        e = np.exp(-rate * t)
        return np.where(live, G * e / (gamma * (1.0 + ratio * (1.0 - e))), 0.0)

    n_steps = int(np.ceil(t_max / dt - 1e-9))
    g = stored.grid
    e_now = np.zeros(g.shape, dtype=np.complex128)
    k0 = relaxation_rate(0.0)
    times, fields = [0.0], [ComplexField2D(g, e_now)]
    for n in range(1, n_steps + 1):
        t = n * dt
        k1 = relaxation_rate(t)
        e_now = e_ss + (e_now - e_ss) * np.exp(-0.5 * dt * (k0 + k1))
        k0 = k1
        if n % record_every == 0 or n == n_steps:
            times.append(t)
            fields.append(ComplexField2D(g, e_now))
    return RegenerationSeries(np.array(times), fields, ComplexField2D(g, e_ss))


# -- the two vortex-transfer protocols ---------------------------------------

def lambda_store_controls(grid, a, b, sigma_s, sigma_r, sigma_r3, amplitude=1.0):
    """Single Gaussian control at storage; LG1 plus Gaussian controls at retrieval."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    if not b >= 0:
        raise ValueError(f"b must be >= 0, got {b}")
    storing = make_pair(ControlBeamSpec(0, amplitude, sigma_s, 1.0 / a), None, grid)
    restoring = make_pair(
        ControlBeamSpec(1, amplitude, sigma_r, 1.0),
        ControlBeamSpec(0, amplitude, sigma_r3, b),
        grid,
    )
    return storing, restoring


def tripod_store_controls(grid, a, b, sigma_s, sigma_r, amplitude=1.0):
    """LG1 plus Gaussian controls at storage; single Gaussian control at retrieval."""
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")
    if not b > 0:
        raise ValueError(f"b must be > 0 to keep the storing controls alive at the core, got {b}")
    storing = make_pair(
        ControlBeamSpec(1, amplitude, sigma_s, 1.0),
        ControlBeamSpec(0, amplitude, sigma_s, b),
        grid,
    )
    restoring = make_pair(ControlBeamSpec(0, amplitude, sigma_r, a), None, grid)
    return storing, restoring


def lambda_store_tripod_retrieve(probe_s, a, b, sigma_s, sigma_r, sigma_r3, params, amplitude=1.0):
    """Store with a vortex-free control, retrieve with a vortex control plus a helper beam."""
    storing, restoring = lambda_store_controls(
        probe_s.grid, a, b, sigma_s, sigma_r, sigma_r3, amplitude
    )
    return retrieve(store(probe_s, storing, params), restoring, params)


def tripod_store_lambda_retrieve(probe_s, a, b, sigma_s, sigma_r, params, amplitude=1.0):
    """Store with a vortex control plus a helper beam, retrieve with a single Gaussian."""
    storing, restoring = tripod_store_controls(probe_s.grid, a, b, sigma_s, sigma_r, amplitude)
    return retrieve(store(probe_s, storing, params), restoring, params)


def lambda_store_closed_form(probe_s, a, sigma_s, sigma_r) -> ComplexField2D:
    g = probe_s.grid
    X, Y = g.xy
    env = np.exp(-g.rho**2 * (sigma_r**-2 - sigma_s**-2))
    return probe_s.with_values(a * (X + 1j * Y) * env * probe_s.values)


def tripod_store_closed_form(probe_s, a, b, sigma_s, sigma_r) -> ComplexField2D:
    g = probe_s.grid
    X, Y = g.xy
    env = np.exp(-g.rho**2 * (sigma_r**-2 - sigma_s**-2))
    return probe_s.with_values(a / (g.rho**2 + b**2) * (X - 1j * Y) * env * probe_s.values)
