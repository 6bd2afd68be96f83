"""Probe propagation: vacuum diffraction and the slow-light envelope equation.

Two modes are provided.

* Thin-cloud march (:func:`slowlight_step`, :func:`propagate_through_medium`):
  the transverse field is stepped along z with Strang splitting.  Every
  transverse sample rides its own characteristic, spending ``dz / v_g`` of
  time per step; that time drives the local phase and gain factors while the
  longitudinal advection itself becomes a bulk delay.
* z-resolved pulse transit (:func:`transit_pulse`): a transversely uniform
  pulse is advected through the medium on a 1D upwind stencil in the lab frame.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .beams import ControlPair, _total, static_mismatch
from .errors import StepTooLarge, ZeroControlField
from .grid import (
    WAVENUMBER,
    ComplexField2D,
    TransverseGrid,
    centroid_and_width,
    field_power,
    inverse_spectrum,
    transverse_spectrum,
)
from .medium import MediumParams, group_velocity_array, photon_fraction

SUPPORT_FLOOR = 1e-12


@dataclass(frozen=True)
class Boundary:
    kind: str = "periodic"  # or "absorbing"
    width: float = 0.0
    strength: float = 0.0

    def __post_init__(self):
        if self.kind not in ("periodic", "absorbing"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "absorbing" and not (self.width > 0 and self.strength > 0):
            raise ValueError("absorbing boundary needs positive width and strength")


@dataclass(frozen=True)
class PropagationConfig:
    dz: float
    n_steps: int
    frame: str = "comoving"  # delays reported in retarded time; "lab" reports z / v_g
    boundary: Boundary = field(default_factory=Boundary)

    def __post_init__(self):
        if not self.dz > 0:
            raise ValueError(f"dz must be positive, got {self.dz}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 0:
            raise ValueError(f"n_steps must be a non-negative integer, got {self.n_steps}")
        if self.frame not in ("lab", "comoving"):
            raise ValueError(f"unknown frame {self.frame!r}")


def absorber_mask(grid: TransverseGrid, boundary: Boundary, dz: float):
    """Per-step attenuation factor, or ``None`` for periodic boundaries."""
    if boundary.kind == "periodic":
        return None
    if boundary.width >= min(grid.lx, grid.ly) / 4:
        raise ValueError(
            f"absorbing width {boundary.width} must be below a quarter of the window "
            f"({min(grid.lx, grid.ly) / 4})"
        )
    X, Y = grid.xy
    to_edge = np.minimum(0.5 * grid.lx - np.abs(X), 0.5 * grid.ly - np.abs(Y))
    depth = np.clip((boundary.width - to_edge) / boundary.width, 0.0, 1.0)
    return np.exp(-boundary.strength * dz * depth**2)


def diffraction_multiplier(grid: TransverseGrid, dz: float) -> np.ndarray:
    KX, KY = grid.kxy
    return np.exp(-1j * (KX**2 + KY**2) * dz / (2 * WAVENUMBER))


def vacuum_step(f: ComplexField2D, dz: float) -> ComplexField2D:
    """Exact paraxial free-space propagation over ``dz``."""
    spec = transverse_spectrum(f)
    return inverse_spectrum(spec.with_values(spec.values * diffraction_multiplier(f.grid, dz)))


def _support(values: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(values))
    return np.abs(values) > SUPPORT_FLOOR * peak if peak > 0 else np.zeros(values.shape, bool)


def _split_pair(pair_t):
    if isinstance(pair_t, ControlPair):
        return pair_t, pair_t
    start, end = pair_t
    return start, end


def slowlight_step(
    f: ComplexField2D,
    pair_t,
    params: MediumParams,
    dz: float,
    *,
    delta=None,
    mask=None,
) -> ComplexField2D:
    """Advance the probe envelope by ``dz`` through the medium.

    ``pair_t`` is one static :class:`ControlPair` or a ``(start, end)`` tuple
    holding the controls seen at entry and exit of the step.  ``delta``
    defaults to the static two-photon mismatch of the controls.
    """
    start, end = _split_pair(pair_t)
    support = _support(f.values)
    omega0, omega1 = _total(start), _total(end)
    dead = support & ((omega0 == 0) | (omega1 == 0))
    if np.any(dead):
        raise ZeroControlField(
            f"controls vanish at {int(dead.sum())} sample(s) carrying probe field", int(dead.sum())
        )
    G = params.coupling_density
    half = diffraction_multiplier(f.grid, 0.5 * dz)

    spec = transverse_spectrum(f)
    g = inverse_spectrum(spec.with_values(spec.values * half)).values

    v = 0.5 * (group_velocity_array(omega0, G) + group_velocity_array(omega1, G))
    if delta is None:
        d0 = static_mismatch(start, params.omega21, params.omega31, support)
        d1 = static_mismatch(end, params.omega21, params.omega31, support)
        delta = 0.5 * (d0 + d1)
    else:
        delta = getattr(delta, "values", delta)
    alive = v > 0
    # (1/v_g - 1/c) dz, the extra time spent relative to vacuum
    retard = np.where(alive, dz * (1.0 / np.where(alive, v, 1.0) - 1.0), 0.0)
    phase = np.exp(-1j * delta * retard)
    # exact integral of (1 - v_g/c) d ln(Omega): ratio of photon fractions
    c0 = photon_fraction(omega0, G)
    c1 = photon_fraction(omega1, G)
    gain = np.where(c0 > 0, c1 / np.where(c0 > 0, c0, 1.0), 1.0)
    g = g * np.where(alive, phase, 1.0) * gain

    spec = transverse_spectrum(f.with_values(g))
    out = inverse_spectrum(spec.with_values(spec.values * half)).values
    if mask is not None:
        out = out * mask
    return f.with_values(out)


@dataclass
class PropagationResult:
    field: ComplexField2D
    diagnostics: list[dict]
    delay_field: np.ndarray  # accumulated per-sample delay

    @property
    def delay(self) -> float:
        """Power-weighted mean delay of the output."""
        w = np.abs(self.field.values) ** 2
        return float((w * self.delay_field).sum() / w.sum()) if w.sum() > 0 else 0.0


def _diag_row(step, z, f):
    cx, cy, width = centroid_and_width(f)
    return {
        "step": step,
        "z": z,
        "power": field_power(f),
        "centroid_x": cx,
        "centroid_y": cy,
        "rms_width": width,
    }


def propagate_through_medium(
    initial_probe: ComplexField2D,
    controls: ControlPair | Sequence[ControlPair],
    params: MediumParams,
    config: PropagationConfig,
    *,
    delta=None,
) -> PropagationResult:
    """Thin-cloud march of the probe over ``config.n_steps`` steps of ``config.dz``.

    ``controls`` is static or a sequence of ``n_steps + 1`` pairs, one per
    z-plane crossed.
    """
    if config.dz * config.n_steps > params.length * (1 + 1e-12):
        raise ValueError(
            f"march length {config.dz * config.n_steps} exceeds medium length {params.length}"
        )
    if isinstance(controls, ControlPair):
        planes = [controls] * (config.n_steps + 1)
    else:
        planes = list(controls)
        if len(planes) != config.n_steps + 1:
            raise ValueError(f"need {config.n_steps + 1} control planes, got {len(planes)}")
    mask = absorber_mask(initial_probe.grid, config.boundary, config.dz)
    G = params.coupling_density
    f = initial_probe
    delay = np.zeros(f.grid.shape)
    rows = [_diag_row(0, 0.0, f)]
    for n in range(config.n_steps):
        f = slowlight_step(f, (planes[n], planes[n + 1]), params, config.dz, delta=delta, mask=mask)
        v = 0.5 * (group_velocity_array(_total(planes[n]), G)
                   + group_velocity_array(_total(planes[n + 1]), G))
        inv_v = np.where(v > 0, 1.0 / np.where(v > 0, v, 1.0), np.inf)
        offset = 0.0 if config.frame == "lab" else 1.0
        delay = delay + config.dz * (inv_v - offset)
        rows.append(_diag_row(n + 1, (n + 1) * config.dz, f))
    delay = np.where(np.isfinite(delay), delay, 0.0)
    return PropagationResult(f, rows, delay)


DIAGNOSTIC_COLUMNS = ("step", "z", "power", "centroid_x", "centroid_y", "rms_width")


def write_diagnostics_csv(rows: list[dict], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=DIAGNOSTIC_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(row[k]) if isinstance(row[k], float) else row[k]
                        for k in DIAGNOSTIC_COLUMNS})
    return path


# -- z-resolved transit -----------------------------------------------------

@dataclass
class TransitResult:
    times: np.ndarray
    inflow: np.ndarray
    outflow: np.ndarray
    dz: float
    dt: float
    max_courant: float

    @staticmethod
    def _centroid(t, e):
        w = np.abs(e) ** 2
        return float((t * w).sum() / w.sum())

    @property
    def delay(self) -> float:
        """Shift of the intensity centroid between entry and exit."""
        return self._centroid(self.times, self.outflow) - self._centroid(self.times, self.inflow)

    @property
    def power_ratio(self) -> float:
        """Time-integrated exit intensity over entry intensity."""
        return float(np.sum(np.abs(self.outflow) ** 2) / np.sum(np.abs(self.inflow) ** 2))


def _as_function(x) -> Callable[[float], float]:
    return x if callable(x) else (lambda t, x=float(x): x)


def transit_pulse(
    inflow: Callable[[float], complex],
    omega,
    params: MediumParams,
    *,
    nz: int,
    dt: float,
    t_end: float,
    delta=0.0,
) -> TransitResult:
    """Lab-frame run of a transversely uniform pulse through the medium.

    ``inflow(t)`` is the probe at the entrance face, ``omega`` the uniform
    total control Rabi frequency (constant or a function of time).  The state
    is the polariton amplitude ``E / cos(theta)`` on ``nz + 1`` nodes spanning
    the medium; its advection uses first-order upwinding and must satisfy
    ``v_g dt <= dz``.
    """
    if nz < 2:
        raise ValueError("need at least 2 cells along z")
    if not dt > 0 or not t_end > 0:
        raise ValueError("dt and t_end must be positive")
    omega_f = _as_function(omega)
    delta_f = _as_function(delta)
    G = params.coupling_density
    dz = params.length / nz
    n_steps = int(math.ceil(t_end / dt))
    times = dt * np.arange(n_steps + 1)

    def cos_theta(t):
        return float(photon_fraction(np.array(omega_f(t)), G))

    def vg(t):
        return float(group_velocity_array(np.array(omega_f(t)), G))

    def local(psi, t, tau):
        return psi * np.exp(-1j * delta_f(t) * (1.0 - vg(t)) * tau)

    def boundary(t):
        e = complex(inflow(t))
        c = cos_theta(t)
        if c == 0:
            if e != 0:
                raise ZeroControlField("probe enters while the controls are off")
            return 0j
        return e / c

    psi = np.zeros(nz + 1, dtype=np.complex128)
    psi[0] = boundary(0.0)
    e_in = np.empty(n_steps + 1, dtype=np.complex128)
    e_out = np.empty(n_steps + 1, dtype=np.complex128)
    e_in[0] = inflow(0.0)
    e_out[0] = cos_theta(0.0) * psi[-1]
    max_nu = 0.0
    for n in range(n_steps):
        t = times[n]
        nu = vg(t + 0.5 * dt) * dt / dz
        if nu > 1.0 + 1e-12:
            raise StepTooLarge(f"Courant number {nu:.4g} > 1 (v_g dt > dz) at t = {t:g}")
        max_nu = max(max_nu, nu)
        psi = local(psi, t, 0.5 * dt)
        psi[1:] = psi[1:] - nu * (psi[1:] - psi[:-1])
        psi = local(psi, t + dt, 0.5 * dt)
        psi[0] = boundary(t + dt)
        e_in[n + 1] = inflow(t + dt)
        e_out[n + 1] = cos_theta(t + dt) * psi[-1]
    return TransitResult(times, e_in, e_out, dz, dt, max_nu)
