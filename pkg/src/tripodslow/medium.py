"""Atomic-state algebra of the tripod medium.

Frequencies are in units of c/lambda and times in lambda/c, so the speed of
light is 1 throughout.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .beams import ControlPair, _ratios, _total
from .errors import ZeroControlField
from .grid import ComplexField2D, same_grid


@dataclass(frozen=True)
class MediumParams:
    coupling_density: float = 1.0e8  # g^2 n
    gamma: float = 1.0
    omega01: float = 0.0
    omega21: float = 0.0
    omega31: float = 0.0
    length: float = 100.0
    phi1_amplitude: float = 1.0  # sqrt(n)
    condensate_phase: float = 0.0  # S_1, frozen

    def __post_init__(self):
        if not self.coupling_density >= 0:
            raise ValueError(f"coupling_density must be >= 0, got {self.coupling_density}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.length > 0:
            raise ValueError(f"length must be > 0, got {self.length}")
        if not self.phi1_amplitude > 0:
            raise ValueError(f"phi1_amplitude must be > 0, got {self.phi1_amplitude}")

    @property
    def g(self) -> float:
        return float(np.sqrt(self.coupling_density)) / self.phi1_amplitude

    @property
    def phi1(self) -> complex:
        return self.phi1_amplitude * cmath.exp(1j * self.condensate_phase)

    @property
    def g_phi1(self) -> complex:
        """Coupling times ground-state amplitude; ``|g phi1|^2 = g^2 n``."""
        return self.g * self.phi1


@dataclass(frozen=True)
class AtomicFields:
    phi2: ComplexField2D
    phi3: ComplexField2D

    def __post_init__(self):
        same_grid(self.phi2, self.phi3)


def to_bright_dark(atomic: AtomicFields, pair: ControlPair):
    """Bright and dark combinations of the two ground-state coherences."""
    same_grid(atomic.phi2, pair.omega_c2)
    xi2, xi3, _ = _ratios(pair)
    p2, p3 = atomic.phi2.values, atomic.phi3.values
    g = pair.grid
    phiB = xi2 * p2 + xi3 * p3
    phiD = np.conj(xi3) * p2 - np.conj(xi2) * p3
    return ComplexField2D(g, phiB), ComplexField2D(g, phiD)


def from_bright_dark(phiB: ComplexField2D, phiD: ComplexField2D, pair: ControlPair) -> AtomicFields:
    same_grid(phiB, phiD, pair.omega_c2)
    xi2, xi3, _ = _ratios(pair)
    b, d = phiB.values, phiD.values
    g = pair.grid
    return AtomicFields(
        ComplexField2D(g, np.conj(xi2) * b + xi3 * d),
        ComplexField2D(g, np.conj(xi3) * b - xi2 * d),
    )


def adiabatic_bright(probe: ComplexField2D, pair: ControlPair, params: MediumParams) -> ComplexField2D:
    """Bright-state amplitude slaved to the probe, ``-g phi1 E / Omega_c``."""
    same_grid(probe, pair.omega_c2)
    omega = _total(pair)
    if np.any(omega == 0):
        n = int(np.count_nonzero(omega == 0))
        raise ZeroControlField(f"total control Rabi frequency vanishes at {n} sample(s)", n)
    return probe.with_values(-params.g_phi1 * probe.values / omega)


def group_velocity_array(omega: np.ndarray, coupling_density: float) -> np.ndarray:
    omega2 = np.abs(omega) ** 2
    if coupling_density == 0:
        return np.ones_like(omega2)
    # equal to 1/(1 + G/Omega^2), and exactly 0 at Omega = 0
    return omega2 / (omega2 + coupling_density)


def group_velocity(pair: ControlPair, params: MediumParams) -> ComplexField2D:
    """``v_g / c = 1 / (1 + g^2 n / Omega_c^2)``; zero where the controls vanish."""
    return ComplexField2D(pair.grid, group_velocity_array(_total(pair), params.coupling_density))


def photon_fraction(omega: np.ndarray, coupling_density: float) -> np.ndarray:
    """``cos(theta) = Omega / sqrt(Omega^2 + g^2 n)``: the light share of the polariton."""
    omega = np.abs(omega)
    if coupling_density == 0:
        return np.ones_like(omega)
    return omega / np.sqrt(omega**2 + coupling_density)


def excited_from_bright(
    phiB_t: Sequence[ComplexField2D],
    pair: ControlPair | Sequence[ControlPair],
    delta,
    dt: float,
) -> list[ComplexField2D]:
    """Excited-state amplitude ``Omega_c^{-1} (-i d/dt + delta) phi_B`` per time sample.

    ``pair`` may be one static pair or one pair per time sample; ``delta`` a
    scalar, one field, or one field per time sample.
    """
    n = len(phiB_t)
    if n < 2:
        raise ValueError("need at least 2 time samples")
    grid = same_grid(*phiB_t)
    pairs = [pair] * n if isinstance(pair, ControlPair) else list(pair)
    if len(pairs) != n:
        raise ValueError("control sequence length does not match phiB_t")
    b = np.stack([f.values for f in phiB_t])
    dbdt = np.gradient(b - b[0], dt, axis=0, edge_order=2 if n > 2 else 1)
    if isinstance(delta, (list, tuple)):
        if len(delta) != n:
            raise ValueError("delta sequence length does not match phiB_t")
        ds = [getattr(x, "values", x) for x in delta]
    else:
        ds = [getattr(delta, "values", delta)] * n
    out = []
    for i, p in enumerate(pairs):
        omega = _total(p)
        if np.any(omega == 0):
            raise ZeroControlField("total control Rabi frequency vanishes", int((omega == 0).sum()))
        out.append(ComplexField2D(grid, (-1j * dbdt[i] + ds[i] * b[i]) / omega))
    return out
