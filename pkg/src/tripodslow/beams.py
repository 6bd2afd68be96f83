"""Control and probe beam profiles and the ratios built from them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ZeroControlField
from .grid import ComplexField2D, TransverseGrid, same_grid


@dataclass(frozen=True)
class ControlBeamSpec:
    """Laguerre-Gaussian control beam of order 0 or 1.

    The sampled Rabi frequency is
    ``relative_factor * amplitude * (rho e^{i phi})**lg_order * exp(-rho^2/width^2)``.
    """

    lg_order: int = 0
    amplitude: float = 1.0
    width: float = 10.0
    relative_factor: float = 1.0

    def __post_init__(self):
        if self.lg_order not in (0, 1):
            raise ValueError(f"only LG orders 0 and 1 are supported, got {self.lg_order}")
        if not self.width > 0:
            raise ValueError(f"beam width must be positive, got {self.width}")
        if not self.amplitude > 0:
            raise ValueError(f"beam amplitude must be positive, got {self.amplitude}")


@dataclass(frozen=True)
class ControlPair:
    """Rabi frequencies of the two control lasers on a common grid."""

    omega_c2: ComplexField2D
    omega_c3: ComplexField2D

    def __post_init__(self):
        same_grid(self.omega_c2, self.omega_c3)

    @property
    def grid(self) -> TransverseGrid:
        return self.omega_c2.grid

    def scaled(self, factor) -> "ControlPair":
        """Both controls multiplied by a common (possibly field-valued) factor."""
        return ControlPair(
            self.omega_c2.with_values(self.omega_c2.values * factor),
            self.omega_c3.with_values(self.omega_c3.values * factor),
        )


def lg_field(spec: ControlBeamSpec, grid: TransverseGrid) -> ComplexField2D:
    amp = spec.relative_factor * spec.amplitude
    envelope = np.exp(-((grid.rho / spec.width) ** 2))
    if spec.lg_order == 0:
        return ComplexField2D(grid, amp * envelope)
    X, Y = grid.xy
    # rho e^{i phi} == x + i y; exact zero at the core sample
    return ComplexField2D(grid, amp * (X + 1j * Y) * envelope)


def make_pair(
    spec2: ControlBeamSpec | None, spec3: ControlBeamSpec | None, grid: TransverseGrid
) -> ControlPair:
    """Build a pair from two beam specs; ``None`` means that laser is off."""
    zero = ComplexField2D(grid, np.zeros(grid.shape))
    c2 = lg_field(spec2, grid) if spec2 is not None else zero
    c3 = lg_field(spec3, grid) if spec3 is not None else zero
    return ControlPair(c2, c3)


def _total(pair: ControlPair) -> np.ndarray:
    return np.sqrt(np.abs(pair.omega_c2.values) ** 2 + np.abs(pair.omega_c3.values) ** 2)


def total_rabi(pair: ControlPair) -> ComplexField2D:
    return ComplexField2D(pair.grid, _total(pair))


def _ratios(pair: ControlPair, mask=None):
    """xi-ratios; raises where the total Rabi frequency vanishes inside ``mask``.

    Outside ``mask`` zero-control samples get xi = 0.
    """
    omega = _total(pair)
    zero = omega == 0
    bad = zero if mask is None else zero & mask
    if np.any(bad):
        n = int(bad.sum())
        raise ZeroControlField(
            f"total control Rabi frequency vanishes at {n} sample(s); "
            "bright/dark states are undefined there",
            count=n,
        )
    safe = np.where(zero, 1.0, omega)
    xi2 = np.where(zero, 0.0, pair.omega_c2.values / safe)
    xi3 = np.where(zero, 0.0, pair.omega_c3.values / safe)
    return xi2, xi3, omega


def xi_ratios(pair: ControlPair) -> tuple[ComplexField2D, ComplexField2D]:
    xi2, xi3, _ = _ratios(pair)
    g = pair.grid
    return ComplexField2D(g, xi2), ComplexField2D(g, xi3)


def two_photon_mismatch(
    pair_t: Sequence[ControlPair], omega21: float, omega31: float, dt: float
) -> list[ComplexField2D]:
    """Two-photon mismatch at every time sample of a control sequence.

    ``delta = w21 |xi2|^2 + w31 |xi3|^2 - i (xi2 d/dt xi2* + xi3 d/dt xi3*)``
    with centred differences inside the sequence and second-order one-sided
    ones at its ends (first order when only two samples exist).
    """
    if len(pair_t) < 2:
        raise ValueError("need at least 2 time samples")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = pair_t[0].grid
    xs = [_ratios(p)[:2] for p in pair_t]
    xi2 = np.stack([x[0] for x in xs])
    xi3 = np.stack([x[1] for x in xs])
    edge = 2 if len(pair_t) > 2 else 1
    # offsetting by the first sample keeps static ratios exactly stationary
    d2 = np.gradient(np.conj(xi2 - xi2[0]), dt, axis=0, edge_order=edge)
    d3 = np.gradient(np.conj(xi3 - xi3[0]), dt, axis=0, edge_order=edge)
    delta = (
        omega21 * np.abs(xi2) ** 2
        + omega31 * np.abs(xi3) ** 2
        - 1j * (xi2 * d2 + xi3 * d3)
    )
    return [ComplexField2D(grid, d) for d in delta]


def static_mismatch(pair: ControlPair, omega21: float, omega31: float, mask=None) -> np.ndarray:
    """Mismatch for time-independent controls (no derivative term)."""
    xi2, xi3, _ = _ratios(pair, mask)
    return omega21 * np.abs(xi2) ** 2 + omega31 * np.abs(xi3) ** 2
