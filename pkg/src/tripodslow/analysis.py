"""Observables: vortex winding numbers, the exponential integral, energy-loss laws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import AmplitudeTooSmall, GridTooCoarse, WidthMismatch
from .grid import ComplexField2D
from .quadrature import adaptive_quad

EULER_GAMMA = 0.57721566490153286060651209008240243


# -- winding number ---------------------------------------------------------

def _sample_bilinear(f: ComplexField2D, xs, ys):
    g = f.grid
    cols = xs / g.dx + g.nx // 2
    rows = ys / g.dy + g.ny // 2
    coords = np.vstack([rows, cols])
    re = map_coordinates(f.values.real, coords, order=1, mode="nearest")
    im = map_coordinates(f.values.imag, coords, order=1, mode="nearest")
    return re + 1j * im


def peak_ring_radius(f: ComplexField2D) -> float:
    """Radius of the maximum of the azimuthally averaged amplitude.

    Rings closer than two cells to the axis or to the window edge are skipped.
    """
    g = f.grid
    dr = min(g.dx, g.dy)
    bins = np.rint(g.rho / dr).astype(int).ravel()
    amp = np.abs(f.values).ravel()
    sums = np.bincount(bins, weights=amp)
    counts = np.bincount(bins)
    mean = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    r_max = int(0.5 * min(g.lx, g.ly) / dr) - 2
    lo = 2
    if r_max <= lo:
        raise AmplitudeTooSmall("grid too small to place a sampling circle")
    k = lo + int(np.argmax(mean[lo:r_max + 1]))
    return k * dr


def winding_residual(f: ComplexField2D, radius: float | None = None, n_samples: int = 64):
    """Unrounded winding (sum of phase increments / 2 pi) around a centred circle."""
    if radius is None:
        radius = peak_ring_radius(f)
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    g = f.grid
    floor = 1e-9 * np.max(np.abs(f.values))
    n = max(int(n_samples), 64, int(math.ceil(4 * math.pi * radius / min(g.dx, g.dy))))
    for _ in range(8):
        theta = 2 * np.pi * np.arange(n) / n
        z = _sample_bilinear(f, radius * np.cos(theta), radius * np.sin(theta))
        if floor == 0 or np.any(np.abs(z) <= floor):
            raise AmplitudeTooSmall(
                f"amplitude on the circle of radius {radius:g} drops below 1e-9 of the maximum"
            )
        steps = np.angle(np.roll(z, -1) / z)
        if np.max(np.abs(steps)) < np.pi / 2:
            return float(steps.sum() / (2 * np.pi))
        n *= 2
    raise AmplitudeTooSmall("phase varies too quickly on the sampling circle")


def winding_number(f: ComplexField2D, radius: float | None = None, n_samples: int = 64) -> int:
    """Topological charge of the field around the grid axis."""
    w = winding_residual(f, radius, n_samples)
    ell = int(round(w))
    if abs(w - ell) >= 0.05:
        raise AmplitudeTooSmall(f"winding {w:.4f} is not close to an integer")
    return ell


# -- exponential integral ---------------------------------------------------

def _e1_scaled_cf(u: float) -> float:
    """``exp(u) E1(u)`` by the modified-Lentz continued fraction (u >~ 1)."""
    tiny = 1e-300
    b = u + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"continued fraction for E1({u}) did not converge")


def _ei_series(x: float) -> float:
    """Ramanujan's series; for x < 0 all terms share one sign, so no cancellation."""
    total = 0.0
    term = 1.0  # x^n / (n! 2^(n-1)) at n = 0 would be 2; start at n = 1 below
    inner = 0.0
    for n in range(1, 400):
        term = x if n == 1 else term * x / (2.0 * n)
        if (n - 1) % 2 == 0:
            inner += 1.0 / n  # adds 1/(2k+1) with k = (n-1)/2
        contrib = (-1.0) ** (n - 1) * term * inner
        total += contrib
        if abs(contrib) < 1e-17 * abs(total):
            break
    return EULER_GAMMA + math.log(abs(x)) + math.exp(x / 2.0) * total


SERIES_LIMIT = 10.0


def exponential_integral_ei(x: float) -> float:
    """Ei(x) for negative arguments, ``-int_{-x}^inf e^{-t}/t dt``."""
    x = float(x)
    if not x < 0:
        raise ValueError(f"Ei is implemented for x < 0 only, got {x}")
    if -x < SERIES_LIMIT:
        return _ei_series(x)
    return -math.exp(x) * _e1_scaled_cf(-x)


def _scaled_e1(u: float) -> float:
    """``exp(u) E1(u)`` for u > 0 without overflow."""
    if u < SERIES_LIMIT:
        return -math.exp(u) * _ei_series(-u)
    return _e1_scaled_cf(u)


# -- loss laws --------------------------------------------------------------

@dataclass(frozen=True)
class LossQuery:
    b: float
    sigma_p: float
    sigma_r: float = 20.0
    sigma_r3: float = 20.0
    sigma_s: float = 20.0

    def __post_init__(self):
        if not self.b >= 0:
            raise ValueError(f"b must be >= 0, got {self.b}")
        for name in ("sigma_p", "sigma_r", "sigma_r3", "sigma_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def u(self) -> float:
        return 2.0 * self.b**2 / self.sigma_p**2


def loss_ratio_analytic(query: LossQuery) -> float:
    """Retrieved-to-stored energy ratio ``1 + u e^u Ei(-u)``, ``u = 2 b^2 / sigma_p^2``."""
    if query.sigma_r != query.sigma_r3:
        raise WidthMismatch(
            f"closed form needs sigma_r == sigma_r3 (got {query.sigma_r}, {query.sigma_r3}); "
            "use loss_ratio_numeric"
        )
    u = query.u
    if u == 0:
        return 1.0
    return 1.0 - u * _scaled_e1(u)


def _loss_integrand(query: LossQuery):
    # integration variable y = 2 x / sigma_p^2 with x = rho^2
    half_p2 = 0.5 * query.sigma_p**2
    if query.b == 0:
        return lambda y: np.exp(-np.asarray(y, dtype=float))
    log_b2 = 2.0 * math.log(query.b)
    growth = 2.0 * (1.0 / query.sigma_r**2 - 1.0 / query.sigma_r3**2)

    def integrand(y):
        y = np.asarray(y, dtype=float)
        x = half_p2 * y
        with np.errstate(divide="ignore"):
            log_x = np.log(x)
        log_den = np.logaddexp(log_x, log_b2 + growth * x)
        return np.exp(log_x - y - log_den)

    return integrand


def loss_ratio_numeric(query: LossQuery, *, rel_tol=1e-12, max_intervals=2000) -> float:
    """Quadrature of the radial energy integral; allows ``sigma_r != sigma_r3``."""
    value, _ = adaptive_quad(_loss_integrand(query), 0.0, math.inf,
                             abs_tol=1e-15, rel_tol=rel_tol, max_intervals=max_intervals)
    return value


def loss_curve(b_values, sigma_p, sigma_r=20.0, sigma_r3=None):
    """Rows ``(b, analytic, numeric)``; analytic is NaN when widths differ."""
    if sigma_r3 is None:
        sigma_r3 = sigma_r
    rows = []
    for b in b_values:
        q = LossQuery(float(b), sigma_p, sigma_r, sigma_r3)
        analytic = loss_ratio_analytic(q) if sigma_r == sigma_r3 else float("nan")
        rows.append((float(b), analytic, loss_ratio_numeric(q)))
    return rows


def edge_power_fraction(density: np.ndarray, grid, band: float = 0.1) -> float:
    """Share of a power density lying in the outer ``band`` of the window."""
    X, Y = grid.xy
    edge = np.maximum(np.abs(X) / (0.5 * grid.lx), np.abs(Y) / (0.5 * grid.ly)) > 1.0 - band
    total = density.sum()
    return float(density[edge].sum() / total) if total > 0 else 0.0


def loss_ratio_from_fields(result) -> float:
    """Energy ratio of a :class:`RetrievalResult`, longitudinal weight included."""
    grid = result.probe.grid
    dens_in = np.abs(result.probe_in.values) ** 2
    dens_out = np.abs(result.probe.values) ** 2 * result.length_weight
    for name, dens in (("input", dens_in), ("output", dens_out)):
        frac = edge_power_fraction(dens, grid)
        if frac > 0.01:
            raise GridTooCoarse(f"{frac:.1%} of the {name} power lies in the outer 10% of the window")
    if result.energy_in == 0:
        raise ValueError("stored probe carries no energy")
    return result.energy_out / result.energy_in
