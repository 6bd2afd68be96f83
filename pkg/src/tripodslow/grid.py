"""Transverse sampling grid, complex fields and the spectral machinery.

All lengths are in units of the optical wavelength, so the probe wave number
is ``k = 2*pi``.  Field arrays have shape ``(ny, nx)``: the x index runs
fastest, matching row-major order of the binary dump format.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.fft

from .errors import TripodError

WAVENUMBER = 2.0 * np.pi
DUMP_MAGIC = b"TSL1"

_fft_workers = 1


def set_fft_workers(n: int) -> None:
    """Set the thread count used by the spectral transforms."""
    global _fft_workers
    if n < 1:
        raise ValueError(f"thread count must be >= 1, got {n}")
    _fft_workers = int(n)


def get_fft_workers() -> int:
    return _fft_workers


@dataclass(frozen=True)
class TransverseGrid:
    """Uniform Cartesian sampling of the transverse plane, centred on the axis."""

    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if int(n) != n or n < 8 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 8, got {n}")
        for name in ("lx", "ly"):
            length = getattr(self, name)
            if not np.isfinite(length) or length <= 0:
                raise ValueError(f"{name} must be positive, got {length}")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @cached_property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx // 2) * self.dx

    @cached_property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) - self.ny // 2) * self.dy

    @cached_property
    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays ``(X, Y)`` of shape ``(ny, nx)``."""
        X, Y = np.meshgrid(self.x, self.y)
        X.flags.writeable = False
        Y.flags.writeable = False
        return X, Y

    @cached_property
    def rho(self) -> np.ndarray:
        X, Y = self.xy
        r = np.hypot(X, Y)
        r.flags.writeable = False
        return r

    @cached_property
    def phi(self) -> np.ndarray:
        X, Y = self.xy
        p = np.arctan2(Y, X)
        p.flags.writeable = False
        return p

    @cached_property
    def kxy(self) -> tuple[np.ndarray, np.ndarray]:
        """Angular spatial frequencies, centred to match :func:`transverse_spectrum`."""
        kx = 2 * np.pi * (np.arange(self.nx) - self.nx // 2) / self.lx
        ky = 2 * np.pi * (np.arange(self.ny) - self.ny // 2) / self.ly
        KX, KY = np.meshgrid(kx, ky)
        KX.flags.writeable = False
        KY.flags.writeable = False
        return KX, KY

    @property
    def origin_index(self) -> tuple[int, int]:
        """Array index ``(row, col)`` of the sample at rho = 0."""
        return (self.ny // 2, self.nx // 2)


def make_grid(nx: int, ny: int, lx: float, ly: float) -> TransverseGrid:
    return TransverseGrid(nx, ny, float(lx), float(ly))


@dataclass(frozen=True)
class ComplexField2D:
    """Complex amplitude sampled on a grid.

    ``domain`` is ``"space"`` for ordinary fields and ``"spectrum"`` for the
    output of :func:`transverse_spectrum`.  Values are copied and frozen.
    """

    grid: TransverseGrid
    values: np.ndarray
    domain: str = field(default="space")

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains NaN or Inf")
        if self.domain not in ("space", "spectrum"):
            raise ValueError(f"unknown domain {self.domain!r}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def with_values(self, values) -> "ComplexField2D":
        return ComplexField2D(self.grid, values, self.domain)

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    def at_origin(self) -> complex:
        return complex(self.values[self.grid.origin_index])


def constant_field(grid: TransverseGrid, value=0.0) -> ComplexField2D:
    return ComplexField2D(grid, np.full(grid.shape, value, dtype=np.complex128))


def gaussian_field(grid: TransverseGrid, amplitude, width) -> ComplexField2D:
    """``amplitude * exp(-rho^2 / width^2)``."""
    return ComplexField2D(grid, amplitude * np.exp(-(grid.rho / width) ** 2))


def same_grid(*fields: ComplexField2D) -> TransverseGrid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ValueError("fields live on different grids")
    return grid


def transverse_spectrum(f: ComplexField2D) -> ComplexField2D:
    """Continuous-normalised 2D Fourier transform with the zero frequency centred."""
    if f.domain != "space":
        raise ValueError("transverse_spectrum expects a space-domain field")
    g = f.grid
    spec = scipy.fft.fftshift(
        scipy.fft.fft2(scipy.fft.ifftshift(f.values), workers=_fft_workers)
    )
    return ComplexField2D(g, spec * g.cell_area, "spectrum")


def inverse_spectrum(s: ComplexField2D) -> ComplexField2D:
    if s.domain != "spectrum":
        raise ValueError("inverse_spectrum expects a spectrum-domain field")
    g = s.grid
    vals = scipy.fft.fftshift(
        scipy.fft.ifft2(scipy.fft.ifftshift(s.values), workers=_fft_workers)
    )
    return ComplexField2D(g, vals / g.cell_area, "space")


def spectral_power(s: ComplexField2D) -> float:
    """Parseval counterpart of :func:`field_power` for a spectrum."""
    g = s.grid
    return float(np.sum(np.abs(s.values) ** 2) / (g.lx * g.ly))


def field_power(f: ComplexField2D) -> float:
    """Transverse quadrature of ``|E|^2`` (sum of ``|values|^2 dx dy``)."""
    if f.domain == "spectrum":
        return spectral_power(f)
    return float(np.sum(np.abs(f.values) ** 2) * f.grid.cell_area)


def centroid_and_width(f: ComplexField2D) -> tuple[float, float, float]:
    """Intensity-weighted centroid ``(x, y)`` and rms radius about it."""
    g = f.grid
    w = np.abs(f.values) ** 2
    total = w.sum()
    if total == 0:
        return 0.0, 0.0, 0.0
    X, Y = g.xy
    cx = float((w * X).sum() / total)
    cy = float((w * Y).sum() / total)
    r2 = float((w * ((X - cx) ** 2 + (Y - cy) ** 2)).sum() / total)
    return cx, cy, float(np.sqrt(r2))


# -- field dumps ------------------------------------------------------------

_HEADER = struct.Struct("<4sIIdd")


def dump_field(f: ComplexField2D, path) -> Path:
    """Write the ``TSL1`` binary record for a field."""
    g = f.grid
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = np.empty((g.ny, g.nx, 2), dtype="<f8")
    body[..., 0] = f.values.real
    body[..., 1] = f.values.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(DUMP_MAGIC, g.nx, g.ny, g.lx, g.ly))
        fh.write(body.tobytes(order="C"))
    return path


def load_field(path) -> ComplexField2D:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise TripodError(f"{path}: truncated field dump")
    magic, nx, ny, lx, ly = _HEADER.unpack_from(data)
    if magic != DUMP_MAGIC:
        raise TripodError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + nx * ny * 16
    if len(data) != expected:
        raise TripodError(f"{path}: expected {expected} bytes, found {len(data)}")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(ny, nx, 2)
    return ComplexField2D(make_grid(nx, ny, lx, ly), body[..., 0] + 1j * body[..., 1])


def export_csv(f: ComplexField2D, path) -> Path:
    """Plot-friendly export: one ``x,y,re,im`` line per sample."""
    g = f.grid
    X, Y = g.xy
    table = np.column_stack(
        [X.ravel(), Y.ravel(), f.values.real.ravel(), f.values.imag.ravel()]
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, table, delimiter=",", header="x,y,re,im", comments="", fmt="%.17g")
    return path
