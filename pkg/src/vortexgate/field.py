"""Sampled wave fields and the grids they live on.

Arrays are indexed ``[iy, ix]`` and pixel ``i`` sits at ``(i - n/2) * pitch``,
so the optical axis falls exactly on pixel ``n/2`` of an even grid.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractViolation


@dataclass(frozen=True)
class GridSpec:
    """Square sampling grid.

    Parameters
    ----------
    n : int
        Pixels per side. Must be even and at least 16.
    extent : float
        Physical side length in metres.
    """

    n: int
    extent: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16 or self.n % 2:
            raise ContractViolation(f"grid size must be an even integer >= 16, got {self.n}")
        if not self.extent > 0:
            raise ContractViolation(f"grid extent must be positive, got {self.extent}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def pitch(self) -> float:
        return self.extent / self.n

    def axis(self) -> np.ndarray:
        return axis_coordinates(self.n, self.pitch)

    def mesh(self):
        """Return ``(X, Y)`` coordinate arrays."""
        x = self.axis()
        return np.meshgrid(x, x)


def axis_coordinates(n: int, pitch: float) -> np.ndarray:
    return (np.arange(n) - n // 2) * pitch


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex scalar field on a uniform Cartesian grid at one axial plane.

    Parameters
    ----------
    values : ndarray
        Complex amplitudes indexed ``[iy, ix]``. Stored as a read-only copy.
    pitch : float
        Pixel pitch in metres.
    z_pos : float
        Axial position in metres.
    wavelength : float
        Wavelength in metres, carried along so propagators and thin elements
        need no extra arguments.
    """

    values: np.ndarray
    pitch: float
    z_pos: float
    wavelength: float

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128, copy=True)
        if v.ndim != 2:
            raise ContractViolation("field values must be a 2D array")
        ny, nx = v.shape
        for n in (nx, ny):
            if n < 16 or n % 2:
                raise ContractViolation(f"field dimensions must be even and >= 16, got {v.shape}")
        if not self.pitch > 0 or not self.wavelength > 0:
            raise ContractViolation("pitch and wavelength must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "pitch", float(self.pitch))
        object.__setattr__(self, "z_pos", float(self.z_pos))
        object.__setattr__(self, "wavelength", float(self.wavelength))

    @property
    def n_x(self) -> int:
        return self.values.shape[1]

    @property
    def n_y(self) -> int:
        return self.values.shape[0]

    @property
    def wavenumber(self) -> float:
        return 2 * np.pi / self.wavelength

    @property
    def extent(self) -> float:
        return self.n_x * self.pitch

    def coords(self):
        """Return ``(X, Y)`` coordinate arrays in metres."""
        return np.meshgrid(axis_coordinates(self.n_x, self.pitch),
                           axis_coordinates(self.n_y, self.pitch))

    def norm(self) -> float:
        """Discrete L2 norm squared, ``sum |u|^2 * pitch^2``."""
        return float(np.sum(np.abs(self.values) ** 2) * self.pitch ** 2)

    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def with_values(self, values, **changes) -> "WaveField":
        return replace(self, values=values, **changes)

    def normalized(self) -> "WaveField":
        return self.with_values(self.values / np.sqrt(self.norm()))

    def __add__(self, other: "WaveField") -> "WaveField":
        _check_compatible(self, other)
        return self.with_values(self.values + other.values)

    def __mul__(self, scalar) -> "WaveField":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__


def _check_compatible(a: WaveField, b: WaveField):
    if a.values.shape != b.values.shape or not np.isclose(a.pitch, b.pitch, rtol=1e-12):
        raise ContractViolation("fields live on different grids")


def inner(a: WaveField, b: WaveField) -> complex:
    """Discrete inner product ``<a|b> = sum conj(a) b pitch^2``."""
    _check_compatible(a, b)
    return complex(np.vdot(a.values, b.values) * a.pitch ** 2)


def centroid(f: WaveField):
    """Intensity centroid ``(x, y)`` in metres."""
    X, Y = f.coords()
    inten = f.intensity()
    tot = inten.sum()
    return float((X * inten).sum() / tot), float((Y * inten).sum() / tot)


def sample_bilinear(arr: np.ndarray, x: np.ndarray, y: np.ndarray, pitch: float) -> np.ndarray:
    """Bilinear interpolation of ``arr`` at physical points ``(x, y)``.

    Points outside the grid read as zero.
    """
    ny, nx = arr.shape
    fx = x / pitch + nx // 2
    fy = y / pitch + ny // 2
    x0 = np.floor(fx).astype(int)
    y0 = np.floor(fy).astype(int)
    tx = fx - x0
    ty = fy - y0
    out = np.zeros(np.broadcast(fx, fy).shape, dtype=arr.dtype)
    for dy, wy in ((0, 1 - ty), (1, ty)):
        for dx, wx in ((0, 1 - tx), (1, tx)):
            xi = x0 + dx
            yi = y0 + dy
            ok = (xi >= 0) & (xi < nx) & (yi >= 0) & (yi < ny)
            vals = np.where(ok, arr[np.clip(yi, 0, ny - 1), np.clip(xi, 0, nx - 1)], 0)
            out = out + wx * wy * vals
    return out


def rotate_array(arr: np.ndarray, angle: float, pitch: float = 1.0) -> np.ndarray:
    """Rigidly rotate an image counter-clockwise by ``angle`` about the axis pixel."""
    ny, nx = arr.shape
    X, Y = np.meshgrid(axis_coordinates(nx, pitch), axis_coordinates(ny, pitch))
    c, s = np.cos(angle), np.sin(angle)
    # output(r) = input(R^-1 r)
    return sample_bilinear(arr, c * X + s * Y, -s * X + c * Y, pitch)
