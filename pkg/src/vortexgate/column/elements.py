"""Column elements and their thin transmission functions."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation
from ..field import WaveField

_SUPERSAMPLE = 16


@dataclass(frozen=True)
class Drift:
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ContractViolation(f"drift length must be positive, got {self.length}")


@dataclass(frozen=True)
class RoundLens:
    focal_length: float

    def __post_init__(self):
        _check_focal(self.focal_length)


@dataclass(frozen=True)
class Quadrupole:
    """Thin quadrupole, converging along ``axis_angle`` and diverging across it."""

    focal_length: float
    axis_angle: float = 0.0

    def __post_init__(self):
        _check_focal(self.focal_length)


@dataclass(frozen=True)
class HilbertPhasePlate:
    """Half-plane phase step.

    The edge passes through the optical axis along direction
    ``(cos a, sin a)``; the half-plane to its left, ``-x sin a + y cos a > 0``,
    is multiplied by ``amplitude_factor * exp(i phase_step)``.
    """

    edge_angle: float = 0.0
    phase_step: float = math.pi
    amplitude_factor: float = 1.0

    def __post_init__(self):
        if not 0 < self.amplitude_factor <= 1:
            raise ContractViolation(f"amplitude_factor must lie in (0, 1], got {self.amplitude_factor}")


@dataclass(frozen=True)
class CircularAperture:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ContractViolation(f"aperture radius must be positive, got {self.radius}")


Element = Drift | RoundLens | Quadrupole | HilbertPhasePlate | CircularAperture
THIN_ELEMENTS = (RoundLens, Quadrupole, HilbertPhasePlate, CircularAperture)


def _check_focal(f):
    if f == 0 or not math.isfinite(f):
        raise ContractViolation(f"focal length must be finite and nonzero, got {f}")


def _sub_offsets(pitch):
    s = (np.arange(_SUPERSAMPLE) + 0.5) / _SUPERSAMPLE - 0.5
    ox, oy = np.meshgrid(s * pitch, s * pitch)
    return ox.ravel(), oy.ravel()


def half_plane_coverage(f: WaveField, edge_angle: float) -> np.ndarray:
    """Area fraction of each pixel lying in ``-x sin a + y cos a > 0``."""
    X, Y = f.coords()
    sa, ca = math.sin(edge_angle), math.cos(edge_angle)
    u = -X * sa + Y * ca
    ox, oy = _sub_offsets(f.pitch)
    delta = np.sort(-ox * sa + oy * ca)
    # samples with u + delta > 0, counting exact zeros as half
    above = delta.size - np.searchsorted(delta, -u, side="right")
    on = np.searchsorted(delta, -u, side="right") - np.searchsorted(delta, -u, side="left")
    return (above + 0.5 * on) / delta.size


def disc_coverage(f: WaveField, radius: float) -> np.ndarray:
    """Area fraction of each pixel inside a centred disc."""
    X, Y = f.coords()
    r = np.hypot(X, Y)
    cov = (r < radius).astype(float)
    rim = np.abs(r - radius) <= f.pitch
    ox, oy = _sub_offsets(f.pitch)
    xs = X[rim][:, None] + ox[None, :]
    ys = Y[rim][:, None] + oy[None, :]
    cov[rim] = np.mean(np.hypot(xs, ys) < radius, axis=1)
    return cov


def transmission(f: WaveField, e) -> np.ndarray:
    """Complex transmission of a thin element sampled on ``f``'s grid."""
    k = f.wavenumber
    if isinstance(e, RoundLens):
        X, Y = f.coords()
        return np.exp(-1j * k * (X ** 2 + Y ** 2) / (2 * e.focal_length))
    if isinstance(e, Quadrupole):
        X, Y = f.coords()
        c, s = math.cos(e.axis_angle), math.sin(e.axis_angle)
        u = X * c + Y * s
        v = -X * s + Y * c
        return np.exp(-1j * k * (u ** 2 - v ** 2) / (2 * e.focal_length))
    if isinstance(e, HilbertPhasePlate):
        step = e.amplitude_factor * np.exp(1j * e.phase_step)
        return 1 + (step - 1) * half_plane_coverage(f, e.edge_angle)
    if isinstance(e, CircularAperture):
        if e.radius > f.extent / 2:
            raise ContractViolation(f"aperture radius {e.radius:.4g} m exceeds the grid half-extent")
        return disc_coverage(f, e.radius).astype(np.complex128)
    raise ContractViolation(f"{type(e).__name__} is not a thin element")


def apply_element(f: WaveField, e, **propagation_options) -> WaveField:
    """Apply one element: thin elements multiply pointwise, drifts propagate."""
    if isinstance(e, Drift):
        from .propagation import propagate_free
        return propagate_free(f, e.length, **propagation_options)
    return f.with_values(f.values * transmission(f, e))
