"""Analytic Laguerre-Gauss and Hermite-Gauss modes sampled on a grid.

The qubit basis is ``|R> = LG_{+1,0}`` and ``|L> = LG_{-1,0}`` with the
common envelope

    f(r, z) = A / w * exp(-r^2/w^2) * exp(i k r^2 / 2R) * exp(i (k z - 2 zeta))

and ``m = +1`` meaning a phase that grows counter-clockwise when looking
along +z. ``A`` is fixed by discrete normalization on the grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants
from scipy.special import eval_genlaguerre

from .errors import ContractViolation, SamplingError, UnsupportedModeError
from .field import GridSpec, WaveField

GOUY_CONVENTIONS = ("complementary", "standard")


def electron_wavelength(energy_kev: float) -> float:
    """Relativistic de Broglie wavelength in metres.

    Parameters
    ----------
    energy_kev : float
        Kinetic energy in keV, between 10 and 1000.
    """
    if not 10 <= energy_kev <= 1000:
        raise ContractViolation(f"energy must lie in [10, 1000] keV, got {energy_kev}")
    e = energy_kev * 1e3 * constants.e
    mc2 = constants.m_e * constants.c ** 2
    return constants.h / math.sqrt(2 * constants.m_e * e * (1 + e / (2 * mc2)))


@dataclass(frozen=True)
class BeamParams:
    """Gaussian beam parameters. ``rayleigh_zR`` must equal ``k w0^2 / 2``."""

    waist_w0: float
    rayleigh_zR: float
    wavenumber_k: float

    def __post_init__(self):
        if not (self.waist_w0 > 0 and self.rayleigh_zR > 0 and self.wavenumber_k > 0):
            raise ContractViolation("beam parameters must be positive")
        expected = self.wavenumber_k * self.waist_w0 ** 2 / 2
        if abs(self.rayleigh_zR - expected) > 1e-9 * expected:
            raise ContractViolation(
                f"inconsistent Rayleigh length {self.rayleigh_zR} (k w0^2/2 = {expected})")

    @classmethod
    def from_waist(cls, waist_w0: float, wavelength: float) -> "BeamParams":
        k = 2 * np.pi / wavelength
        return cls(waist_w0, k * waist_w0 ** 2 / 2, k)

    @classmethod
    def from_energy(cls, waist_w0: float, energy_kev: float) -> "BeamParams":
        return cls.from_waist(waist_w0, electron_wavelength(energy_kev))

    @classmethod
    def from_q(cls, q: complex, wavenumber_k: float) -> "BeamParams":
        """Beam whose complex parameter ``q = z - i zR`` is given (``z`` from the waist)."""
        zr = -complex(q).imag
        if zr <= 0:
            raise ContractViolation("q must have a negative imaginary part")
        return cls(math.sqrt(2 * zr / wavenumber_k), zr, wavenumber_k)

    @property
    def wavelength(self) -> float:
        return 2 * np.pi / self.wavenumber_k

    def width(self, z: float) -> float:
        return self.waist_w0 * math.sqrt(1 + (z / self.rayleigh_zR) ** 2)

    def curvature_radius(self, z: float) -> float:
        if z == 0:
            return math.inf
        return z + self.rayleigh_zR * self.rayleigh_zR / z

    def zeta(self, z: float, convention: str = "complementary") -> float:
        """Per-order Gouy angle.

        ``"complementary"`` returns ``arctan(zR/z)``, equal to pi/2 at z = 0;
        ``"standard"`` returns ``arctan(z/zR)``.
        """
        _check_convention(convention)
        if convention == "standard":
            return math.atan2(z, self.rayleigh_zR)
        if z == 0:
            return math.pi / 2
        return math.atan(self.rayleigh_zR / z)

    def q(self, z: float) -> complex:
        return complex(z, -self.rayleigh_zR)


def _check_convention(convention):
    if convention not in GOUY_CONVENTIONS:
        raise ContractViolation(f"unknown Gouy convention {convention!r}; use one of {GOUY_CONVENTIONS}")


def _carrier(k: float, z: float) -> complex:
    return complex(np.exp(1j * math.remainder(k * z, 2 * math.pi)))


def _check_sampling(p: BeamParams, g: GridSpec, z: float):
    w = p.width(z)
    ring_px = w / math.sqrt(2) / g.pitch
    if ring_px < 8:
        raise SamplingError(
            f"ring radius w(z)/sqrt(2) spans {ring_px:.2f} px (< 8); "
            f"use pitch <= {w / math.sqrt(2) / 8:.4g} m")
    if g.extent < 8 * w:
        raise SamplingError(
            f"grid extent {g.extent:.4g} m is below 8 w(z) = {8 * w:.4g} m")


def envelope(p: BeamParams, g: GridSpec, z: float,
             convention: str = "complementary") -> np.ndarray:
    """Unnormalized envelope ``f(r, z)`` shared by the order-one modes."""
    _check_convention(convention)
    X, Y = g.mesh()
    r2 = X ** 2 + Y ** 2
    w = p.width(z)
    R = p.curvature_radius(z)
    curv = 0.0 if math.isinf(R) else p.wavenumber_k / (2 * R)
    gouy = 2 * p.zeta(z, convention)
    return (np.exp(-r2 / w ** 2 + 1j * curv * r2) / w
            * _carrier(p.wavenumber_k, z) * np.exp(-1j * gouy))


def _normalized(values: np.ndarray, p: BeamParams, g: GridSpec, z: float) -> WaveField:
    norm = np.sqrt(np.sum(np.abs(values) ** 2) * g.pitch ** 2)
    return WaveField(values / norm, g.pitch, z, p.wavelength)


def synth_lg(p: BeamParams, m: int, g: GridSpec, z: float = 0.0,
             convention: str = "complementary") -> WaveField:
    """Normalized ``LG_{m,0}`` for ``m = +1`` or ``-1`` at plane ``z``."""
    if m not in (1, -1):
        raise UnsupportedModeError(f"only m = +1 and m = -1 are supported, got {m}")
    _check_sampling(p, g, z)
    X, Y = g.mesh()
    return _normalized((X + 1j * m * Y) * envelope(p, g, z, convention), p, g, z)


def synth_hg(p: BeamParams, orientation: str | int, g: GridSpec, z: float = 0.0,
             convention: str = "complementary") -> WaveField:
    """Normalized ``HG_{1,0}`` (``x f``) or ``HG_{0,1}`` (``y f``)."""
    key = str(orientation)
    if key not in ("10", "01"):
        raise UnsupportedModeError(f"orientation must be '10' or '01', got {orientation!r}")
    _check_sampling(p, g, z)
    X, Y = g.mesh()
    coord = X if key == "10" else Y
    return _normalized(coord * envelope(p, g, z, convention), p, g, z)


def synth_superposition(p: BeamParams, a_R: complex, a_L: complex, g: GridSpec,
                        z: float = 0.0, convention: str = "complementary") -> WaveField:
    """Normalized ``a_R LG_{+1} + a_L LG_{-1}``.

    The amplitudes must already be normalized to within 1e-9.
    """
    total = abs(a_R) ** 2 + abs(a_L) ** 2
    if abs(total - 1) > 1e-9:
        raise ContractViolation(f"|a_R|^2 + |a_L|^2 = {total!r}, expected 1")
    _check_sampling(p, g, z)
    X, Y = g.mesh()
    # a_R (x + iy) + a_L (x - iy)
    poly = (a_R + a_L) * X + 1j * (a_R - a_L) * Y
    return _normalized(poly * envelope(p, g, z, convention), p, g, z)


def synth_state(p: BeamParams, state, g: GridSpec, z: float = 0.0,
                convention: str = "complementary") -> WaveField:
    """Synthesize a :class:`~vortexgate.qubit.BlochState` as a field."""
    return synth_superposition(p, state.a_R, state.a_L, g, z, convention)


def synth_gaussian(p: BeamParams, g: GridSpec, z: float = 0.0) -> WaveField:
    """Normalized fundamental Gaussian with the standard Gouy phase."""
    if g.extent < 8 * p.width(z):
        raise SamplingError(f"grid extent {g.extent:.4g} m is below 8 w(z) = {8 * p.width(z):.4g} m")
    return lg_mode(p, 0, 0, g, z)


def lg_mode(p: BeamParams, m: int, radial: int, g: GridSpec, z: float = 0.0) -> WaveField:
    """General ``LG_{m,p}`` with standard Gouy phase ``(2p + |m| + 1) arctan(z/zR)``.

    No sampling checks are made; this is meant for basis expansions.
    """
    X, Y = g.mesh()
    r2 = X ** 2 + Y ** 2
    w = p.width(z)
    R = p.curvature_radius(z)
    curv = 0.0 if math.isinf(R) else p.wavenumber_k / (2 * R)
    am = abs(m)
    rho = (X + 1j * np.sign(m) * Y) * math.sqrt(2) / w if m else 1.0
    order = 2 * radial + am + 1
    vals = (rho ** am * eval_genlaguerre(radial, am, 2 * r2 / w ** 2)
            * np.exp(-r2 / w ** 2 + 1j * curv * r2)
            * np.exp(-1j * order * p.zeta(z, "standard")) * _carrier(p.wavenumber_k, z))
    return _normalized(vals, p, g, z)
