"""Free-space propagation of sampled fields.

Two propagators are provided. The band-limited angular spectrum method
keeps the grid fixed and suits steps where the beam size changes by less
than a factor of two. For longer steps the field is carried on a grid that
scales with the beam: the spherical part of the wave is removed, the
remainder is propagated over the equivalent shortened distance and the
result is mapped back with magnification ``M``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation, SamplingError
from ..field import WaveField

METHODS = ("auto", "asm", "scaled")
MOMENT_TRIM = 5e-2
TAIL_RATIO = 1.5


@dataclass(frozen=True)
class Tolerances:
    """Sampling tolerances used by the propagators.

    Attributes
    ----------
    alias : float
        Largest allowed energy fraction in the outer tenth of the spectrum
        on input.
    band_loss : float
        Largest allowed energy fraction removed by the band limit.
    edge : float
        Largest allowed energy fraction in the outer border of the output.
    """

    alias: float = 5e-3
    band_loss: float = 1e-2
    edge: float = 1e-3


DEFAULT_TOLERANCES = Tolerances()


def _freqs(n, pitch):
    return np.fft.fftfreq(n, pitch)


def _spectrum_fractions(spec2, fx, fy, limit_x, limit_y):
    """Energy fraction of a power spectrum outside ``|fx| <= lx, |fy| <= ly``."""
    outside = (np.abs(fx)[None, :] > limit_x) | (np.abs(fy)[:, None] > limit_y)
    return float(spec2[outside].sum() / spec2.sum())


def _minimal_grid(f: WaveField, sigma_out: float):
    extent = max(f.extent, 10 * sigma_out)
    n = 1 << math.ceil(math.log2(max(16, extent / f.pitch)))
    return n, n * f.pitch


def beam_moments(f: WaveField, trim: float = 0.0):
    """Second-moment description of the beam.

    Parameters
    ----------
    f : WaveField
        Field to analyse.
    trim : float
        Spectral energy fraction, taken from the highest spatial
        frequencies, left out of the angular moments. Sharp edges put a
        slowly decaying tail into the spectrum that would otherwise dominate
        the angular variance. The trimmed moments are used only when the
        full angular variance exceeds them by ``TAIL_RATIO``.

    Returns
    -------
    sigma2 : float
        ``<|r - c|^2>`` in m^2.
    a : float
        ``<(r - c).(k_perp - <k_perp>)> / k``, the linear coefficient of
        ``sigma2(z) = sigma2 + 2 a z + b z^2``.
    b : float
        ``var(k_perp) / k^2``.
    """
    u = f.values
    X, Y = f.coords()
    inten = np.abs(u) ** 2
    tot = inten.sum()
    cx = (X * inten).sum() / tot
    cy = (Y * inten).sum() / tot
    sigma2 = (((X - cx) ** 2 + (Y - cy) ** 2) * inten).sum() / tot
    U = np.fft.fft2(u)
    kx = 2 * np.pi * _freqs(f.n_x, f.pitch)[None, :]
    ky = 2 * np.pi * _freqs(f.n_y, f.pitch)[:, None]

    def angular(U):
        v = np.fft.ifft2(U)
        tot = (np.abs(v) ** 2).sum()
        dux = np.fft.ifft2(1j * kx * U)
        duy = np.fft.ifft2(1j * ky * U)
        # transverse wavevector density Im(u* grad u)
        jx = np.imag(np.conj(v) * dux)
        jy = np.imag(np.conj(v) * duy)
        mkx = jx.sum() / tot
        mky = jy.sum() / tot
        cross = ((X - cx) * jx + (Y - cy) * jy).sum() / tot
        k2 = (np.abs(dux) ** 2 + np.abs(duy) ** 2).sum() / tot - mkx ** 2 - mky ** 2
        return cross, k2

    cross, k2 = angular(U)
    if trim > 0:
        p2 = np.abs(U) ** 2
        kap2 = np.broadcast_to(kx ** 2 + ky ** 2, p2.shape).ravel()
        order = np.argsort(kap2, kind="stable")
        cum = np.cumsum(p2.ravel()[order])
        cut = kap2[order][min(np.searchsorted(cum, (1 - trim) * cum[-1]), cum.size - 1)]
        cross_t, k2_t = angular(np.where(kx ** 2 + ky ** 2 <= cut, U, 0))
        # smooth beams keep their exact moments; only heavy tails are cut
        if k2 > TAIL_RATIO * k2_t:
            cross, k2 = cross_t, k2_t
    k = f.wavenumber
    return float(sigma2), float(cross / k), float(k2 / k ** 2)


def predicted_size_ratio(f: WaveField, dz: float) -> float:
    s2, a, b = beam_moments(f, MOMENT_TRIM)
    return math.sqrt(max(s2 + 2 * a * dz + b * dz * dz, 0.0) / s2)


def _carrier(k, dz):
    return np.exp(1j * math.remainder(k * dz, 2 * math.pi))


def _asm(f: WaveField, dz: float, tol: Tolerances, paraxial=False, carrier=True,
         check_edges=True) -> WaveField:
    ny, nx = f.values.shape
    fx = _freqs(nx, f.pitch)
    fy = _freqs(ny, f.pitch)
    U = np.fft.fft2(f.values)
    p2 = np.abs(U) ** 2
    nyq = 0.5 / f.pitch
    alias = _spectrum_fractions(p2, fx, fy, 0.9 * nyq, 0.9 * nyq)
    if alias > tol.alias:
        raise SamplingError(
            f"field is undersampled: {alias:.3g} of its energy lies near the Nyquist frequency "
            f"(limit {tol.alias:g}); reduce the pitch below {f.pitch:.4g} m")
    lam = f.wavelength
    k = f.wavenumber
    # band limit for an unpadded window
    lim_x = 1 / (lam * math.sqrt((2 * dz / (nx * f.pitch)) ** 2 + 1))
    lim_y = 1 / (lam * math.sqrt((2 * dz / (ny * f.pitch)) ** 2 + 1))
    lost = _spectrum_fractions(p2, fx, fy, lim_x, lim_y)
    if lost > tol.band_loss:
        n_need = 1 << math.ceil(math.log2(2 * abs(dz) * lam * nyq / f.pitch))
        raise SamplingError(
            f"band limit for dz = {dz:.4g} m discards {lost:.3g} of the energy; "
            f"minimal grid: n = {n_need}, extent = {n_need * f.pitch:.4g} m")
    kap2 = (2 * np.pi) ** 2 * (fx[None, :] ** 2 + fy[:, None] ** 2)
    if paraxial:
        phase = -kap2 / (2 * k)
    else:
        phase = -kap2 / (k + np.sqrt(np.maximum(k * k - kap2, 0.0)))
    H = np.exp(1j * dz * phase)
    H[(np.abs(fx)[None, :] > lim_x) | (np.abs(fy)[:, None] > lim_y)] = 0
    out = np.fft.ifft2(U * H)
    if carrier:
        out = out * _carrier(k, dz)
    g = f.with_values(out, z_pos=f.z_pos + dz)
    if check_edges:
        _check_edges(g, tol)
    return g


def _check_edges(g: WaveField, tol: Tolerances):
    inten = g.intensity()
    ny, nx = inten.shape
    bx, by = max(1, nx // 16), max(1, ny // 16)
    inner = inten[by:ny - by, bx:nx - bx].sum()
    frac = 1 - inner / inten.sum()
    if frac > tol.edge:
        s2, _, _ = beam_moments(g)
        n, extent = _minimal_grid(g, math.sqrt(s2))
        raise SamplingError(
            f"propagated field reaches the grid border ({frac:.3g} of the energy, "
            f"limit {tol.edge:g}); minimal grid: n = {n}, extent = {extent:.4g} m")


def _flip(arr):
    # x -> -x about pixel n/2
    return np.roll(np.roll(arr[::-1, ::-1], 1, axis=0), 1, axis=1)


def _moments_after_lens(moments, power):
    s2, a, b = moments
    return s2, a - s2 * power, b - 2 * a * power + s2 * power * power


def _scaled(f: WaveField, dz: float, tol: Tolerances, power: float = 0.0) -> WaveField:
    s2, a, b = _moments_after_lens(beam_moments(f, MOMENT_TRIM), power)
    s2_end = s2 + 2 * a * dz + b * dz * dz
    mag = math.sqrt(s2_end / s2)
    inv_r_est = a / s2
    # through a focus the image inverts; pick the sign matching the wavefront
    candidates = [m for m in (mag, -mag) if m != 1]
    M = min(candidates, key=lambda m: abs((m - 1) / dz - inv_r_est))
    R = dz / (M - 1)
    k = f.wavenumber
    X, Y = f.coords()
    # the lens phase and the removed sphere are applied together
    v = f.values * np.exp(-1j * k * (X ** 2 + Y ** 2) * (1 / R + power) / 2)
    inner = _asm(f.with_values(v), dz / M, tol, paraxial=True, carrier=False, check_edges=False)
    v2 = inner.values
    if M < 0:
        v2 = _flip(v2)
    pitch = abs(M) * f.pitch
    g = WaveField(v2 / M, pitch, f.z_pos + dz, f.wavelength)
    Xo, Yo = g.coords()
    out = g.values * np.exp(1j * k * (Xo ** 2 + Yo ** 2) / (2 * M * R)) * _carrier(k, dz)
    g = g.with_values(out)
    _check_edges(g, tol)
    return g


def choose_method(f: WaveField, dz: float, power: float = 0.0) -> str:
    s2, a, b = _moments_after_lens(beam_moments(f, MOMENT_TRIM), power)
    rho = math.sqrt(max(s2 + 2 * a * dz + b * dz * dz, 0.0) / s2)
    return "asm" if 0.5 <= rho <= 2 else "scaled"


def propagate_through_lens(f: WaveField, power: float, dz: float, method: str = "auto",
                           tolerances: Tolerances = DEFAULT_TOLERANCES) -> WaveField:
    """Thin round lens of power ``1/f`` followed by a drift ``dz``.

    On the scaled path the lens phase is never sampled on its own, so
    strong lenses whose phase would alias on the input grid are handled.
    """
    if method not in METHODS:
        raise ContractViolation(f"unknown propagation method {method!r}; use one of {METHODS}")
    if method == "auto":
        method = choose_method(f, dz, power)
    if method == "scaled":
        return _scaled(f, dz, tolerances, power)
    X, Y = f.coords()
    lensed = f.with_values(f.values * np.exp(-1j * f.wavenumber * (X ** 2 + Y ** 2) * power / 2))
    return _asm(lensed, dz, tolerances)


def propagate_free(f: WaveField, dz: float, method: str = "auto",
                   tolerances: Tolerances = DEFAULT_TOLERANCES) -> WaveField:
    """Propagate ``f`` through free space by ``dz`` metres.

    Parameters
    ----------
    f : WaveField
        Input field.
    dz : float
        Signed propagation distance.
    method : {"auto", "asm", "scaled"}
        ``"asm"`` keeps the grid; ``"scaled"`` rescales the pitch with the
        beam; ``"auto"`` picks ``"asm"`` when the beam size is predicted to
        change by at most a factor of two.
    tolerances : Tolerances
        Sampling checks; violations raise :class:`SamplingError`.
    """
    if method not in METHODS:
        raise ContractViolation(f"unknown propagation method {method!r}; use one of {METHODS}")
    if dz == 0:
        return f.with_values(f.values)
    if method == "auto":
        method = choose_method(f, dz)
    if method == "asm":
        return _asm(f, dz, tolerances)
    return _scaled(f, dz, tolerances)
