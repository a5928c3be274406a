import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vortexgate.errors import ContractViolation, SamplingError, UnsupportedModeError
from vortexgate.field import GridSpec, WaveField, inner, rotate_array
from vortexgate.modes import (BeamParams, electron_wavelength, envelope, lg_mode, synth_gaussian,
                              synth_hg, synth_lg, synth_superposition)


@pytest.mark.parametrize("kev, expected", [(200.0, 2.5079e-12), (300.0, 1.9687e-12), (100.0, 3.7014e-12)])
def test_electron_wavelength(kev, expected):
    assert math.isclose(electron_wavelength(kev), expected, rel_tol=1e-4)


def test_wavelength_range_enforced():
    with pytest.raises(ContractViolation):
        electron_wavelength(5.0)


def test_default_rayleigh_length(beam):
    assert math.isclose(beam.rayleigh_zR, 28.18e-3, rel_tol=1e-3)


def test_inconsistent_beam_rejected():
    with pytest.raises(ContractViolation):
        BeamParams(1e-7, 1.0, 1e10)


def test_from_q_roundtrip(beam):
    z = 0.013
    p = BeamParams.from_q(beam.q(z), beam.wavenumber_k)
    assert math.isclose(p.waist_w0, beam.waist_w0, rel_tol=1e-12)


@pytest.mark.parametrize("z", [-0.05, -1e-3, 0.0, 1e-3, 0.05])
def test_gouy_conventions_differ_by_constant_phase(beam, z):
    # exp(-2i arctan(zR/z)) = -exp(2i arctan(z/zR)) for every z
    a = np.exp(-2j * beam.zeta(z, "complementary"))
    b = np.exp(2j * beam.zeta(z, "standard"))
    assert abs(a + b) < 1e-12


def test_complementary_gouy_continuous_through_waist(beam):
    eps = 1e-9
    left = np.exp(-2j * beam.zeta(-eps))
    right = np.exp(-2j * beam.zeta(eps))
    assert abs(left - right) < 1e-6


def test_unknown_convention(beam, small_grid):
    with pytest.raises(ContractViolation):
        envelope(beam, small_grid, 0.0, "other")


@pytest.mark.parametrize("m", [1, -1])
def test_lg_normalized_and_orthogonal(beam, small_grid, m):
    f = synth_lg(beam, m, small_grid)
    g = synth_lg(beam, -m, small_grid)
    assert math.isclose(f.norm(), 1.0, rel_tol=1e-12)
    assert abs(inner(f, g)) < 1e-12


def test_lg_handedness(beam, small_grid):
    f = synth_lg(beam, 1, small_grid)
    n = small_grid.n
    # phase grows counter-clockwise: +x then +y
    px = np.angle(f.values[n // 2, n // 2 + 10])
    py = np.angle(f.values[n // 2 + 10, n // 2])
    assert math.isclose(math.remainder(py - px, 2 * math.pi), math.pi / 2, abs_tol=1e-12)


def test_unsupported_order(beam, small_grid):
    with pytest.raises(UnsupportedModeError):
        synth_lg(beam, 2, small_grid)


def test_hg_is_lg_sum(beam, small_grid):
    hg = synth_hg(beam, "10", small_grid)
    s = synth_superposition(beam, 1 / math.sqrt(2), 1 / math.sqrt(2), small_grid)
    np.testing.assert_allclose(hg.values, s.values, atol=1e-10 * np.abs(hg.values).max())


def test_superposition_needs_normalized_amplitudes(beam, small_grid):
    with pytest.raises(ContractViolation):
        synth_superposition(beam, 1.0, 1.0, small_grid)


def test_undersampled_grid_refused(beam):
    with pytest.raises(SamplingError):
        synth_lg(beam, 1, GridSpec(64, 16 * beam.waist_w0))


def test_small_window_refused(beam):
    with pytest.raises(SamplingError):
        synth_lg(beam, 1, GridSpec(512, 4 * beam.waist_w0))


def test_lg_mode_matches_synth_lg_up_to_phase(beam):
    z = 0.3 * beam.rayleigh_zR
    g = GridSpec(128, 8 * beam.width(z))
    a = lg_mode(beam, 1, 0, g, z)
    b = synth_lg(beam, 1, g, z, convention="standard")
    assert math.isclose(abs(inner(a, b)), 1.0, abs_tol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(-2.0, 2.0))
def test_gaussian_width_follows_beam(z_over_zr):
    p = BeamParams.from_energy(150e-9, 200.0)
    z = z_over_zr * p.rayleigh_zR
    g = GridSpec(256, 12 * p.width(z))
    f = synth_gaussian(p, g, z)
    X, Y = f.coords()
    r2 = (f.intensity() * (X ** 2 + Y ** 2)).sum() * f.pitch ** 2
    # <r^2> = w^2 / 2 for a round Gaussian
    assert math.isclose(math.sqrt(2 * r2), p.width(z), rel_tol=1e-9)


def test_wavefield_is_read_only(beam, small_grid):
    f = synth_lg(beam, 1, small_grid)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0


def test_wavefield_shape_checks():
    with pytest.raises(ContractViolation):
        WaveField(np.zeros((15, 16)), 1e-9, 0.0, 1e-12)


def test_grid_axis_centered():
    g = GridSpec(16, 16.0)
    ax = g.axis()
    assert ax[8] == 0.0 and ax[0] == -8.0


def test_vortex_core_and_winding(beam, small_grid):
    f = synth_lg(beam, 1, small_grid)
    n = small_grid.n
    assert abs(f.values[n // 2, n // 2]) == 0
    # phase around a circle of radius w0 advances by one full turn
    t = np.linspace(0, 2 * np.pi, 257)
    x, y = beam.waist_w0 * np.cos(t), beam.waist_w0 * np.sin(t)
    X, Y = small_grid.mesh()
    ang = np.angle((x + 1j * y) * np.exp(-(x ** 2 + y ** 2) / beam.waist_w0 ** 2))
    wind = np.unwrap(ang)
    assert math.isclose(wind[-1] - wind[0], 2 * np.pi, rel_tol=1e-9)
    i, j = np.unravel_index(np.argmax(np.abs(f.values)), f.values.shape)
    r = math.hypot(X[i, j], Y[i, j])
    assert math.isclose(r, beam.waist_w0 / math.sqrt(2), rel_tol=0.1)


@pytest.mark.parametrize("z_over_zr", [0.0, 0.7])
def test_opposite_vortices_are_conjugate(beam, z_over_zr):
    z = z_over_zr * beam.rayleigh_zR
    g = GridSpec(128, 8 * beam.width(z))
    a, b = synth_lg(beam, 1, g, z), synth_lg(beam, -1, g, z)
    np.testing.assert_allclose(a.intensity(), b.intensity(), atol=1e-12 * a.intensity().max())
    env = envelope(beam, g, z)
    # dividing out the common envelope leaves x + iy against x - iy
    X, Y = g.mesh()
    mask = np.hypot(X, Y) > 0.1 * beam.waist_w0
    pa = a.values[mask] / env[mask]
    pb = b.values[mask] / env[mask]
    np.testing.assert_allclose(pa, np.conj(pb), atol=1e-9 * np.abs(pa).max())


def test_hg_nodal_line_and_orthogonality(beam, small_grid):
    h10 = synth_hg(beam, "10", small_grid)
    h01 = synth_hg(beam, "01", small_grid)
    n = small_grid.n
    assert np.all(h10.values[:, n // 2] == 0)
    assert abs(inner(h10, h01)) < 1e-12


@pytest.mark.parametrize("phi_deg", [0, 50, 90, 130, 200])
def test_equator_state_is_turned_hg(beam, small_grid, phi_deg):
    phi = math.radians(phi_deg)
    f = synth_superposition(beam, 1 / math.sqrt(2), cmath.exp(1j * phi) / math.sqrt(2), small_grid)
    a = phi / 2
    X, Y = small_grid.mesh()
    # the lobes lie along phi/2; turned HG_10 = (x cos a + y sin a) times the envelope
    env = envelope(beam, small_grid, 0.0)
    ref = (X * math.cos(a) + Y * math.sin(a)) * env
    ref = ref / math.sqrt(np.sum(np.abs(ref) ** 2) * small_grid.pitch ** 2)
    assert abs(abs(inner(WaveField(ref, small_grid.pitch, 0.0, beam.wavelength), f)) - 1) < 1e-12


def test_pure_amplitude_is_lg(beam, small_grid):
    np.testing.assert_allclose(synth_superposition(beam, 1, 0, small_grid).values,
                               synth_lg(beam, 1, small_grid).values, atol=1e-14)


def test_wavelength_formula_at_low_energy():
    # 1 keV lies below the supported range; check the closed form directly
    from scipy import constants
    e = 1e3 * constants.e
    lam = constants.h / math.sqrt(2 * constants.m_e * e * (1 + e / (2 * constants.m_e * constants.c ** 2)))
    assert math.isclose(lam, 3.8763e-11, rel_tol=1e-4)
    classical = constants.h / math.sqrt(2 * constants.m_e * e)
    assert abs(classical / lam - 1) <= 1e-3
    mc2 = constants.m_e * constants.c ** 2 / constants.e / 1e3
    scale = math.sqrt(10 * (1 + 10 / (2 * mc2)) / (1 + 1 / (2 * mc2)))
    assert math.isclose(electron_wavelength(10.0) * scale, lam, rel_tol=1e-12)


@pytest.mark.parametrize("phi_deg", [0, 45, 90, 130, 180])
def test_equator_intensity_is_turned_h(beam, phi_deg):
    g = GridSpec(256, 8 * beam.waist_w0)
    phi = math.radians(phi_deg)
    f = synth_superposition(beam, 1 / math.sqrt(2), cmath.exp(1j * phi) / math.sqrt(2), g)
    h = synth_hg(beam, "10", g)
    turned = rotate_array(h.intensity(), phi / 2, g.pitch)
    assert np.linalg.norm(turned - f.intensity()) / np.linalg.norm(f.intensity()) <= 1e-3
