import math

import numpy as np
import pytest

from vortexgate.column import abcd
from vortexgate.column.elements import (CircularAperture, Drift, HilbertPhasePlate, Quadrupole,
                                        RoundLens, apply_element, disc_coverage,
                                        half_plane_coverage, transmission)
from vortexgate.errors import ContractViolation
from vortexgate.field import WaveField


@pytest.fixture
def flat():
    return WaveField(np.ones((64, 64)), 1e-9, 0.0, 2.5e-12)


@pytest.mark.parametrize("make", [lambda: Drift(0.0), lambda: RoundLens(0.0), lambda: Quadrupole(math.inf),
                                  lambda: HilbertPhasePlate(amplitude_factor=0.0),
                                  lambda: CircularAperture(-1.0)])
def test_invalid_elements(make):
    with pytest.raises(ContractViolation):
        make()


@pytest.mark.parametrize("angle", [0.0, 0.3, math.pi / 4, 2.0])
def test_half_plane_covers_half(flat, angle):
    cov = half_plane_coverage(flat, angle)
    assert abs(cov.mean() - 0.5) < 2e-2
    assert cov.min() == 0.0 and cov.max() == 1.0


def test_half_plane_side(flat):
    cov = half_plane_coverage(flat, 0.0)
    # edge along x, shifted half at y > 0
    assert cov[-1, 32] == 1.0 and cov[0, 32] == 0.0


def test_hpp_step(flat):
    t = transmission(flat, HilbertPhasePlate(0.0, math.pi, 0.8))
    assert np.isclose(t[-1, 10], -0.8) and np.isclose(t[0, 10], 1.0)


def test_disc_area(flat):
    r = 20e-9
    assert math.isclose(disc_coverage(flat, r).sum() * 1e-18, math.pi * r * r, rel_tol=1e-3)


def test_aperture_larger_than_grid(flat):
    with pytest.raises(ContractViolation):
        transmission(flat, CircularAperture(1e-6))


def test_quadrupole_turned_90_degrees_flips_sign(flat):
    a = transmission(flat, Quadrupole(0.1, 0.0))
    b = transmission(flat, Quadrupole(-0.1, math.pi / 2))
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_two_crossed_quadrupoles_cancel(flat):
    f = apply_element(apply_element(flat, Quadrupole(0.1)), Quadrupole(0.1, math.pi / 2))
    np.testing.assert_allclose(f.values, flat.values, atol=1e-12)


def test_lens_is_unit_modulus(flat):
    assert np.allclose(np.abs(transmission(flat, RoundLens(0.01))), 1.0)


def test_abcd_lens_at_waist():
    zr, fl = 0.03, 0.1
    q = abcd.lens(complex(0, -zr), 1 / fl)
    assert math.isclose(abcd.waist_distance(q), fl * zr ** 2 / (zr ** 2 + fl ** 2), rel_tol=1e-12)
    assert math.isclose(abcd.rayleigh(q), zr * fl ** 2 / (zr ** 2 + fl ** 2), rel_tol=1e-12)


def test_drift_gouy_through_focus():
    zr = 0.02
    # from -inf to +inf the Gouy angle grows by pi
    assert math.isclose(abcd.drift_gouy(complex(-1e6 * zr, -zr), 2e6 * zr), math.pi, rel_tol=1e-5)


def test_trace_sections_astigmatism():
    qu, qv, _, _ = abcd.trace_sections(complex(0, -0.03), [Quadrupole(0.1), Drift(0.05)])
    assert abs(qu - qv) > 1e-3


def test_trace_rejects_skew_frames():
    with pytest.raises(ContractViolation):
        abcd.trace_sections(complex(0, -0.03), [Quadrupole(0.1), Drift(0.05), Quadrupole(0.1, 0.3)])


def test_quadrupole_phase_is_opposite_on_the_axes(flat):
    f = 0.05
    t = transmission(flat, Quadrupole(f, 0.0))
    k = 2 * math.pi / flat.wavelength
    X, Y = flat.coords()
    np.testing.assert_allclose(np.angle(t * np.exp(1j * k * (X ** 2 - Y ** 2) / (2 * f))), 0, atol=1e-9)
