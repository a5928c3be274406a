import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vortexgate.errors import ContractViolation
from vortexgate.qubit import (AXIS_X, AXIS_Y, AXIS_Z, IDENTITY, STATE_H, STATE_L, STATE_MINUS,
                              STATE_PLUS, STATE_R, STATE_V, BlochState, BlochVector, GateMatrix,
                              apply_gate, as_equatorial_rotation, bloch_vector, equator_state,
                              equatorial_rotation, fidelity, frame_rotated, output_state_closed_form,
                              overlap, rotation_gate, rz_frame, sqrt_not)

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


def phase_free_equal(a: BlochState, b: BlochState, tol=1e-12):
    return abs(1 - abs(overlap(a, b))) <= tol


def test_sqrt_not_matrix():
    expected = np.array([[1, -1j], [-1j, 1]]) / math.sqrt(2)
    np.testing.assert_allclose(sqrt_not().matrix, expected, atol=1e-15)


def test_sqrt_not_is_quarter_turn_about_x():
    np.testing.assert_allclose(rotation_gate(AXIS_X, math.pi / 2).matrix, sqrt_not().matrix, atol=1e-15)


def test_sqrt_not_squared_is_not_up_to_phase():
    sq = (sqrt_not() @ sqrt_not()).matrix
    np.testing.assert_allclose(sq, -1j * np.array([[0, 1], [1, 0]]), atol=1e-15)


def test_non_unitary_rejected():
    with pytest.raises(ContractViolation):
        GateMatrix(np.array([[1, 1], [0, 1]]))


def test_state_normalization_enforced():
    with pytest.raises(ContractViolation):
        BlochState(1.0, 1.0)


@pytest.mark.parametrize("phi", np.linspace(0, 2 * math.pi, 13))
def test_closed_form_matches_matrix(phi):
    out = apply_gate(sqrt_not(), equator_state(phi))
    assert phase_free_equal(out, output_state_closed_form(phi))


@pytest.mark.parametrize("state, phase", [(STATE_H, -math.pi / 4), (STATE_V, math.pi / 4)])
def test_h_and_v_are_eigenstates(state, phase):
    out = sqrt_not().matrix @ state.vector
    np.testing.assert_allclose(out, cmath.exp(1j * phase) * state.vector, atol=1e-15)


@pytest.mark.parametrize("state, vec", [
    (STATE_R, (0, 0, 1)), (STATE_L, (0, 0, -1)), (STATE_H, (1, 0, 0)),
    (STATE_V, (-1, 0, 0)), (STATE_PLUS, (0, 1, 0)), (STATE_MINUS, (0, -1, 0)),
])
def test_named_states_on_sphere(state, vec):
    np.testing.assert_allclose(bloch_vector(state).as_array(), vec, atol=1e-15)


def test_equator_state_phi_roundtrip():
    for phi in np.linspace(-3, 3, 7):
        assert math.isclose(equator_state(phi).phi, phi, abs_tol=1e-12)


def test_frame_rotation_moves_axis_by_twice_the_angle():
    g = frame_rotated(sqrt_not(), math.radians(30))
    theta, az = as_equatorial_rotation(g)
    assert math.isclose(theta, math.pi / 2, abs_tol=1e-12)
    assert math.isclose(az, math.radians(60), abs_tol=1e-12)


def test_frame_rotation_by_45_degrees_is_y_rotation():
    np.testing.assert_allclose(frame_rotated(sqrt_not(), math.pi / 4).matrix,
                               rotation_gate(AXIS_Y, math.pi / 2).matrix, atol=1e-15)


def test_z_axis_gate_is_not_equatorial():
    assert as_equatorial_rotation(rotation_gate(AXIS_Z, 0.3)) is None


def test_identity_decomposes_to_zero_angle():
    assert as_equatorial_rotation(GateMatrix(IDENTITY)) == (0.0, 0.0)


def test_fidelity_ignores_global_phase():
    s = equator_state(0.7)
    t = BlochState(s.a_R * 1j, s.a_L * 1j)
    assert math.isclose(fidelity(s, t), 1.0, abs_tol=1e-15)


@given(angles, angles)
def test_equatorial_rotation_roundtrip(theta, az):
    theta = abs(theta) % (2 * math.pi)
    if min(theta, 2 * math.pi - theta) < 1e-3:
        return
    t, a = as_equatorial_rotation(equatorial_rotation(theta, az))
    g1, g2 = equatorial_rotation(theta, az).matrix, equatorial_rotation(t, a).matrix
    # equal up to a global sign
    assert min(np.abs(g1 - g2).max(), np.abs(g1 + g2).max()) < 1e-9


@given(angles, angles)
def test_gates_preserve_norm_and_fidelity(phi, alpha):
    g = frame_rotated(sqrt_not(), alpha)
    a, b = equator_state(phi), STATE_R
    ga, gb = apply_gate(g, a), apply_gate(g, b)
    assert math.isclose(fidelity(ga, gb), fidelity(a, b), abs_tol=1e-12)


@given(angles)
def test_rz_frame_is_rotation_about_z(alpha):
    v = bloch_vector(apply_gate(rz_frame(alpha), STATE_H)).as_array()
    np.testing.assert_allclose(v, [math.cos(2 * alpha), math.sin(2 * alpha), 0], atol=1e-12)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_bloch_vector_normalized(x, y, z):
    if x * x + y * y + z * z < 1e-6:
        return
    v = BlochVector.normalized(x, y, z)
    assert math.isclose(np.linalg.norm(v.as_array()), 1.0, abs_tol=1e-12)


def test_negative_quarter_turn_about_x():
    expected = np.array([[1, 1j], [1j, 1]]) / math.sqrt(2)
    np.testing.assert_allclose(rotation_gate(AXIS_X, -math.pi / 2).matrix, expected, atol=1e-15)


@pytest.mark.parametrize("theta, value", [(0.0, 1.0), (2 * math.pi, -1.0)])
def test_full_turns(theta, value):
    np.testing.assert_allclose(rotation_gate(AXIS_Y, theta).matrix, value * np.eye(2), atol=1e-14)


def test_sqrt_not_on_r():
    out = apply_gate(sqrt_not(), BlochState(1, 0))
    np.testing.assert_allclose([out.a_R, out.a_L], [1 / math.sqrt(2), -1j / math.sqrt(2)], atol=1e-15)
    assert phase_free_equal(out, STATE_MINUS)


def test_phi_270_goes_to_l():
    assert phase_free_equal(apply_gate(sqrt_not(), equator_state(math.radians(270))), STATE_L)


def test_quarter_frame_swaps_eigenphases():
    # a 90 degree frame maps the axis from +x to -x, swapping the phases of H and V
    g, h = sqrt_not(), frame_rotated(sqrt_not(), math.pi / 2)
    for state in (STATE_H, STATE_V):
        a = overlap(state, apply_gate(g, state))
        b = overlap(state, apply_gate(h, state))
        assert abs(abs(a) - 1) < 1e-12 and abs(abs(b) - 1) < 1e-12
        assert abs(a - b.conjugate()) < 1e-12
    a_h = overlap(STATE_H, apply_gate(g, STATE_H))
    b_v = overlap(STATE_V, apply_gate(h, STATE_V))
    assert abs(a_h - b_v) < 1e-12
