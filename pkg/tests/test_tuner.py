import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vortexgate.column import abcd
from vortexgate.column.elements import Drift, Quadrupole
from vortexgate.column.tuner import GeometryBounds, quarter_wave_family, tune_mode_converter
from vortexgate.errors import ContractViolation, InfeasibleGeometryError
from vortexgate.modes import BeamParams


def section_matrix(f1, d, f2, sign):
    """Ray matrix of thin lens, drift, thin lens for one principal section."""
    def lens(f):
        return np.array([[1, 0], [-sign / f, 1]])
    return lens(f2) @ np.array([[1, d], [0, 1]]) @ lens(f1)


def gouy_and_q(M, q):
    (A, B), (C, D) = M
    # Gouy angle from the ray matrix: arg(A + B/q) with q = z - i zR
    return -np.angle(A + B / q), (A * q + B) / (C * q + D)


def converter_check(zr, s, f1, d, f2):
    q = complex(-s, -zr)
    gu, qu = gouy_and_q(section_matrix(f1, d, f2, +1), q)
    gv, qv = gouy_and_q(section_matrix(f1, d, f2, -1), q)
    return math.remainder(gu - gv, 2 * math.pi), qu, qv


@pytest.fixture(scope="module")
def p():
    return BeamParams.from_energy(150e-9, 200.0)


@pytest.mark.parametrize("s_over_zr", [1.0, math.sqrt(2), 2.0, 3.5])
def test_family_is_quarter_wave_and_stigmatic(s_over_zr):
    zr = 0.028
    f1, d, f2 = quarter_wave_family(zr, s_over_zr * zr)
    delta, qu, qv = converter_check(zr, s_over_zr * zr, f1, d, f2)
    assert math.isclose(abs(delta), math.pi / 2, abs_tol=1e-12)
    assert abs(qu - qv) < 1e-12 * abs(qu)


def test_symmetric_member():
    zr = 1.0
    f1, d, f2 = quarter_wave_family(zr, math.sqrt(2) * zr)
    assert math.isclose(f1, 3 * zr) and math.isclose(f2, 3 * zr)
    assert math.isclose(d, 3 * zr / math.sqrt(2))


def test_default_geometry(p):
    sol = tune_mode_converter(p, 0.06)
    zr = p.rayleigh_zR
    assert max(abs(r) for r in sol.residuals) < 1e-6
    assert math.isclose(sol.input_focus / zr, 1.429, abs_tol=1e-3)
    assert math.isclose(sol.f1 / zr, 3.04, abs_tol=1e-2)
    assert math.isclose(sol.f2 / zr, 2.98, abs_tol=1e-2)
    delta, qu, qv = converter_check(zr, sol.input_focus, sol.f1, sol.d, sol.f2)
    assert math.isclose(abs(delta), math.pi / 2, abs_tol=1e-9)
    assert abs(qu - qv) < 1e-9 * abs(qu)
    assert abs(sol.q_out - qu) < 1e-9 * abs(qu)


def test_branches_differ(p):
    far = tune_mode_converter(p, 0.06, branch="far")
    near = tune_mode_converter(p, 0.06, branch="near")
    assert near.input_focus < far.input_focus
    assert max(abs(r) for r in near.residuals) < 1e-6


def test_matches_family(p):
    sol = tune_mode_converter(p, 0.06)
    f1, d, f2 = quarter_wave_family(p.rayleigh_zR, sol.input_focus)
    assert math.isclose(d, 0.06, rel_tol=1e-9)
    assert math.isclose(sol.f1, f1, rel_tol=1e-9) and math.isclose(sol.f2, f2, rel_tol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 2.9))
def test_general_targets(target):
    p = BeamParams.from_energy(150e-9, 200.0)
    sol = tune_mode_converter(p, 0.06, target=target)
    delta, qu, qv = converter_check(p.rayleigh_zR, sol.input_focus, sol.f1, sol.d, sol.f2)
    assert math.isclose(abs(delta), target, abs_tol=1e-8)
    assert abs(qu - qv) < 1e-8 * abs(qu)


def test_short_drift_infeasible(p):
    with pytest.raises(InfeasibleGeometryError, match="2 zR"):
        tune_mode_converter(p, 1.5 * p.rayleigh_zR)


def test_bounds_can_exclude_solution(p):
    with pytest.raises(InfeasibleGeometryError):
        tune_mode_converter(p, 0.06, bounds=GeometryBounds(focal_min=1e-3, focal_max=0.01))


@pytest.mark.parametrize("kwargs", [{"d": -1.0}, {"d": 0.06, "target": math.pi}, {"d": 0.06, "branch": "mid"}])
def test_bad_arguments(p, kwargs):
    with pytest.raises(ContractViolation):
        tune_mode_converter(p, **kwargs)


def test_elements_follow_frame(p):
    sol = tune_mode_converter(p, 0.06)
    els = sol.elements(0.4)
    assert isinstance(els[1], Drift) and els[1].length == sol.d
    assert all(e.axis_angle == 0.4 for e in els if isinstance(e, Quadrupole))
    qu, qv, pu, pv = abcd.trace_sections(p.q(-sol.input_focus), els)
    assert math.isclose(abs(pu - pv), math.pi / 2, abs_tol=1e-9)
