import math

import pytest

from vortexgate.field import GridSpec
from vortexgate.modes import BeamParams

# criterion id -> (description, passed) collected by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def beam():
    return BeamParams.from_energy(150e-9, 200.0)


@pytest.fixture(scope="session")
def small_grid(beam):
    # 128 px with the ring radius spanning 11 px
    return GridSpec(128, 8 * beam.waist_w0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        label, ok = ACCEPTANCE[key]
        status = "PASS" if ok else ("EXCLUDED" if ok is None else "FAIL")
        terminalreporter.write_line(f"{status:8s} criterion {key}: {label}")


def assert_close_angle(a, b, tol):
    d = math.remainder(a - b, 2 * math.pi)
    assert abs(d) <= tol, (a, b)
