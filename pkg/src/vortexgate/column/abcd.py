"""Gaussian-beam transport with the complex beam parameter.

Convention: a field ``exp(i k z) exp(i k r^2 / 2q)`` with ``q = z - i zR``
and ``z`` measured from the waist. A thin lens of focal length ``f`` maps
``1/q -> 1/q - 1/f``; a drift ``L`` maps ``q -> q + L`` and adds a
one-dimensional Gouy angle ``arg(1 + L/q)`` to each principal section.
"""
from __future__ import annotations

import cmath
import math

from ..errors import ContractViolation
from .elements import CircularAperture, Drift, HilbertPhasePlate, Quadrupole, RoundLens


def drift(q: complex, length: float) -> complex:
    return q + length


def lens(q: complex, power: float) -> complex:
    """Thin lens of optical power ``1/f``."""
    return 1 / (1 / q - power)


def drift_gouy(q: complex, length: float) -> float:
    """Gouy angle accumulated by one principal section over a drift."""
    return cmath.phase(1 + length / q)


def waist_distance(q: complex) -> float:
    """Distance from the current plane to the waist (positive if downstream)."""
    return -q.real


def rayleigh(q: complex) -> float:
    return -q.imag


def trace_sections(q_in: complex, elements, frame_angle: float | None = None):
    """Follow both principal sections of an astigmatic Gaussian through ``elements``.

    All quadrupoles must share the frame angle modulo 90 degrees; a
    quadrupole turned by 90 degrees simply swaps polarity. Hilbert phase
    plates and apertures are not Gaussian operations and are skipped.

    Returns
    -------
    (q_u, q_v, psi_u, psi_v) : tuple
        Output beam parameters of the ``u`` section (along the frame angle)
        and the ``v`` section, and the accumulated Gouy angles.
    """
    qs = [complex(q_in), complex(q_in)]
    psi = [0.0, 0.0]
    for e in elements:
        if isinstance(e, Drift):
            for i in range(2):
                psi[i] += drift_gouy(qs[i], e.length)
                qs[i] = drift(qs[i], e.length)
        elif isinstance(e, RoundLens):
            qs = [lens(q, 1 / e.focal_length) for q in qs]
        elif isinstance(e, Quadrupole):
            if frame_angle is None:
                frame_angle = e.axis_angle
            turns = (e.axis_angle - frame_angle) / (math.pi / 2)
            if abs(turns - round(turns)) > 1e-9:
                raise ContractViolation("quadrupoles with non-orthogonal frames are not Gaussian-separable")
            sign = 1 if round(turns) % 2 == 0 else -1
            p = sign / e.focal_length
            qs = [lens(qs[0], p), lens(qs[1], -p)]
        elif isinstance(e, (HilbertPhasePlate, CircularAperture)):
            continue
        else:
            raise ContractViolation(f"unknown element {e!r}")
    return qs[0], qs[1], psi[0], psi[1]
