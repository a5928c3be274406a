"""Two-level algebra over the vortex basis ``{|R>, |L>}``.

Amplitude vectors are ordered ``(a_R, a_L)``. ``|R>`` and ``|L>`` sit at
the north and south poles of the Bloch sphere; the equator holds the
Hermite-Gauss-like states ``(|R> + e^{i phi} |L>) / sqrt(2)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

_SQ2 = 1 / math.sqrt(2)


@dataclass(frozen=True)
class BlochState:
    """Normalized qubit state ``a_R |R> + a_L |L>``."""

    a_R: complex
    a_L: complex

    def __post_init__(self):
        object.__setattr__(self, "a_R", complex(self.a_R))
        object.__setattr__(self, "a_L", complex(self.a_L))
        total = abs(self.a_R) ** 2 + abs(self.a_L) ** 2
        if abs(total - 1) > 1e-12:
            raise ContractViolation(f"state norm {total!r} differs from 1 by more than 1e-12")

    @classmethod
    def from_amplitudes(cls, a_R, a_L) -> "BlochState":
        """Build a state from unnormalized amplitudes."""
        n = math.sqrt(abs(a_R) ** 2 + abs(a_L) ** 2)
        if n == 0:
            raise ContractViolation("cannot normalize a zero vector")
        return cls(a_R / n, a_L / n)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.a_R, self.a_L], dtype=np.complex128)

    @property
    def phi(self) -> float:
        """Relative phase ``arg(a_L / a_R)`` in ``(-pi, pi]``."""
        return cmath.phase(self.a_L * self.a_R.conjugate())


@dataclass(frozen=True)
class BlochVector:
    """Unit vector on the Bloch sphere."""

    X: float
    Y: float
    Z: float

    def __post_init__(self):
        n2 = self.X ** 2 + self.Y ** 2 + self.Z ** 2
        if abs(n2 - 1) > 1e-12:
            raise ContractViolation(f"Bloch vector is not unit length (|n|^2 = {n2!r})")

    @classmethod
    def normalized(cls, X, Y, Z) -> "BlochVector":
        n = math.sqrt(X * X + Y * Y + Z * Z)
        if n == 0:
            raise ContractViolation("zero axis")
        return cls(X / n, Y / n, Z / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z])


AXIS_X = BlochVector(1.0, 0.0, 0.0)
AXIS_Y = BlochVector(0.0, 1.0, 0.0)
AXIS_Z = BlochVector(0.0, 0.0, 1.0)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class GateMatrix:
    """Unitary 2x2 matrix acting on ``(a_R, a_L)``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128, copy=True)
        if m.shape != (2, 2):
            raise ContractViolation("gate matrix must be 2x2")
        err = np.max(np.abs(m.conj().T @ m - IDENTITY))
        if err > 1e-12:
            raise ContractViolation(f"gate is not unitary (max |U^H U - 1| = {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: "GateMatrix") -> "GateMatrix":
        return GateMatrix(self.matrix @ other.matrix)

    def dagger(self) -> "GateMatrix":
        return GateMatrix(self.matrix.conj().T)

    def __eq__(self, other):
        return isinstance(other, GateMatrix) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


def rotation_gate(axis: BlochVector, theta: float) -> GateMatrix:
    """``cos(theta/2) 1 - i sin(theta/2) n.sigma``."""
    n = axis.as_array()
    if abs(n @ n - 1) > 1e-12:
        raise ContractViolation("rotation axis must be unit length")
    ns = n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z
    return GateMatrix(math.cos(theta / 2) * IDENTITY - 1j * math.sin(theta / 2) * ns)


def sqrt_not() -> GateMatrix:
    """The mode-converter gate ``(1/sqrt 2) [[1, -i], [-i, 1]]``."""
    return GateMatrix(_SQ2 * np.array([[1, -1j], [-1j, 1]]))


def rz_frame(alpha: float) -> GateMatrix:
    """Qubit action of a rigid spatial rotation by ``alpha``: ``R_Z(2 alpha)``."""
    return rotation_gate(AXIS_Z, 2 * alpha)


def frame_rotated(gate: GateMatrix, alpha: float) -> GateMatrix:
    """Gate seen after turning the optics by ``alpha``: ``R_Z(2a) G R_Z(-2a)``."""
    return rz_frame(alpha) @ gate @ rz_frame(-alpha)


def equatorial_rotation(theta: float, azimuth: float) -> GateMatrix:
    """Rotation by ``theta`` about the equatorial axis at ``azimuth`` from X."""
    return rotation_gate(BlochVector.normalized(math.cos(azimuth), math.sin(azimuth), 0.0), theta)


def as_equatorial_rotation(gate: GateMatrix, tol: float = 1e-9):
    """Express ``gate`` as ``(theta, azimuth)`` of an equatorial rotation up to global phase.

    Returns ``None`` when the rotation axis has a Z component.
    """
    m = gate.matrix
    det = np.linalg.det(m)
    su = m / np.sqrt(det)
    # su = cos(t/2) 1 - i sin(t/2) n.sigma
    c = (su[0, 0] + su[1, 1]).real / 2
    nz_s = -((su[0, 0] - su[1, 1]) / 2).imag
    nx_s = -((su[0, 1] + su[1, 0]) / 2).imag
    ny_s = ((su[1, 0] - su[0, 1]) / 2).real
    s = math.sqrt(nx_s ** 2 + ny_s ** 2 + nz_s ** 2)
    if s < tol:
        return 0.0, 0.0
    if abs(nz_s) > tol:
        return None
    theta = 2 * math.atan2(s, c)
    return theta, math.atan2(ny_s, nx_s)


def apply_gate(g: GateMatrix, s: BlochState) -> BlochState:
    v = g.matrix @ s.vector
    return BlochState.from_amplitudes(v[0], v[1])


def equator_state(phi: float) -> BlochState:
    """``(|R> + e^{i phi} |L>) / sqrt(2)``."""
    phi = math.fmod(phi, 2 * math.pi)
    return BlochState(_SQ2, _SQ2 * cmath.exp(1j * phi))


def output_state_closed_form(phi: float) -> BlochState:
    """Closed-form ``sqrt_not()`` image of ``equator_state(phi)``."""
    c = phi / 2 - math.pi / 4
    g = cmath.exp(1j * c)
    return BlochState.from_amplitudes(g * math.cos(c), -g * math.sin(c))


def bloch_vector(s: BlochState) -> BlochVector:
    x = s.a_R.conjugate() * s.a_L
    return BlochVector.normalized(2 * x.real, 2 * x.imag, abs(s.a_R) ** 2 - abs(s.a_L) ** 2)


def overlap(s1: BlochState, s2: BlochState) -> complex:
    return complex(np.vdot(s1.vector, s2.vector))


def fidelity(s1: BlochState, s2: BlochState) -> float:
    """``|<s1|s2>|``, insensitive to global phase."""
    return min(1.0, abs(overlap(s1, s2)))


STATE_R = BlochState(1, 0)
STATE_L = BlochState(0, 1)
STATE_H = BlochState(_SQ2, _SQ2)
STATE_V = BlochState(_SQ2, -_SQ2)
STATE_PLUS = BlochState(_SQ2, 1j * _SQ2)
STATE_MINUS = BlochState(_SQ2, -1j * _SQ2)
