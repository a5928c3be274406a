"""Quadrupole settings for the astigmatic mode converter.

The converter is two quadrupoles ``Q1 -- d -- Q2`` sharing one frame. A round
beam enters Q1 converging towards a waist a distance ``s`` downstream. Q1
splits it into a converging section ``u`` and a diverging section ``v``; the
drift lets the two sections pick up different Gouy angles; Q2 makes the beam
round again. The gate is a rotation about the frame's equatorial axis by the
Gouy difference ``psi_u - psi_v``.

For a quarter-wave difference there is an exact one-parameter family

    f1 = (s^2 + zR^2) / zR,  d = (s^2 + zR^2) / s,  f2 = 2 zR (s^2 + zR^2) / s^2,

which requires ``d >= 2 zR``. The solver below handles any target angle by
Newton iteration in ``(zR/f1, s/zR)`` and uses the family as its start.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation, InfeasibleGeometryError
from ..modes import BeamParams
from . import abcd
from .elements import Drift, Quadrupole


@dataclass(frozen=True)
class GeometryBounds:
    """Admissible ranges, in metres, for the quadrupole focal lengths and ``s``."""

    focal_min: float = 1e-6
    focal_max: float = 10.0
    focus_min: float = 1e-6
    focus_max: float = 10.0

    def __post_init__(self):
        if not (0 < self.focal_min < self.focal_max and 0 < self.focus_min < self.focus_max):
            raise ContractViolation("geometry bounds must be positive, ordered intervals")


@dataclass(frozen=True)
class McSolution:
    """A tuned mode converter.

    Attributes
    ----------
    f1, f2 : float
        Quadrupole focal lengths; positive means converging along the frame axis.
    d : float
        Quadrupole separation.
    gouy_delta : float
        Achieved Gouy difference between the two principal sections.
    input_focus : float
        Distance from Q1 to the waist the incoming beam converges towards.
    q_out : complex
        Beam parameter just after Q2.
    residuals : tuple of float
        Gouy and astigmatism residuals at the solution.
    """

    f1: float
    f2: float
    d: float
    gouy_delta: float
    input_focus: float
    q_out: complex
    residuals: tuple
    target: float = math.pi / 2
    iterations: int = 0

    def elements(self, axis_angle: float = 0.0):
        return [Quadrupole(self.f1, axis_angle), Drift(self.d), Quadrupole(self.f2, axis_angle)]

    def output_beam(self, k: float) -> BeamParams:
        return BeamParams.from_q(self.q_out, k)

    @property
    def output_waist_distance(self) -> float:
        """Distance from Q2 to the output waist (negative if virtual)."""
        return abcd.waist_distance(self.q_out)


def quarter_wave_family(zr: float, s: float):
    """``(f1, d, f2)`` of the exact quarter-wave converter for input focus ``s``."""
    D = s * s + zr * zr
    return D / zr, D / s, 2 * zr * D / (s * s)


def _h(u, d):
    return u / (1 + d * u)


def _residuals(x, zr, d, target):
    a, b = x
    s = b * zr
    q = complex(-s, -zr)
    u0 = 1 / q
    ux = u0 - a / zr
    uy = u0 + a / zr
    gx, gy = 1 + d * ux, 1 + d * uy
    r1 = cmath.phase(gx) - cmath.phase(gy) - target
    r2 = zr * (_h(ux, d) - _h(uy, d)).imag
    du0 = zr / q ** 2
    dux = np.array([-1 / zr, du0])
    duy = np.array([1 / zr, du0])
    J = np.empty((2, 2))
    J[0] = np.imag(d / gx * dux) - np.imag(d / gy * duy)
    J[1] = zr * (np.imag(dux / gx ** 2) - np.imag(duy / gy ** 2))
    return np.array([r1, r2]), J, ux, uy


def _newton(x0, zr, d, target, tol=1e-13, max_iter=100):
    x = np.array(x0, dtype=float)
    r, J, _, _ = _residuals(x, zr, d, target)
    for it in range(max_iter):
        if np.max(np.abs(r)) < tol:
            return x, r, it
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-6:
            xn = x + lam * step
            if xn[1] > 0:
                rn, Jn, _, _ = _residuals(xn, zr, d, target)
                if np.linalg.norm(rn) < np.linalg.norm(r):
                    break
            lam /= 2
        else:
            return None
        x, r, J = xn, rn, Jn
    return (x, r, max_iter) if np.max(np.abs(r)) < tol * 1e3 else None


def _seeds(zr, d, target, branch):
    disc = d * d - 4 * zr * zr
    seeds = []
    if disc >= 0:
        roots = [(d + math.sqrt(disc)) / 2, (d - math.sqrt(disc)) / 2]
        if branch == "near":
            roots.reverse()
        for s in roots:
            f1, _, _ = quarter_wave_family(zr, s)
            seeds.append((zr / f1, s / zr))
    # coarse multistart for other targets or short drifts
    for b in np.geomspace(0.05, 20, 12):
        for a in np.geomspace(0.02, 5, 12):
            seeds.append((a, b))
    return seeds


def _landscape(zr, d, bounds):
    """Extremes of the Gouy difference over stigmatic points in the bounds."""
    from scipy.optimize import brentq

    gouy = []
    for s in np.geomspace(bounds.focus_min, bounds.focus_max, 60):
        b = s / zr
        a_hi = zr / bounds.focal_min
        a_grid = np.geomspace(zr / bounds.focal_max, a_hi, 200)
        w = [_residuals((a, b), zr, d, 0.0)[0][1] for a in a_grid]
        for i in range(len(a_grid) - 1):
            if w[i] == 0 or np.sign(w[i]) != np.sign(w[i + 1]):
                a = brentq(lambda t: _residuals((t, b), zr, d, 0.0)[0][1], a_grid[i], a_grid[i + 1])
                gouy.append(_residuals((a, b), zr, d, 0.0)[0][0])
    if not gouy:
        return None
    return min(gouy), max(gouy)


def tune_mode_converter(p: BeamParams, d: float, bounds: GeometryBounds | None = None,
                        target: float = math.pi / 2, branch: str = "far") -> McSolution:
    """Solve for quadrupole focal lengths realizing a Gouy difference ``target``.

    Parameters
    ----------
    p : BeamParams
        Beam at the waist the incoming beam converges towards.
    d : float
        Quadrupole separation in metres.
    bounds : GeometryBounds, optional
        Admissible focal lengths and input focus distances.
    target : float
        Gouy difference in ``(0, pi)``; ``pi/2`` gives the sqrt(NOT) gate.
    branch : {"far", "near"}
        Which of the two quarter-wave solutions to prefer.

    Raises
    ------
    InfeasibleGeometryError
        If no solution with positive ``f1`` lies inside ``bounds``.
    """
    if not d > 0:
        raise ContractViolation(f"quadrupole separation must be positive, got {d}")
    if not 0 < target < math.pi:
        raise ContractViolation(f"target Gouy difference must lie in (0, pi), got {target}")
    if branch not in ("far", "near"):
        raise ContractViolation(f"branch must be 'far' or 'near', got {branch!r}")
    bounds = bounds or GeometryBounds()
    zr = p.rayleigh_zR

    def admissible(x):
        a, b = x
        if a <= 0:
            return False
        f1, s = zr / a, b * zr
        _, _, ux, uy = _residuals(x, zr, d, target)
        f2 = 2 / (_h(ux, d) - _h(uy, d)).real
        return (bounds.focal_min <= f1 <= bounds.focal_max
                and bounds.focal_min <= abs(f2) <= bounds.focal_max
                and bounds.focus_min <= s <= bounds.focus_max)

    for seed in _seeds(zr, d, target, branch):
        res = _newton(seed, zr, d, target)
        if res is not None and admissible(res[0]):
            return _build(res[0], zr, d, target, p.wavenumber_k, res[2])

    extremes = _landscape(zr, d, bounds)
    detail = ("no stigmatic configuration found in the bounds" if extremes is None else
              f"Gouy difference over stigmatic configurations spans "
              f"[{extremes[0]:.6g}, {extremes[1]:.6g}] rad")
    hint = f"; a quarter-wave converter needs d >= 2 zR = {2 * zr:.6g} m" if d < 2 * zr else ""
    raise InfeasibleGeometryError(
        f"no converter with d = {d:.6g} m reaches a Gouy difference of {target:.6g} rad: {detail}{hint}")


def _build(x, zr, d, target, k, iterations):
    r, _, ux, uy = _residuals(x, zr, d, target)
    a, b = x
    f1 = zr / a
    p2 = (_h(ux, d) - _h(uy, d)).real / 2
    f2 = 1 / p2
    s = b * zr
    q_in = complex(-s, -zr)
    elems = [Quadrupole(f1), Drift(d), Quadrupole(f2)]
    qu, qv, psi_u, psi_v = abcd.trace_sections(q_in, elems)
    astig = abs(qu - qv) / abs(qu)
    if astig > 1e-3 or abs(psi_u - psi_v - target) > 1e-4:
        raise InfeasibleGeometryError("converged point failed the transport check")
    return McSolution(f1=f1, f2=f2, d=d, gouy_delta=psi_u - psi_v, input_focus=s,
                      q_out=(qu + qv) / 2, residuals=(float(r[0]), float(r[1])),
                      target=target, iterations=iterations)
