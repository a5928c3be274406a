"""Column specification and the element-by-element pipeline."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..errors import ContractViolation
from ..field import GridSpec, WaveField
from .elements import Drift, Quadrupole, RoundLens, apply_element
from .propagation import DEFAULT_TOLERANCES, Tolerances, propagate_free, propagate_through_lens


@dataclass(frozen=True)
class ColumnSpec:
    """Ordered elements starting at the input plane.

    Parameters
    ----------
    elements : tuple
        Elements in beam order; thin elements act at the current plane.
    grid : GridSpec
        Grid of the input field.
    energy_kev : float
        Beam energy.
    """

    elements: tuple
    grid: GridSpec
    energy_kev: float

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise ContractViolation("a column needs at least one element")
        if self.length <= 0:
            raise ContractViolation("a column must contain at least one drift")

    @property
    def length(self) -> float:
        return sum(e.length for e in self.elements if isinstance(e, Drift))

    def element_planes(self, z0: float = 0.0):
        """Axial position of every element, in order."""
        z = z0
        out = []
        for e in self.elements:
            out.append(z)
            if isinstance(e, Drift):
                z += e.length
        return out


def run_column(input: WaveField, spec: ColumnSpec, record_planes=(), method: str = "auto",
               tolerances: Tolerances = DEFAULT_TOLERANCES):
    """Send ``input`` through ``spec`` and return snapshots at ``record_planes``.

    A snapshot at a plane holding thin elements is taken after all of them
    have acted. Drifts are split at planes that fall inside them.
    """
    z0 = input.z_pos
    z_end = z0 + spec.length
    planes = [float(z) for z in record_planes]
    for z in planes:
        if not z0 - 1e-12 <= z <= z_end + 1e-12:
            raise ContractViolation(f"record plane {z} lies outside the column [{z0}, {z_end}]")
    found = {}

    def record(f):
        for i, z in enumerate(planes):
            if i not in found and abs(z - f.z_pos) <= 1e-12 * max(1.0, abs(z)):
                found[i] = f

    f = input
    z = z0
    power = 0.0  # round lens waiting to be fused with the next drift
    elements = spec.elements
    for i, e in enumerate(elements):
        if isinstance(e, Drift):
            record(f)
            target = z + e.length
            inside = sorted(p for j, p in enumerate(planes) if j not in found and z < p < target)
            for p in inside + [target]:
                if power:
                    f = propagate_through_lens(f, power, p - f.z_pos, method, tolerances)
                    power = 0.0
                else:
                    f = propagate_free(f, p - f.z_pos, method, tolerances)
                f = f.with_values(f.values, z_pos=p)
                if p != target:
                    record(f)
            z = target
        elif isinstance(e, RoundLens) and i + 1 < len(elements) and isinstance(elements[i + 1], Drift):
            if any(j not in found and abs(p - z) <= 1e-12 * max(1.0, abs(z))
                   for j, p in enumerate(planes)):
                # a snapshot is due right after the lens
                f = apply_element(f, e)
            else:
                power += 1 / e.focal_length
        else:
            f = apply_element(f, e)
    record(f)
    return [found[i] for i in range(len(planes))] if planes else [f]


def rotate_gate_frame(spec: ColumnSpec, alpha: float) -> ColumnSpec:
    """Turn every quadrupole by ``alpha`` about the optical axis."""
    if not any(isinstance(e, Quadrupole) for e in spec.elements):
        raise ContractViolation("the column has no quadrupoles to rotate")
    if alpha == 0:
        return spec
    elems = tuple(replace(e, axis_angle=e.axis_angle + alpha) if isinstance(e, Quadrupole) else e
                  for e in spec.elements)
    return replace(spec, elements=elems)


def gate_frame_angle(spec: ColumnSpec) -> float:
    """Frame angle of the first quadrupole, reduced to ``[0, pi)``."""
    for e in spec.elements:
        if isinstance(e, Quadrupole):
            return math.fmod(e.axis_angle, math.pi) % math.pi
    raise ContractViolation("the column has no quadrupoles")
