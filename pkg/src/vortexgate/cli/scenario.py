"""Scenario documents: schema, validation and serialization.

A scenario is a TOML document. Angles are given in degrees, lengths in
metres, energies in keV. See ``docs/scenario.md`` for the full schema.
"""
from __future__ import annotations

import difflib
import math
import re
import sys
from dataclasses import MISSING, asdict, dataclass, fields, replace

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..column import abcd
from ..column.elements import CircularAperture, Drift, HilbertPhasePlate, Quadrupole, RoundLens
from ..errors import VortexGateError
from ..field import GridSpec
from ..modes import BeamParams, electron_wavelength
from ..qubit import GateMatrix, as_equatorial_rotation

PREPARATIONS = ("analytic", "hpp")
GATES = ("off", "rx", "rotation", "custom")
OUTPUT_KINDS = ("intensity_image", "phase_image", "oam_csv", "summary_json")
AUTO_PLANES = ("hpp", "prep_focus", "mc_input", "mc_output", "sample")
CUSTOM_PLANES = ("input", "output")
ELEMENT_TYPES = ("drift", "round_lens", "quadrupole", "hpp", "aperture")
EXTENT_IN_WAISTS = 24.0


class ConfigError(VortexGateError, ValueError):
    """A scenario document is malformed or inconsistent."""


@dataclass(frozen=True)
class Preparation:
    """How the input qubit is made.

    ``analytic`` synthesizes ``(|R> + e^{i phi}|L>)/sqrt 2`` directly at the
    converter entrance. ``hpp`` sends a round Gaussian of waist
    ``illumination_waist`` through a Hilbert phase plate and a condenser
    lens of focal length ``condenser_focal_length`` placed at that waist.
    """

    kind: str
    phi_deg: float = 0.0
    edge_angle_deg: float = 0.0
    phase_step_deg: float = 180.0
    amplitude_factor: float = 1.0
    illumination_waist: float | None = None
    condenser_focal_length: float | None = None


@dataclass(frozen=True)
class Gate:
    """Requested gate.

    ``rx`` is the converter gate in a frame turned by ``frame_angle_deg``;
    ``rotation`` takes a Bloch axis and angle; ``custom`` takes a 2x2 matrix
    as nested ``[re, im]`` pairs. Only rotations about equatorial axes can
    be built from two quadrupoles.
    """

    kind: str
    frame_angle_deg: float = 0.0
    axis: tuple | None = None
    theta_deg: float | None = None
    matrix: tuple | None = None


@dataclass(frozen=True)
class Converter:
    drift: float = 0.06
    branch: str = "far"


@dataclass(frozen=True)
class Objective:
    """Demagnifying round lens a distance ``distance`` after the converter."""

    focal_length: float = 2e-3
    distance: float = 0.01


@dataclass(frozen=True)
class Numerics:
    propagation: str = "auto"
    alias_tolerance: float = 5e-3
    band_loss_tolerance: float = 1e-2
    edge_tolerance: float = 1e-3
    m_max: int = 10
    interpolation_order: int = 5


@dataclass(frozen=True)
class Output:
    kind: str
    plane: str | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    preparation: Preparation
    gate: Gate
    description: str = ""
    energy_kev: float = 200.0
    beam_waist: float = 150e-9
    grid: GridSpec = GridSpec(512, EXTENT_IN_WAISTS * 150e-9)
    converter: Converter = Converter()
    objective: Objective = Objective()
    elements: tuple | None = None
    numerics: Numerics = Numerics()
    outputs: tuple = ()

    @property
    def wavelength(self) -> float:
        return electron_wavelength(self.energy_kev)

    def gate_matrix(self) -> GateMatrix:
        from ..qubit import IDENTITY, frame_rotated, rotation_gate, BlochVector, sqrt_not

        g = self.gate
        if g.kind == "off":
            return GateMatrix(IDENTITY)
        if g.kind == "rx":
            return frame_rotated(sqrt_not(), math.radians(g.frame_angle_deg))
        if g.kind == "rotation":
            return rotation_gate(BlochVector.normalized(*g.axis), math.radians(g.theta_deg))
        return GateMatrix(_matrix_from_pairs(g.matrix))

    def realization(self):
        """``(gouy_target, frame_angle)`` of the converter, or ``None`` for no quadrupoles."""
        g = self.gate
        if g.kind == "off":
            return None
        if g.kind == "rx":
            return math.pi / 2, math.radians(g.frame_angle_deg)
        theta, azimuth = as_equatorial_rotation(self.gate_matrix())
        if min(theta, 2 * math.pi - theta) < 1e-12:
            return None
        alpha = azimuth / 2
        if theta > math.pi:
            # equal up to sign to the rotation by 2 pi - theta about the reversed axis,
            # which is the same converter turned by 90 degrees
            theta = 2 * math.pi - theta
            alpha += math.pi / 2
        return theta, alpha

    def qubit_beam(self) -> BeamParams:
        """Beam at the waist the converter input converges towards."""
        if self.preparation.kind == "analytic":
            return BeamParams.from_energy(self.beam_waist, self.energy_kev)
        p = self.preparation
        ill = BeamParams.from_waist(p.illumination_waist, self.wavelength)
        q = abcd.lens(ill.q(0.0), 1 / p.condenser_focal_length)
        return BeamParams.from_q(complex(0.0, q.imag), ill.wavenumber_k)

    def illumination_beam(self) -> BeamParams:
        return BeamParams.from_waist(self.preparation.illumination_waist, self.wavelength)


def _matrix_from_pairs(pairs):
    return np.array([[complex(*pairs[i][j]) for j in range(2)] for i in range(2)])


# ---------------------------------------------------------------- parsing

_TOP_KEYS = ("name", "description", "energy_kev", "beam", "grid", "preparation", "gate",
             "converter", "objective", "element", "numerics", "output")
_REQUIRED = ("name", "preparation", "gate")
_ELEMENT_KEYS = {
    "drift": ("length",),
    "round_lens": ("focal_length",),
    "quadrupole": ("focal_length", "axis_angle_deg"),
    "hpp": ("edge_angle_deg", "phase_step_deg", "amplitude_factor"),
    "aperture": ("radius",),
}


def _line_of(text, key):
    if text is None:
        return ""
    for i, line in enumerate(text.splitlines(), 1):
        if re.match(rf"\s*\[*\s*{re.escape(key)}\s*[\]=]", line):
            return f" (line {i})"
    return ""


def _check_keys(table, valid, where, text):
    for key in table:
        if key not in valid:
            near = difflib.get_close_matches(key, valid, n=1, cutoff=0.0)
            hint = f"; did you mean '{near[0]}'?" if near else ""
            raise ConfigError(f"unknown key '{key}' in {where}{_line_of(text, key)}{hint}")


def _number(value, where, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where} must be finite")
    if positive and value <= 0:
        raise ConfigError(f"{where} must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _section(cls, table, where, text):
    if not isinstance(table, dict):
        raise ConfigError(f"[{where}] must be a table")
    valid = [f.name for f in fields(cls)]
    _check_keys(table, valid, f"[{where}]", text)
    kwargs = {}
    for f in fields(cls):
        if f.name in table:
            kwargs[f.name] = table[f.name]
    try:
        return cls(**kwargs)
    except TypeError as exc:
        missing = [f.name for f in fields(cls) if f.default is MISSING and f.name not in table]
        raise ConfigError(f"[{where}] is missing required keys {missing}") from exc


def _parse_element(block, i, text):
    where = f"[[element]] #{i + 1}"
    if "type" not in block:
        raise ConfigError(f"{where} needs a 'type' (one of {ELEMENT_TYPES})")
    kind = block["type"]
    if kind not in ELEMENT_TYPES:
        near = difflib.get_close_matches(str(kind), ELEMENT_TYPES, n=1, cutoff=0.0)
        raise ConfigError(f"{where}: unknown element type {kind!r}; did you mean '{near[0]}'?")
    _check_keys({k: v for k, v in block.items() if k != "type"}, _ELEMENT_KEYS[kind], where, text)
    try:
        if kind == "drift":
            return Drift(_number(block.get("length"), f"{where} length", positive=True))
        if kind == "round_lens":
            return RoundLens(_number(block.get("focal_length"), f"{where} focal_length"))
        if kind == "quadrupole":
            return Quadrupole(_number(block.get("focal_length"), f"{where} focal_length"),
                              math.radians(_number(block.get("axis_angle_deg", 0.0), where)))
        if kind == "hpp":
            return HilbertPhasePlate(math.radians(_number(block.get("edge_angle_deg", 0.0), where)),
                                     math.radians(_number(block.get("phase_step_deg", 180.0), where)),
                                     _number(block.get("amplitude_factor", 1.0), where))
        return CircularAperture(_number(block.get("radius"), f"{where} radius", positive=True))
    except VortexGateError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc


def _element_to_table(e):
    if isinstance(e, Drift):
        return {"type": "drift", "length": e.length}
    if isinstance(e, RoundLens):
        return {"type": "round_lens", "focal_length": e.focal_length}
    if isinstance(e, Quadrupole):
        return {"type": "quadrupole", "focal_length": e.focal_length,
                "axis_angle_deg": math.degrees(e.axis_angle)}
    if isinstance(e, HilbertPhasePlate):
        return {"type": "hpp", "edge_angle_deg": math.degrees(e.edge_angle),
                "phase_step_deg": math.degrees(e.phase_step), "amplitude_factor": e.amplitude_factor}
    return {"type": "aperture", "radius": e.radius}


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document.

    Raises
    ------
    ConfigError
        On syntax errors, unknown keys (naming the closest valid key),
        missing required keys or inconsistent settings.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed scenario document: {exc}") from exc
    return scenario_from_dict(doc, text)


def scenario_from_dict(doc: dict, text: str | None = None) -> Scenario:
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise ConfigError(f"missing required keys {missing}; required keys are {list(_REQUIRED)}")
    _check_keys(doc, _TOP_KEYS, "the top level", text)
    name = doc["name"]
    if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z0-9_.-]+", name):
        raise ConfigError(f"name must be a non-empty string of letters, digits, '_', '.', '-', got {name!r}")
    description = doc.get("description", "")
    energy = _number(doc.get("energy_kev", 200.0), "energy_kev", positive=True)
    if not 10 <= energy <= 1000:
        raise ConfigError(f"energy_kev must lie in [10, 1000], got {energy}")

    beam = doc.get("beam", {})
    _check_keys(beam, ["waist"], "[beam]", text)
    waist = _number(beam.get("waist", 150e-9), "[beam] waist", positive=True)

    prep = _section(Preparation, doc["preparation"], "preparation", text)
    gate = _section(Gate, doc["gate"], "gate", text)
    conv = _section(Converter, doc.get("converter", {}), "converter", text)
    obj = _section(Objective, doc.get("objective", {}), "objective", text)
    num_table = dict(doc.get("numerics", {}))
    if prep.kind == "hpp":
        # a sharp phase edge scatters a few percent of the beam to angles outside the window
        num_table.setdefault("alias_tolerance", 2e-2)
        num_table.setdefault("band_loss_tolerance", 0.05)
        num_table.setdefault("edge_tolerance", 1e-2)
    num = _section(Numerics, num_table, "numerics", text)

    prep = _validate_preparation(prep)
    gate = _validate_gate(gate)
    conv = Converter(_number(conv.drift, "[converter] drift", positive=True), conv.branch)
    if conv.branch not in ("far", "near"):
        raise ConfigError(f"[converter] branch must be 'far' or 'near', got {conv.branch!r}")
    obj = Objective(_number(obj.focal_length, "[objective] focal_length", positive=True),
                    _number(obj.distance, "[objective] distance", positive=True))
    num = _validate_numerics(num)

    elements = None
    if "element" in doc:
        blocks = doc["element"]
        if not isinstance(blocks, list) or not blocks:
            raise ConfigError("element blocks must be written as [[element]] tables")
        elements = tuple(_parse_element(b, i, text) for i, b in enumerate(blocks))
        if not any(isinstance(e, Drift) for e in elements):
            raise ConfigError("a custom column needs at least one drift")
        if prep.kind == "hpp":
            raise ConfigError("custom columns take analytic preparation; put the phase plate in an element block")

    scenario = Scenario(name=name, description=description, energy_kev=energy, beam_waist=waist,
                        preparation=prep, gate=gate, converter=conv, objective=obj,
                        elements=elements, numerics=num)
    try:
        qubit_waist = scenario.qubit_beam().waist_w0
    except VortexGateError as exc:
        raise ConfigError(f"[preparation]: {exc}") from exc
    grid_table = doc.get("grid", {})
    _check_keys(grid_table, ["n", "extent"], "[grid]", text)
    n = _number(grid_table.get("n", 512), "[grid] n", positive=True, integer=True)
    extent = _number(grid_table.get("extent", EXTENT_IN_WAISTS * qubit_waist), "[grid] extent", positive=True)
    try:
        grid = GridSpec(n, extent)
    except VortexGateError as exc:
        raise ConfigError(f"[grid]: {exc}") from exc

    outputs = _parse_outputs(doc.get("output"), scenario, text)
    return replace(scenario, grid=grid, outputs=outputs)


def _validate_preparation(p: Preparation) -> Preparation:
    if p.kind not in PREPARATIONS:
        raise ConfigError(f"[preparation] kind must be one of {PREPARATIONS}, got {p.kind!r}")
    vals = {f.name: getattr(p, f.name) for f in fields(p)}
    for key in ("phi_deg", "edge_angle_deg", "phase_step_deg", "amplitude_factor"):
        vals[key] = _number(vals[key], f"[preparation] {key}")
    if not 0 < vals["amplitude_factor"] <= 1:
        raise ConfigError("[preparation] amplitude_factor must lie in (0, 1]")
    if p.kind == "hpp":
        for key in ("illumination_waist", "condenser_focal_length"):
            if vals[key] is None:
                raise ConfigError(f"[preparation] kind 'hpp' needs '{key}'")
            vals[key] = _number(vals[key], f"[preparation] {key}", positive=True)
    else:
        for key in ("illumination_waist", "condenser_focal_length"):
            if vals[key] is not None:
                raise ConfigError(f"[preparation] '{key}' only applies to kind 'hpp'")
    return Preparation(**vals)


def _validate_gate(g: Gate) -> Gate:
    if g.kind not in GATES:
        raise ConfigError(f"[gate] kind must be one of {GATES}, got {g.kind!r}")
    frame = _number(g.frame_angle_deg, "[gate] frame_angle_deg")
    if g.kind != "rx" and frame != 0:
        raise ConfigError("[gate] frame_angle_deg only applies to kind 'rx'")
    axis, theta, matrix = g.axis, g.theta_deg, g.matrix
    if g.kind == "rotation":
        if axis is None or theta is None:
            raise ConfigError("[gate] kind 'rotation' needs 'axis' and 'theta_deg'")
        if not isinstance(axis, (list, tuple)) or len(axis) != 3:
            raise ConfigError("[gate] axis must be a list [X, Y, Z]")
        axis = tuple(_number(a, "[gate] axis") for a in axis)
        if abs(math.fsum(a * a for a in axis) - 1) > 1e-9:
            raise ConfigError(f"[gate] axis must be a unit vector, got {list(axis)}")
        theta = _number(theta, "[gate] theta_deg")
    elif axis is not None or theta is not None:
        raise ConfigError("[gate] 'axis' and 'theta_deg' only apply to kind 'rotation'")
    if g.kind == "custom":
        try:
            m = np.array(matrix, dtype=float)
            assert m.shape == (2, 2, 2)
        except Exception as exc:
            raise ConfigError("[gate] matrix must be [[[re, im], [re, im]], [[re, im], [re, im]]]") from exc
        matrix = tuple(tuple(tuple(float(x) for x in pair) for pair in row) for row in m)
        try:
            GateMatrix(_matrix_from_pairs(matrix))
        except VortexGateError as exc:
            raise ConfigError(f"[gate] {exc}") from exc
    elif matrix is not None:
        raise ConfigError("[gate] 'matrix' only applies to kind 'custom'")
    gate = Gate(g.kind, frame, axis, theta, matrix)
    if g.kind in ("rotation", "custom"):
        scen = Scenario("check", Preparation("analytic"), gate)
        if as_equatorial_rotation(scen.gate_matrix()) is None:
            raise ConfigError(
                "[gate] two quadrupoles realize only rotations about equatorial Bloch axes; "
                "this gate has a Z component")
        target, _ = scen.realization() or (0.0, 0.0)
        if target >= math.pi - 1e-9:
            raise ConfigError("[gate] a rotation by 180 degrees needs an infinite Gouy difference")
    return gate


def _validate_numerics(n: Numerics) -> Numerics:
    if n.propagation not in ("auto", "asm", "scaled"):
        raise ConfigError(f"[numerics] propagation must be 'auto', 'asm' or 'scaled', got {n.propagation!r}")
    if n.interpolation_order not in (1, 3, 5):
        raise ConfigError("[numerics] interpolation_order must be 1, 3 or 5")
    return Numerics(n.propagation,
                    _number(n.alias_tolerance, "[numerics] alias_tolerance", positive=True),
                    _number(n.band_loss_tolerance, "[numerics] band_loss_tolerance", positive=True),
                    _number(n.edge_tolerance, "[numerics] edge_tolerance", positive=True),
                    _number(n.m_max, "[numerics] m_max", positive=True, integer=True),
                    int(n.interpolation_order))


def available_planes(s: Scenario):
    if s.elements is not None:
        return CUSTOM_PLANES
    planes = ["mc_input", "mc_output", "sample"]
    if s.preparation.kind == "hpp":
        planes.insert(0, "hpp")
        if s.gate.kind == "off":
            planes.insert(1, "prep_focus")
    return tuple(planes)


def _parse_outputs(blocks, s: Scenario, text):
    if blocks is None:
        return (Output("summary_json"), Output("oam_csv"),
                Output("intensity_image", "sample"), Output("phase_image", "sample"))
    if not isinstance(blocks, list):
        raise ConfigError("outputs must be written as [[output]] tables")
    planes = available_planes(s)
    out = []
    for i, b in enumerate(blocks):
        where = f"[[output]] #{i + 1}"
        _check_keys(b, ["kind", "plane"], where, text)
        kind = b.get("kind")
        if kind not in OUTPUT_KINDS:
            raise ConfigError(f"{where}: kind must be one of {OUTPUT_KINDS}, got {kind!r}")
        plane = b.get("plane")
        if kind.endswith("_image"):
            if plane is None:
                raise ConfigError(f"{where}: image outputs need a 'plane' (one of {planes})")
            if plane not in planes:
                near = difflib.get_close_matches(str(plane), planes, n=1, cutoff=0.0)
                raise ConfigError(f"{where}: plane {plane!r} does not exist in this column "
                                  f"(available: {list(planes)}); did you mean '{near[0]}'?")
        elif plane is not None:
            raise ConfigError(f"{where}: '{kind}' takes no plane")
        out.append(Output(kind, plane))
    return tuple(out)


def scenario_to_dict(s: Scenario) -> dict:
    def clean(d):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items() if v is not None}

    doc = {"name": s.name}
    if s.description:
        doc["description"] = s.description
    doc["energy_kev"] = s.energy_kev
    doc["beam"] = {"waist": s.beam_waist}
    doc["grid"] = {"n": s.grid.n, "extent": s.grid.extent}
    doc["preparation"] = clean(asdict(s.preparation))
    gate = clean(asdict(s.gate))
    if s.gate.matrix is not None:
        gate["matrix"] = [[list(p) for p in row] for row in s.gate.matrix]
    doc["gate"] = gate
    doc["converter"] = asdict(s.converter)
    doc["objective"] = asdict(s.objective)
    doc["numerics"] = asdict(s.numerics)
    if s.elements is not None:
        doc["element"] = [_element_to_table(e) for e in s.elements]
    doc["output"] = [clean(asdict(o)) for o in s.outputs]
    return doc


def serialize_scenario(s: Scenario) -> str:
    """TOML text that parses back to ``s``."""
    return tomli_w.dumps(scenario_to_dict(s))


def load_scenario(path) -> Scenario:
    """Read a scenario from a file path or a shipped scenario name."""
    from pathlib import Path

    p = Path(path)
    if not p.exists() and p.suffix == "" and str(path) in shipped_scenarios():
        p = _shipped_dir() / f"{path}.toml"
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {str(path)!r}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise ConfigError(f"scenario {str(path)!r} is not UTF-8") from exc
    return parse_scenario(text)


def _shipped_dir():
    from importlib.resources import files

    return files("vortexgate.cli") / "scenarios"


def shipped_scenarios():
    """Names of the scenarios bundled with the package."""
    return sorted(p.name[:-5] for p in _shipped_dir().iterdir() if p.name.endswith(".toml"))
