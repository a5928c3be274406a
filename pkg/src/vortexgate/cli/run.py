"""Scenario execution: build the column, propagate, read out, write artifacts."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..column import abcd
from ..column.elements import Drift, HilbertPhasePlate, RoundLens
from ..column.propagation import Tolerances
from ..column.runner import ColumnSpec, run_column
from ..column.tuner import McSolution, tune_mode_converter
from ..errors import VortexGateError
from ..field import GridSpec, WaveField, centroid
from ..modes import BeamParams, synth_gaussian, synth_lg, synth_state
from ..oam import DISPLAY_RANGE, oam_spectrum, project_onto_qubit
from ..qubit import BlochState, apply_gate, equator_state, fidelity
from .render import render_field
from .scenario import ConfigError, Scenario


@dataclass(frozen=True)
class Layout:
    """A concrete column with named planes and the ideal beam at its output."""

    spec: ColumnSpec
    planes: dict
    input_field: WaveField
    readout_beam: BeamParams
    readout_plane: str
    readout_z: float
    solution: McSolution | None
    frame_angle: float


@dataclass
class RunSummary:
    """Result of one scenario run.

    Complex amplitudes are stored as ``[re, im]`` pairs in JSON.
    """

    scenario: str
    input_phi_deg: float
    predicted: BlochState
    measured: BlochState
    amplitudes: tuple
    fidelity: float
    residual: float
    oam_fractions: dict
    oam_minus_one_share: float
    readout_norm: float
    planes: dict
    converter: dict | None
    lobe_axis_deg: dict
    timings: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        def pair(z):
            return [float(z.real), float(z.imag)]

        return {
            "scenario": self.scenario,
            "input_phi_deg": self.input_phi_deg,
            "predicted": {"a_R": pair(self.predicted.a_R), "a_L": pair(self.predicted.a_L)},
            "measured": {"a_R": pair(self.measured.a_R), "a_L": pair(self.measured.a_L)},
            "amplitudes": {"a_R": pair(self.amplitudes[0]), "a_L": pair(self.amplitudes[1])},
            "fidelity": self.fidelity,
            "residual": self.residual,
            "oam_fractions": {str(m): v for m, v in self.oam_fractions.items()},
            "oam_minus_one_share": self.oam_minus_one_share,
            "readout_norm": self.readout_norm,
            "planes": self.planes,
            "converter": self.converter,
            "lobe_axis_deg": self.lobe_axis_deg,
        }


def input_phi(s: Scenario) -> float:
    """Equator angle of the prepared qubit, in radians.

    A phase plate with its edge along ``a`` gives lobes across the edge, at
    ``a + 90`` degrees, which is the equator state ``phi = 2a + 180``.
    """
    p = s.preparation
    if p.kind == "analytic":
        return math.radians(p.phi_deg)
    return math.remainder(2 * math.radians(p.edge_angle_deg) + math.pi, 2 * math.pi)


def predicted_state(s: Scenario) -> BlochState:
    return apply_gate(s.gate_matrix(), equator_state(input_phi(s)))


def _with_z(f: WaveField, z: float) -> WaveField:
    return f.with_values(f.values, z_pos=z)


def build_layout(s: Scenario) -> Layout:
    """Turn a scenario into a column, its named planes and the input field."""
    if s.elements is not None:
        return _custom_layout(s)
    p = s.qubit_beam()
    real = s.realization()
    if real is None:
        # same geometry as the active converter, quadrupoles switched off
        sol = None
        zr = p.rayleigh_zR
        d = s.converter.drift
        disc = d * d - 4 * zr * zr
        if disc < 0:
            raise ConfigError(f"[converter] drift {d} m is shorter than 2 zR = {2 * zr:.6g} m")
        root = math.sqrt(disc)
        s_focus = (d + root) / 2 if s.converter.branch == "far" else (d - root) / 2
        gate_elems = [Drift(d)]
        frame = 0.0
    else:
        target, frame = real
        sol = tune_mode_converter(p, s.converter.drift, target=target, branch=s.converter.branch)
        s_focus = sol.input_focus
        d = sol.d
        gate_elems = sol.elements(frame)

    elems = []
    planes = {}
    if s.preparation.kind == "hpp":
        prep = s.preparation
        ill = s.illumination_beam()
        q = abcd.lens(ill.q(0.0), 1 / prep.condenser_focal_length)
        z_focus = abcd.waist_distance(q)
        lead = z_focus - s_focus
        if lead <= 0:
            raise ConfigError(
                f"[preparation] the condenser focus ({z_focus:.6g} m) must lie beyond the converter "
                f"input focus distance ({s_focus:.6g} m) so the converter fits after the lens")
        elems += [HilbertPhasePlate(math.radians(prep.edge_angle_deg), math.radians(prep.phase_step_deg),
                                    prep.amplitude_factor),
                  RoundLens(prep.condenser_focal_length), Drift(lead)]
        planes["hpp"] = 0.0
        if real is None:
            planes["prep_focus"] = z_focus
        z_in = lead
        field = synth_gaussian(ill, s.grid, 0.0)
    else:
        z_in = 0.0
        field = _with_z(synth_state(p, equator_state(input_phi(s)), s.grid, -s_focus), 0.0)

    # ideal beam through the converter to the sample
    q_in = p.q(-s_focus)
    qu, qv, _, _ = abcd.trace_sections(q_in, gate_elems, frame if sol else None)
    if abs(qu - qv) > 1e-6 * abs(qu):
        raise VortexGateError("converter output is astigmatic")
    q_obj = abcd.drift(qu, s.objective.distance)
    q_after = abcd.lens(q_obj, 1 / s.objective.focal_length)
    to_sample = abcd.waist_distance(q_after)
    if to_sample <= 0:
        raise ConfigError("[objective] the objective does not form a real focus; shorten its focal length")
    readout = BeamParams.from_q(complex(0.0, q_after.imag), p.wavenumber_k)

    elems += gate_elems
    elems += [Drift(s.objective.distance), RoundLens(s.objective.focal_length), Drift(to_sample)]
    planes["mc_input"] = z_in
    planes["mc_output"] = z_in + d
    planes["sample"] = z_in + d + s.objective.distance + to_sample
    spec = ColumnSpec(tuple(elems), s.grid, s.energy_kev)
    return Layout(spec, planes, field, readout, "sample", 0.0, sol, frame)


def _custom_layout(s: Scenario) -> Layout:
    p = s.qubit_beam()
    field = synth_state(p, equator_state(input_phi(s)), s.grid, 0.0)
    spec = ColumnSpec(s.elements, s.grid, s.energy_kev)
    qu, qv, _, _ = abcd.trace_sections(p.q(0.0), s.elements)
    if abs(qu - qv) > 1e-6 * abs(qu):
        raise ConfigError("custom column output is astigmatic; a qubit readout needs a round output beam")
    # the output plane sits qu.real past the waist of the output beam
    readout = BeamParams.from_q(qu, p.wavenumber_k)
    planes = {"input": 0.0, "output": spec.length}
    return Layout(spec, planes, field, readout, "output", qu.real, None, 0.0)


def lobe_axis(f: WaveField):
    """Principal axis of the intensity distribution, degrees in ``[0, 180)``, and its anisotropy."""
    X, Y = f.coords()
    inten = f.intensity()
    cx, cy = centroid(f)
    sxx = ((X - cx) ** 2 * inten).sum()
    syy = ((Y - cy) ** 2 * inten).sum()
    sxy = ((X - cx) * (Y - cy) * inten).sum()
    angle = math.degrees(0.5 * math.atan2(2 * sxy, sxx - syy)) % 180
    spread = math.hypot(sxx - syy, 2 * sxy) / (sxx + syy)
    return float(angle), float(spread)


def _readout_basis(layout: Layout, out: WaveField, z_rel: float):
    g = GridSpec(out.n_x, out.extent)
    bR = synth_lg(layout.readout_beam, 1, g, z_rel)
    bL = synth_lg(layout.readout_beam, -1, g, z_rel)
    return _with_z(bR, out.z_pos), _with_z(bL, out.z_pos)


def run_scenario(s: Scenario, out_dir=None) -> RunSummary:
    """Run ``s`` and write its requested artifacts into ``out_dir``.

    Errors from the numerical modules are re-raised with the scenario name
    and the stage that failed.
    """
    timings = {}
    t0 = time.perf_counter()
    stage = "layout"
    try:
        layout = build_layout(s)
        timings["layout_s"] = time.perf_counter() - t0
        wanted = {o.plane for o in s.outputs if o.plane}
        names = sorted(wanted | {layout.readout_plane, "mc_input"} & set(layout.planes),
                       key=lambda n: layout.planes[n])
        stage = "propagation"
        t1 = time.perf_counter()
        num = s.numerics
        tol = Tolerances(num.alias_tolerance, num.band_loss_tolerance, num.edge_tolerance)
        shots = run_column(layout.input_field, layout.spec, [layout.planes[n] for n in names],
                           method=num.propagation, tolerances=tol)
        fields_at = dict(zip(names, shots))
        timings["propagation_s"] = time.perf_counter() - t1

        stage = "readout"
        t2 = time.perf_counter()
        out = fields_at[layout.readout_plane]
        bR, bL = _readout_basis(layout, out, layout.readout_z)
        proj = project_onto_qubit(out, bR, bL)
        predicted = predicted_state(s)
        spectrum = oam_spectrum(out, num.m_max, order=num.interpolation_order)
        ip, im = spectrum.intensity(1), spectrum.intensity(-1)
        share = im / (ip + im) if ip + im > 0 else float("nan")
        lobes = {}
        for n, f in fields_at.items():
            angle, spread = lobe_axis(f)
            lobes[n] = {"angle": angle, "anisotropy": spread}
        timings["readout_s"] = time.perf_counter() - t2
    except ConfigError:
        raise
    except VortexGateError as exc:
        raise type(exc)(f"scenario '{s.name}', {stage}: {exc}") from exc

    conv = None
    if layout.solution is not None:
        sol = layout.solution
        conv = {"f1": sol.f1, "f2": sol.f2, "d": sol.d, "input_focus": sol.input_focus,
                "gouy_delta": sol.gouy_delta, "residuals": list(sol.residuals),
                "frame_angle_deg": math.degrees(layout.frame_angle)}
    summary = RunSummary(
        scenario=s.name,
        input_phi_deg=math.degrees(input_phi(s)),
        predicted=predicted,
        measured=proj.state,
        amplitudes=proj.amplitudes,
        fidelity=fidelity(predicted, proj.state),
        residual=proj.residual,
        oam_fractions=spectrum.as_dict(True, DISPLAY_RANGE),
        oam_minus_one_share=share,
        readout_norm=out.norm(),
        planes=dict(layout.planes),
        converter=conv,
        lobe_axis_deg=lobes,
    )
    if out_dir is not None:
        t3 = time.perf_counter()
        write_artifacts(s, summary, spectrum, fields_at, out_dir)
        timings["write_s"] = time.perf_counter() - t3
    timings["total_s"] = time.perf_counter() - t0
    summary.timings = timings
    if out_dir is not None:
        (Path(out_dir) / "timings.json").write_text(json.dumps(timings, indent=2) + "\n")
    return summary


def write_artifacts(s: Scenario, summary: RunSummary, spectrum, fields_at, out_dir) -> None:
    from .scenario import serialize_scenario

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario_resolved.toml").write_text(serialize_scenario(s))
    for o in s.outputs:
        if o.kind == "summary_json":
            (out / "summary.json").write_text(json.dumps(summary.to_json_dict(), indent=2) + "\n")
        elif o.kind == "oam_csv":
            spectrum.to_csv(out / "oam.csv")
        else:
            kind = o.kind[:-len("_image")]
            render_field(fields_at[o.plane], kind, out / f"{o.plane}_{kind}.pgm")
