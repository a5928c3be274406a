"""Electron-optical column: elements, propagation, converter tuning."""
from .elements import (CircularAperture, Drift, HilbertPhasePlate, Quadrupole, RoundLens,
                       apply_element, transmission)
from .propagation import Tolerances, beam_moments, propagate_free
from .runner import ColumnSpec, gate_frame_angle, rotate_gate_frame, run_column
from .tuner import GeometryBounds, McSolution, quarter_wave_family, tune_mode_converter

__all__ = [
    "CircularAperture", "ColumnSpec", "Drift", "GeometryBounds", "HilbertPhasePlate",
    "McSolution", "Quadrupole", "RoundLens", "Tolerances", "apply_element", "beam_moments",
    "gate_frame_angle", "propagate_free", "quarter_wave_family", "rotate_gate_frame",
    "run_column", "transmission", "tune_mode_converter",
]
