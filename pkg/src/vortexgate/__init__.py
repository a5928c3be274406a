"""Simulation of orbital-angular-momentum qubits in electron beams.

Subpackages
-----------
modes
    Laguerre- and Hermite-Gaussian beams on a grid.
qubit
    Bloch-sphere states and single-qubit gates.
column
    Electron-optical elements, wave propagation and converter tuning.
oam
    Polar resampling, OAM spectra and qubit readout.
cli
    Scenario documents and the ``vortexgate`` command.
"""
from .errors import (ContractViolation, InfeasibleGeometryError, NyquistError, SamplingError,
                     TruncationError, UnsupportedModeError, VortexGateError)
from .field import GridSpec, WaveField

__version__ = "0.1.0"

__all__ = [
    "ContractViolation", "GridSpec", "InfeasibleGeometryError", "NyquistError", "SamplingError",
    "TruncationError", "UnsupportedModeError", "VortexGateError", "WaveField",
]
