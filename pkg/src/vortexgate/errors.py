"""Exception hierarchy shared by all vortexgate modules."""


class VortexGateError(Exception):
    """Base class for numerical and contract errors raised by vortexgate."""


class ContractViolation(VortexGateError, ValueError):
    """An input violates a documented precondition."""


class SamplingError(VortexGateError):
    """A grid cannot represent the requested field or propagation step."""


class UnsupportedModeError(VortexGateError, ValueError):
    """A mode index outside the supported subspace was requested."""


class TruncationError(SamplingError):
    """A polar resampling radius reaches beyond the Cartesian grid."""


class NyquistError(SamplingError):
    """Too few azimuthal samples for the requested harmonic range."""


class InfeasibleGeometryError(VortexGateError):
    """No quadrupole setting realizes the requested gate in the given bounds."""
