"""Exception types shared across the toolkit.

The CLI maps these onto process exit codes: configuration and geometry
problems exit 2, failed numeric checks exit 3, inconclusive verdicts exit 4.
"""


class QuasilatticeError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(QuasilatticeError):
    """A config value violates its declared constraints."""


class GeometryError(ConfigurationError):
    """A support or window interval escapes its admissible region."""


class ContractViolation(QuasilatticeError):
    """An operation was called with inputs outside its contract."""


class ConvergenceError(QuasilatticeError):
    """The fixed-point iteration failed to contract.

    Carries the empirical expansion estimate so calibration loops can react.
    """

    def __init__(self, message, lipschitz_estimate=None):
        super().__init__(message)
        self.lipschitz_estimate = lipschitz_estimate


class CalibrationError(QuasilatticeError):
    """Auto-calibration ran out of admissible scales."""


class ConstructionError(QuasilatticeError):
    """A certified construction failed its own certificate."""
