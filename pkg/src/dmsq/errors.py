"""Exception types raised by the library."""


class ConfigError(ValueError):
    """Structurally invalid configuration (bad lengths, signs, or fields)."""


class ConfigParseError(ConfigError):
    """Config file could not be parsed; carries line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class FixedPointError(RuntimeError):
    """Drive-to-coupling fixed-point iteration failed to converge."""


class EigensolverError(RuntimeError):
    """Eigenvalue computation did not converge (distinct from 'unstable')."""


class UnstableSystemError(RuntimeError):
    """Operation requires a dynamically stable drift matrix."""


class LyapunovResidualError(RuntimeError):
    """Lyapunov solve exceeded the residual tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class OdeConvergenceError(RuntimeError):
    """Covariance ODE integration exhausted its step budget."""


class ThresholdError(RuntimeError):
    """Threshold search could not bracket a sign change."""
