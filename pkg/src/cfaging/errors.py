"""Exception types shared across the simulator."""


class InvalidParameterError(ValueError):
    """A numeric argument or configuration field violates its contract."""


class ConfigError(ValueError):
    """A configuration file is malformed or contains unknown keys."""


class DegenerateInputError(ValueError):
    """An input is structurally valid but carries no usable information."""


class RankDeficiencyError(ArithmeticError):
    """A Gram matrix is singular or too ill-conditioned to invert.

    Carries the reciprocal condition estimate that triggered the failure.
    """

    def __init__(self, message: str, rcond: float | None = None):
        super().__init__(message)
        self.rcond = rcond
