"""Exception taxonomy.

ValueError subclasses signal bad inputs (CLI exit code 2 when raised while
loading a config); RuntimeError subclasses signal numerical failures during
an otherwise valid computation (CLI exit code 3).
"""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at (or numerically on top of) a pole."""

    def __init__(self, message: str, k: complex | None = None):
        super().__init__(message)
        self.k = k


class RangeError(ValueError):
    """Evaluation requested outside the range covered by a stored solution."""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class SpectralError(RuntimeError):
    """Scattering/spectral quantity failed a sanity bound."""


class ModulationError(RuntimeError):
    """Modulation equations have no root in the admissible interval."""


class BlowupError(RuntimeError):
    """ODE solution exceeded the blow-up guard."""

    def __init__(self, message: str, s: float | None = None):
        super().__init__(message)
        self.s = s


class InstabilityError(RuntimeError):
    """Time integration produced non-finite field values."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step
