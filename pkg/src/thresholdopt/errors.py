"""Exception types shared across the package."""


class ThresholdError(Exception):
    """Base class for all package-specific failures."""


class DomainError(ThresholdError, ValueError):
    """Input outside an operation's domain (bad m/n pair, R <= 0, ...)."""


class BreakdownError(ThresholdError):
    """A Christoffel step hit a zero pivot: a node of the current measure
    coincides with the shift."""

    def __init__(self, stage, index):
        self.stage = stage
        self.index = index
        super().__init__(f"zero pivot at chain stage {stage}, index {index}")


class DegeneracyError(ThresholdError):
    """An integral spectrum produced colliding exponent pairs."""


class ConvergenceError(ThresholdError):
    """The spectrum dichotomy failed to stabilize within the iteration cap."""

    def __init__(self, message, bracket=None):
        self.bracket = bracket
        super().__init__(message)


class BracketError(ThresholdError):
    """No sign change of the defining polynomial over the given bracket."""


class AmbiguityError(ThresholdError):
    """More than one root inside a bracket that was meant to isolate one."""


class InfeasibleConfigurationError(ThresholdError):
    """A configuration whose spectral radius cannot reach the target degree
    inside the Laguerre bracket."""


class CompletenessError(ThresholdError):
    """Every configuration was rejected.  Theory guarantees acceptance, so
    this signals a numerical failure rather than a true negative."""


class CapExceededError(ThresholdError):
    """Brute-force instance above the supported size cap."""
