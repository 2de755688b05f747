"""Exception hierarchy. CLI exit codes hang off the three top-level kinds."""


class TaylorLearningError(Exception):
    exit_code = 1


class ConfigError(TaylorLearningError, ValueError):
    """Bad parameters, unknown names, malformed config files."""

    exit_code = 2


class RegistryError(ConfigError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class CapabilityError(TaylorLearningError):
    """The request is well formed but outside what can be certified or computed."""

    exit_code = 3


class NonconvergenceError(TaylorLearningError):
    exit_code = 4


class DegenerateStencilError(TaylorLearningError, ValueError):
    """Two stencil nodes coincide (within the relative duplicate tolerance)."""

    exit_code = 2


class InsufficientNodesError(TaylorLearningError, ValueError):
    """Derivative order is not below the node count."""

    exit_code = 2


class InsufficientDataError(TaylorLearningError):
    """Too few distinct sample points near the expansion point.

    ``report`` maps each derivative order to the number of missing nodes.
    """

    exit_code = 2

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = dict(report or {})


class NoGuaranteeError(CapabilityError):
    """The window around the expansion point has zero probability."""
