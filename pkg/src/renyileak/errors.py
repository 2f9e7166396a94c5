"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit-specific errors."""


class LayoutError(ToolkitError):
    """Register labels are unknown, duplicated, or incompatible."""


class SingularOperator(ToolkitError):
    """A (pseudo)inverse or support condition failed on a singular operator."""


class NormalizationError(ToolkitError):
    """Operation requires a normalized state."""


class ZeroProbabilityEvent(ToolkitError):
    """Conditioning on an event of probability zero."""


class ClassicalityError(ToolkitError):
    """A register that must be classical (diagonal) is not."""


class ZeroState(ToolkitError):
    """First divergence argument has zero trace."""


class UnsupportedOrder(ToolkitError):
    """Renyi order outside the range supported by this operation."""


class DivergentCorrection(ToolkitError):
    """Smoothing correction g(eps) diverges (eps = 0)."""


class DimensionLimit(ToolkitError):
    """Total dimension exceeds the dense desk-scale cap."""


class EmptyInput(ToolkitError):
    """Empty input where a nonempty one is required."""


class StalledOptimizer(ToolkitError):
    """Iterative optimizer failed to certify convergence.

    Carries the best value found and the remaining stationarity residual so
    callers can decide whether the partial answer is usable.
    """

    def __init__(self, message, best_value=None, residual=None, witness=None):
        super().__init__(message)
        self.best_value = best_value
        self.residual = residual
        self.witness = witness


class SdpError(ToolkitError):
    """Base class for semidefinite-programming failures."""


class Infeasible(SdpError):
    """SDP has no feasible point (phase-I optimum strictly positive)."""


class Unbounded(SdpError):
    """SDP objective is unbounded below."""


class NumericalFailure(SdpError):
    """Solver broke down before reaching the requested accuracy."""
