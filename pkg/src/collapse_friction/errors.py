"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Parameters outside their physical domain."""


class SingularInputError(ParameterError):
    """A kernel was evaluated where it is singular (DP at k = 0)."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to reach its tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class RegimeError(ValueError):
    """The requested quantity does not exist in this dissipation regime."""


class SamplerError(RuntimeError):
    """The thinning sampler failed to accept within its attempt budget."""


class JumpCapExceeded(RuntimeError):
    """A trajectory hit its jump-count cap; ``partial`` holds what was simulated."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
