"""Exception hierarchy shared by the library and the CLI."""


class MultibubbleError(Exception):
    """Base class for all library errors."""


class DomainError(MultibubbleError, ValueError):
    """Input outside the domain of an operation (coincident points, bad shapes, n < 5)."""


class RegimeError(MultibubbleError):
    """Hypotheses of the blow-up construction are violated (sign of dK/dnu, M_eps membership)."""


class NumericalError(MultibubbleError, RuntimeError):
    """A numerical procedure failed to meet its tolerance."""


class QuadratureError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message, reason="max_iter", grad_norm=float("nan"), iterations=0):
        super().__init__(message)
        self.reason = reason
        self.grad_norm = grad_norm
        self.iterations = iterations
