"""Exception hierarchy shared by all modules."""


class GrushinError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GrushinError, ValueError):
    """A coordinate lies outside the open chart of the space."""


class ConstructionError(GrushinError, ValueError):
    """Invalid parameters for a space model."""


class DimError(GrushinError, ValueError):
    """Effective dimension outside the admissible range."""


class StatementError(GrushinError, ValueError):
    """Preconditions of a theorem-witness query are violated."""


class IntegrationError(GrushinError, RuntimeError):
    """Adaptive step size underflowed."""


class NoConvergence(GrushinError, RuntimeError):
    """No shooting restart converged."""


class QuadratureError(GrushinError, RuntimeError):
    """Quadrature or root-finding failed to reach its tolerance."""


class SupportError(GrushinError, ValueError):
    """Measure support leaves the open domain."""
