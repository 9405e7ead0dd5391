"""Exception hierarchy shared across the package."""


class ReclockError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(ReclockError, ValueError):
    """A constructor or precondition rejected its inputs."""


class ClockDomainError(ValidationError):
    """A clock value fell outside the domain of its time map."""


class CoverageError(ValidationError):
    """A reference trajectory or record does not cover the requested interval."""


class ScenarioError(ValidationError):
    """A scenario file failed to parse or validate."""


class IntegrationError(ReclockError, RuntimeError):
    """An ODE integration failed to reach the end of its span."""


class NumericalError(ReclockError, RuntimeError):
    """A linear solve failed or a propagation invariant (unitarity) broke."""
