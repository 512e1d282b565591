"""Exception types raised by fluxqit."""


class QitError(Exception):
    """Base class for every error fluxqit raises on purpose."""


class DomainError(QitError, ValueError):
    """An argument lies outside the domain of an operation.

    Out-of-range level labels, mismatched dimensions or layouts, non-Hermitian
    generators and malformed protocol inputs end up here.
    """


class PreconditionError(QitError):
    """An operation precondition does not hold, typically an integrator step size."""


class ConfigError(QitError):
    """A run document could not be parsed or validated."""


class SimulationError(QitError):
    """A protocol assumption checked at run time turned out false."""
