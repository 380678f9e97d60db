"""Exception types shared across the qkdsim modules."""


class QkdSimError(Exception):
    """Base class for all qkdsim errors."""


class ParameterError(QkdSimError, ValueError):
    """A link parameter violates its physical or model constraints."""


class DomainError(QkdSimError, ValueError):
    """An argument is outside the mathematical domain of a formula."""


class ZeroClickProbability(QkdSimError):
    """The click probability is zero: the link is dead and the QBER undefined."""


class NoPositiveRate(QkdSimError):
    """No mean photon number yields a positive secure rate at this link."""


class NoSolution(QkdSimError):
    """A root-finding bracket contains no solution for the requested target."""


class RequiresSmallP(QkdSimError):
    """The gap-sampling engine needs a per-slot click probability below 1%."""


class ConfigError(QkdSimError, ValueError):
    """A run configuration file or flag set failed validation."""
