"""Exception types raised across the package."""


class CylprocError(Exception):
    """Base class for all package errors."""


class UnsupportedBody(CylprocError, ValueError):
    """No closed form or supported algorithm for the requested body/operation."""


class DimensionMismatch(CylprocError, ValueError):
    pass


class DegenerateBody(CylprocError, ValueError):
    """Body has zero radius/extent, is empty, or is unbounded."""


class InfeasibleTest(CylprocError, RuntimeError):
    """A membership solver failed to converge."""


class CircumradiusViolation(CylprocError, RuntimeError):
    pass


class UnboundedSupport(CylprocError, ValueError):
    pass


class UnboundedBase(CylprocError, ValueError):
    pass


class DegenerateWindow(CylprocError, ValueError):
    pass


class RejectionStall(CylprocError, RuntimeError):
    pass


class EpsTooLarge(CylprocError, ValueError):
    pass


class InnerNoiseTooLarge(CylprocError, ValueError):
    pass


class NonFinite(CylprocError, ArithmeticError):
    pass


class DomainError(CylprocError, ValueError):
    pass


class JBelowK(CylprocError, ValueError):
    pass


class TruncationNotConverged(CylprocError, RuntimeError):
    pass


class ConfigError(CylprocError, ValueError):
    pass
