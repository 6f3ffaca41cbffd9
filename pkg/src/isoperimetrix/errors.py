"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class IsoperimetrixError(Exception):
    """Base class for every error raised by this package."""


class NonConvergent(IsoperimetrixError):
    pass


class DivergentIntegral(IsoperimetrixError):
    pass


class NotBracketed(IsoperimetrixError):
    pass


class EmptyInterval(IsoperimetrixError):
    pass


class NonNormalizable(IsoperimetrixError):
    pass


class BadGrid(IsoperimetrixError):
    pass


class SpecError(IsoperimetrixError):
    """Malformed measure or Orlicz specification string."""


class NotFinite(IsoperimetrixError):
    pass


class NotYoung(IsoperimetrixError):
    pass


class PredicateFails(IsoperimetrixError):
    pass


class NotConcave(IsoperimetrixError):
    pass


class NotSymmetric(IsoperimetrixError):
    pass


class NotVanishing(IsoperimetrixError):
    pass


class NotMonotone(IsoperimetrixError):
    pass


class IntegrabilityFails(IsoperimetrixError):
    pass


class AlphaTooSmall(IsoperimetrixError):
    pass


class QOutOfRange(IsoperimetrixError):
    pass


class InfiniteControlRate(IsoperimetrixError):
    pass


class DegenerateExponents(IsoperimetrixError):
    """Exponent pair for which the smoothing constant is infinite."""


class UsageError(IsoperimetrixError):
    pass
