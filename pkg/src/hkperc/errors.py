"""Exception types shared across the package."""


class HKPercError(Exception):
    """Base class for all package errors."""


class InvalidVertexError(HKPercError, ValueError):
    pass


class InvalidFamilyError(HKPercError, ValueError):
    """Bad family parameters, or an explicit graph that is not simple and connected."""


class BudgetExceededError(HKPercError):
    """A traversal or allocation would exceed its configured resource budget."""


class RadiusRangeError(HKPercError, ValueError):
    """A radius outside the range where a local-isomorphism statement holds."""


class NotEvaluated(HKPercError):
    """The non-typical set is not defined for this pair (outside the local radius)."""


class UnsupportedFamilyError(HKPercError):
    pass


class OrderGuardError(HKPercError):
    """Graph too large for an exhaustive computation."""


class RoundLimitError(HKPercError):
    """The process hit ``max_rounds`` before reaching a fixpoint.

    The partial trace is available as ``.trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
