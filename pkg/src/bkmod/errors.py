"""Exception types shared across the package."""


class BKError(Exception):
    """Base class for every error raised by bkmod."""


class ParamsMismatch(BKError, ValueError):
    pass


class InsufficientPrecision(BKError):
    """An operation would silently lose exactness at the working precision."""


class UnsupportedSummand(BKError):
    pass


class MixedPPower(BKError):
    """A p-power torsion summand with exponent >= 2 reached a p-torsion-only formula."""


class InfiniteModule(BKError):
    pass


class BudgetExceeded(BKError):
    pass


class NotPPower(BKError):
    pass


class SearchInconclusive(BKError):
    pass


class HypothesisUnmet(BKError):
    pass


class WindowTooShort(BKError):
    pass


class QExceedsBound(BKError):
    pass


class CountMismatch(BKError):
    pass


class SpecError(BKError, ValueError):
    """Malformed or inconsistent module spec document (JSON)."""
