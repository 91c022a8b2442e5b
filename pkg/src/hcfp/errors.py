"""Exception hierarchy shared by every module."""


class HcfpError(Exception):
    """Base class for all errors raised by the toolkit."""


class ParseError(HcfpError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class LevelMismatch(HcfpError):
    pass


class Undefined(HcfpError):
    """A store operation or top_k is not defined on its argument."""


class ModelError(HcfpError):
    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UnsupportedOperation(HcfpError):
    pass


class ResourceExceeded(HcfpError):
    """A construction hit a hard size limit (for example determinisation)."""


class LevelingFailed(HcfpError):
    pass


class BudgetExhausted(HcfpError):
    """Saturation stopped before reaching its fixpoint.

    ``partial`` is the last fully built automaton and accepts a subset of the
    true answer. ``report`` holds the counters at the point of stopping.
    """

    def __init__(self, message: str, partial=None, report=None):
        super().__init__(message)
        self.partial = partial
        self.report = report


class PartialResultNegation(HcfpError):
    """Raised when a formula would complement an under-approximation."""
