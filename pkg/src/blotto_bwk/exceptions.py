"""Exception hierarchy shared by all modules."""


class BlottoError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(BlottoError, ValueError):
    """An argument violates a documented precondition."""


class BudgetViolationError(BlottoError):
    """An allocation would spend more troops than remain."""


class NumericalError(BlottoError, ArithmeticError):
    """A numerical routine failed (non-convergence, non-finite values)."""


class DegenerateInputError(InvalidInputError):
    """The input is structurally valid but degenerate (e.g. a zero matrix)."""


class SizeLimitError(BlottoError):
    """An exhaustive oracle was asked to work on an instance that is too large."""


class ConfigError(InvalidInputError):
    """A configuration file or flag set is malformed.

    ``field`` holds the dotted path of the offending entry, when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
