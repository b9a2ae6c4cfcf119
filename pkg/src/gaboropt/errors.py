"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` (a ``ValueError``);
numerical breakdowns derive from :class:`NumericalError`. The CLI maps the
two families to exit codes 2 and 3.
"""


class GaborError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(GaborError, ValueError):
    """Input does not satisfy a documented precondition."""


class InvalidParameterError(ValidationError):
    pass


class InvalidLatticeError(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class UndefinedMeanError(ValidationError):
    """The circular mean of a signal is undefined (zero or fully spread)."""


class BandLimitError(ValidationError):
    """Signal has too much energy outside the band kept by a reduction."""

    def __init__(self, message, outside_fraction):
        super().__init__(message)
        self.outside_fraction = outside_fraction


class NumericalError(GaborError, ArithmeticError):
    pass


class NotAFrameError(NumericalError):
    """The Gabor system is not (numerically) a frame."""


class DivergenceError(NumericalError):
    def __init__(self, message, iteration=None, trace=None):
        super().__init__(message)
        self.iteration = iteration
        self.trace = trace


class StallError(NumericalError):
    """Line search could not find an acceptable step."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
