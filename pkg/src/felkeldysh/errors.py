"""Exception hierarchy.

Configuration and domain problems subclass ``ValueError``; failures of a
numerical procedure (no root, divergence, unusable statistics) subclass
``RuntimeError``. The CLI maps the two families to exit codes 2 and 3.
"""


class FelError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FelError, ValueError):
    """Argument outside the domain of a function."""


class SingularityError(DomainError):
    pass


class GridRangeError(DomainError):
    """Sample grid does not cover the evaluation point with enough margin."""


class ConfigurationError(FelError, ValueError):
    """Invalid or incomplete configuration.

    ``key`` names the offending configuration entry when there is one.
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class NumericalError(FelError, RuntimeError):
    """A numerical procedure failed to produce a trustworthy result."""


class RootNotFoundError(NumericalError):
    pass


class DegenerateExpansionError(NumericalError):
    pass


class NonSaturatingError(NumericalError):
    """The cubic term does not bound the amplitude (beta <= 0)."""


class DivergenceError(NumericalError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NormDriftError(NumericalError):
    pass


class WindowLeakError(NumericalError):
    pass


class StatisticsError(NumericalError):
    def __init__(self, message, required_length=None):
        super().__init__(message)
        self.required_length = required_length


class FitError(NumericalError):
    pass
