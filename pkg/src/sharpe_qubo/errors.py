"""Exception hierarchy shared across the package."""


class SharpeQuboError(Exception):
    """Base class for every error raised by this package."""


class DataError(SharpeQuboError, ValueError):
    """Raised when market data cannot be turned into usable statistics."""


class EmptyFileError(DataError):
    pass


class MalformedHeaderError(DataError):
    pass


class NonMonotonicDatesError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class EmptyPanelError(DataError):
    pass


class InvalidPriceError(DataError):
    pass


class LogReturnUndefinedError(DataError):
    pass


class DegenerateAssetError(DataError):
    def __init__(self, ticker):
        super().__init__(f"degenerate asset: {ticker} has zero variance")
        self.ticker = ticker


class NoInvestableAssetsError(DataError):
    pass


class DimensionError(SharpeQuboError, ValueError):
    """Raised on mismatched sizes between QUBOs, bitstrings or statistics."""


class DiscretizationError(SharpeQuboError, ValueError):
    pass


class AssumptionViolatedError(SharpeQuboError, ValueError):
    pass


class ProblemTooLargeError(SharpeQuboError, ValueError):
    pass


class ConvergenceError(SharpeQuboError, RuntimeError):
    """Iterative solver stopped before reaching its tolerance.

    The last iterate is kept on ``last_iterate`` so callers can inspect it.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class NoFeasibleConfigurationError(SharpeQuboError, RuntimeError):
    def __init__(self, report):
        super().__init__("no feasible configuration")
        self.report = report
