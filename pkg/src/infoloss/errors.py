"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A spec, config file, or call was built with invalid parameters."""


class DataError(ValueError):
    """Input data is unusable (non-finite points, empty histograms)."""


class InsufficientDataError(RuntimeError):
    """Too few reliable curve rows to fit or extrapolate."""


class UndefinedRelativeLossError(RuntimeError):
    """The marginal dimension estimate is ~0, so the loss ratio is undefined."""
