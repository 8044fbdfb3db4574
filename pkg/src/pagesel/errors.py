"""Exception types shared across the package."""


class PageSelError(Exception):
    """Base class for all pagesel errors."""


class ConfigurationError(PageSelError):
    """Invalid configuration value (zero capacity, bad ratio, unknown key...)."""


class OutOfPagesError(PageSelError):
    """The physical page pool has no free page left."""


class EmptyContextError(PageSelError):
    """An anchor was requested before any token was appended."""


class CalibrationError(PageSelError):
    """Threshold calibration was asked for on an empty or unusable sample."""
