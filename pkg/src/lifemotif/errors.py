"""Exception hierarchy shared by all modules."""


class MotifError(Exception):
    """Base class for every error raised by lifemotif."""


class ConfigError(MotifError, ValueError):
    """An invalid parameter or configuration value."""


class DataError(MotifError):
    """Input data is missing, unreadable or structurally unusable."""


class InsufficientDataError(DataError):
    """Too few days to run the requested operation."""


class GranularityMismatch(DataError):
    """Days snapped with different precisions (or not snapped at all)."""
