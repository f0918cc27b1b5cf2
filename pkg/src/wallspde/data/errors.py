"""Custom exceptions for data loading and validation."""


class DataError(Exception):
    """Base exception for the data layer."""


class DataLoadError(DataError):
    """Raised when JSON or TOML files are missing or invalid."""


class DataValidationError(DataError):
    """Raised when file content fails structural or range validation."""


class DataReferenceError(DataError):
    """Raised when a config references a preset that does not exist."""
