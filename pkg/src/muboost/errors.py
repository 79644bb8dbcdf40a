"""Exception types shared across the package."""


class MuboostError(Exception):
    """Base class for all muboost errors."""


class DataError(MuboostError):
    """Malformed or inconsistent input data: CSV schema, value domains, coverage."""


class ConfigError(MuboostError):
    """Invalid run configuration: unknown key, unparseable value, bad profile."""


class ModelFormatError(MuboostError):
    """Model or dictionary file cannot be read: bad magic, version, checksum, truncation."""
