"""Exception hierarchy shared across the toolkit.

Exit codes follow the CLI contract: 2 for malformed files, 3 for
degenerate data, 64 for bad invocations.
"""


class PsidynError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class FormatError(PsidynError):
    """Unrecognised or malformed file (bad magic, version, schema)."""

    exit_code = 2


class CorruptionError(FormatError):
    """File parses structurally but payload contradicts its header."""


class MetadataError(FormatError):
    """Provenance metadata is missing or inconsistent with the data."""


class DataError(PsidynError):
    """Input values make the requested computation meaningless."""

    exit_code = 3


class DegenerateDataError(DataError):
    """Zero-variance channel, pool, or signal."""


class ConfigError(PsidynError):
    """Invalid parameter combination."""

    exit_code = 64


class ArityError(ConfigError):
    """Too few groups, trials, or channels for the requested analysis."""


class NumericError(PsidynError):
    """A numerical routine failed to converge."""
