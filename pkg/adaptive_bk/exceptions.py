"""Custom exception hierarchy for adaptive-bk."""

from __future__ import annotations


class AbkError(Exception):
    """Base exception for all adaptive-bk errors."""


class SizeMismatchError(AbkError):
    """Raised when block sizes do not add up to the number of matrix rows."""


class DegenerateBlockError(AbkError):
    """Raised when a row block has (numerically) zero spectral norm."""


class BlockIndexError(AbkError, IndexError):
    """Raised when a block index is outside ``0..M-1``."""


class InvalidStateError(AbkError):
    """Raised when a stepsize schedule would leave its admissible state."""


class LambertDomainError(AbkError, ValueError):
    """Raised when the Lambert-W function is evaluated outside ``[0, inf)``."""


class DegenerateTraceError(AbkError):
    """Raised when a pilot trace cannot support the hyperparameter estimates."""


class ConfigError(AbkError):
    """Base class for configuration problems (CLI exit code 2)."""


class ConfigLoadError(ConfigError):
    """Raised when a configuration or data file cannot be loaded or parsed."""


class ConfigValidationError(ConfigError):
    """Raised when configuration data fails Pydantic model validation."""


class InvalidConfigError(ConfigError, ValueError):
    """Raised when generator or schedule parameters are inconsistent."""
