"""Tests for the custom exception hierarchy."""

import pytest

from adaptive_bk.exceptions import (
    AbkError,
    BlockIndexError,
    ConfigError,
    ConfigLoadError,
    ConfigValidationError,
    DegenerateBlockError,
    DegenerateTraceError,
    InvalidConfigError,
    InvalidStateError,
    LambertDomainError,
    SizeMismatchError,
)

ALL_ERRORS = (
    SizeMismatchError,
    DegenerateBlockError,
    BlockIndexError,
    InvalidStateError,
    LambertDomainError,
    DegenerateTraceError,
    ConfigError,
    ConfigLoadError,
    ConfigValidationError,
    InvalidConfigError,
)


class TestExceptionHierarchy:
    def test_base_exception_is_exception(self):
        assert issubclass(AbkError, Exception)

    @pytest.mark.parametrize("exc_cls", ALL_ERRORS)
    def test_inherits_from_base(self, exc_cls):
        assert issubclass(exc_cls, AbkError)

    def test_config_errors_share_a_base(self):
        for exc_cls in (ConfigLoadError, ConfigValidationError, InvalidConfigError):
            assert issubclass(exc_cls, ConfigError)

    def test_builtin_compatibility(self):
        assert issubclass(BlockIndexError, IndexError)
        assert issubclass(LambertDomainError, ValueError)
        assert issubclass(InvalidConfigError, ValueError)

    def test_catch_all_with_base(self):
        """All custom exceptions should be catchable via AbkError."""
        for exc_cls in ALL_ERRORS:
            with pytest.raises(AbkError):
                raise exc_cls("test")

    def test_message_preserved(self):
        err = DegenerateTraceError("flat trace")
        assert str(err) == "flat trace"
