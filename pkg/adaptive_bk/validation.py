from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, TypeVar

import questionary
from pydantic import BaseModel, ValidationError

from adaptive_bk.config import ExperimentConfig
from adaptive_bk.display import display_validation_errors
from adaptive_bk.exceptions import ConfigValidationError
from adaptive_bk.serialization import load_config_document

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)

_UNION_TAGS = frozenset(
    {"gaussian", "tomography", "files", "constant", "adaptive", "pilot"}
)


def format_validation_error(error: ValidationError) -> str:
    """One line per error: ``location: message``."""
    lines = []
    for err in error.errors():
        loc = " > ".join(str(x) for x in err.get("loc", ())) or "<root>"
        lines.append(f"{loc}: {err.get('msg', 'Invalid value')}")
    return "\n".join(lines)


def validate_config(model_class: type[M], data: dict[str, Any]) -> M:
    """Validate data against a Pydantic model, raising on failure.

    Raises:
        ConfigValidationError: If validation fails; the message lists every
            failing location.
    """
    try:
        return model_class.model_validate(data)
    except ValidationError as e:
        raise ConfigValidationError(format_validation_error(e)) from e


def load_experiment_config(
    path: Path, overrides: dict[str, Any] | None = None
) -> ExperimentConfig:
    """Load, apply flat overrides (``None`` values are ignored) and validate."""
    data = load_config_document(path)
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return validate_config(ExperimentConfig, data)


def _set_path(data: dict[str, Any], loc: tuple[Any, ...], value: Any) -> None:
    target: Any = data
    for key in loc[:-1]:
        if isinstance(target, list):
            target = target[int(key)]
        else:
            target = target.setdefault(key, {})
    if isinstance(target, list):
        target[int(loc[-1])] = value
    else:
        target[loc[-1]] = value


def _get_path(data: dict[str, Any], loc: tuple[Any, ...]) -> Any:
    target: Any = data
    try:
        for key in loc:
            target = target[int(key)] if isinstance(target, list) else target[key]
    except (KeyError, IndexError, TypeError, ValueError):
        return ""
    return target


def validate_and_fix(
    model_class: type[M],
    data: dict[str, Any],
) -> M | None:
    """Validate data, offering interactive repair on failure.

    Returns the validated model instance, or None if the user aborts.
    """
    while True:
        try:
            return model_class.model_validate(data)
        except ValidationError as e:
            display_validation_errors(e.errors())

            should_fix = questionary.confirm(
                "Would you like to fix these errors?",
                default=True,
            ).ask()

            if not should_fix:
                return None

            for error in e.errors():
                # Discriminated unions report the variant tag in the location.
                loc = tuple(
                    x for x in error.get("loc", ()) if x not in _UNION_TAGS
                )
                if not loc:
                    continue

                msg = error.get("msg", "Invalid value")
                new_value = questionary.text(
                    f"  New value for '{'.'.join(str(x) for x in loc)}' ({msg}):",
                    default=str(_get_path(data, loc)),
                ).ask()

                if new_value is not None:
                    _set_path(data, loc, new_value)
