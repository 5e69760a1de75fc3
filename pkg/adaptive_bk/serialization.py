from __future__ import annotations

import csv
import enum
import logging
import math
from collections.abc import Iterable, Sequence
from importlib.metadata import PackageNotFoundError
from pathlib import Path
from typing import Any

import numpy as np
import scipy.io
import yaml
from numpy.typing import NDArray
from pydantic import BaseModel

from adaptive_bk.exceptions import ConfigLoadError

logger = logging.getLogger(__name__)

METADATA_KEY = "_metadata"
CONFIGURATION_KEY = "configuration"
TRACE_COLUMNS = ("j", "bregman_to_final")

FloatArray = NDArray[np.float64]


class ModelConfigDumper(yaml.SafeDumper):
    """YAML dumper that never emits anchors/aliases."""

    def ignore_aliases(self, data: Any) -> bool:
        return True


def _represent_enum(dumper: yaml.SafeDumper, data: enum.Enum) -> Any:
    return dumper.represent_scalar("tag:yaml.org,2002:str", str(data.value))


def _represent_path(dumper: yaml.SafeDumper, data: Path) -> Any:
    return dumper.represent_scalar("tag:yaml.org,2002:str", str(data))


ModelConfigDumper.add_multi_representer(enum.Enum, _represent_enum)
ModelConfigDumper.add_multi_representer(Path, _represent_path)


def _prepare_value(value: Any) -> Any:
    """Recursively convert a value to a YAML-serializable form."""
    if value is None:
        return None
    if isinstance(value, BaseModel):
        return _prepare_dict(value.model_dump(mode="json", by_alias=True))
    if isinstance(value, dict):
        return _prepare_dict(value)
    if isinstance(value, list | tuple):
        return [_prepare_value(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_prepare_value(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return _prepare_value(float(value))
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    return value


def _prepare_dict(data: dict[str, Any]) -> dict[str, Any]:
    return {str(k): _prepare_value(v) for k, v in data.items()}


def prepare_for_serialization(data: dict[str, Any]) -> dict[str, Any]:
    """Convert numpy scalars/arrays, enums, paths and models to plain YAML types.

    Non-finite floats become ``None``.
    """
    return _prepare_dict(data)


def dump_yaml(
    data: dict[str, Any] | BaseModel,
    output_path: Path,
    kind: str = "",
    include_metadata: bool = True,
) -> None:
    """Write ``data`` as YAML, optionally inside a metadata envelope.

    Args:
        data: Plain dict or Pydantic model.
        output_path: Destination file path; parents are created.
        kind: Document kind recorded in the metadata (e.g. ``"experiment"``).
        include_metadata: When True (default), wraps data in a
            metadata/configuration envelope.
    """
    prepared = (
        _prepare_value(data) if isinstance(data, BaseModel) else _prepare_dict(data)
    )
    document: dict[str, Any]
    if include_metadata:
        document = {
            METADATA_KEY: {"kind": kind, "version": _get_package_version()},
            CONFIGURATION_KEY: prepared,
        }
    else:
        document = prepared

    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w") as f:
        yaml.dump(
            document,
            f,
            Dumper=ModelConfigDumper,
            default_flow_style=False,
            allow_unicode=True,
            sort_keys=False,
        )


def load_config_document(path: Path) -> dict[str, Any]:
    """Load a YAML or JSON config file, unwrapping a metadata envelope.

    Raises:
        ConfigLoadError: If the file cannot be read or parsed.
    """
    try:
        with open(path) as f:
            raw = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigLoadError(f"Failed to load {path}: {e}") from e

    if not isinstance(raw, dict):
        raise ConfigLoadError(
            f"Expected a mapping in {path}, got {type(raw).__name__}"
        )
    if CONFIGURATION_KEY in raw and METADATA_KEY in raw:
        body = raw[CONFIGURATION_KEY]
        if not isinstance(body, dict):
            raise ConfigLoadError(f"'{CONFIGURATION_KEY}' in {path} is not a mapping")
        return body
    return raw


def read_matrix(path: Path) -> FloatArray:
    """Read a dense real MatrixMarket array file as a 2-D float array."""
    try:
        data = scipy.io.mmread(str(path))
    except (OSError, ValueError) as e:
        raise ConfigLoadError(f"Failed to read MatrixMarket file {path}: {e}") from e
    if hasattr(data, "toarray"):
        data = data.toarray()
    return np.asarray(data, dtype=np.float64)


def read_vector(path: Path) -> FloatArray:
    return read_matrix(path).reshape(-1)


def write_matrix(path: Path, matrix: FloatArray, comment: str = "") -> None:
    """Write a dense matrix (or a vector, as one column) in array format."""
    array = np.asarray(matrix, dtype=np.float64)
    if array.ndim == 1:
        array = array.reshape(-1, 1)
    path.parent.mkdir(parents=True, exist_ok=True)
    scipy.io.mmwrite(str(path), array, comment=comment, field="real", symmetry="general")


def format_number(value: float | int | None) -> str:
    """CSV cell: integers verbatim, floats with 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, int | np.integer):
        return str(int(value))
    if not math.isfinite(value):
        return ""
    return f"{float(value):.17g}"


def write_csv(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[float | int | None]]
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])


def write_trace_csv(path: Path, distances: FloatArray) -> None:
    write_csv(path, TRACE_COLUMNS, ((j, float(d)) for j, d in enumerate(distances)))


def read_trace_csv(path: Path) -> FloatArray:
    """Read a ``j,bregman_to_final`` CSV; rows are ordered by ``j``."""
    try:
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None or tuple(reader.fieldnames[:2]) != TRACE_COLUMNS:
                raise ConfigLoadError(
                    f"{path}: expected header {','.join(TRACE_COLUMNS)}"
                )
            pairs = [
                (int(row["j"]), float(row["bregman_to_final"])) for row in reader
            ]
    except OSError as e:
        raise ConfigLoadError(f"Failed to load {path}: {e}") from e
    except (KeyError, ValueError) as e:
        raise ConfigLoadError(f"Malformed trace file {path}: {e}") from e
    pairs.sort()
    if [j for j, _ in pairs] != list(range(len(pairs))):
        raise ConfigLoadError(f"{path}: j must run 0..N-1 without gaps")
    return np.array([d for _, d in pairs])


def _pgm_tokens(raw: bytes) -> tuple[list[bytes], int]:
    """Header tokens (magic, width, height, maxval) and the pixel offset."""
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ConfigLoadError("Truncated PGM header")
        tokens.append(raw[start:pos])
    return tokens, pos + 1


def load_pgm(path: Path) -> FloatArray:
    """Binary (P5) graymap scaled to ``[0, 1]``."""
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigLoadError(f"Failed to load {path}: {e}") from e
    tokens, offset = _pgm_tokens(raw)
    if tokens[0] != b"P5":
        raise ConfigLoadError(f"{path} is not a binary PGM (P5) file")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as e:
        raise ConfigLoadError(f"{path}: malformed PGM header") from e
    if not 0 < maxval < 65536:
        raise ConfigLoadError(f"{path}: unsupported maxval {maxval}")
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
    count = width * height
    if len(raw) - offset < count * dtype.itemsize:
        raise ConfigLoadError(f"{path}: expected {count} pixels")
    pixels = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
    return pixels.reshape(height, width).astype(np.float64) / maxval


def save_pgm(path: Path, image: FloatArray) -> None:
    """Write ``image`` as an 8-bit P5 graymap, rescaled to the full range."""
    array = np.asarray(image, dtype=np.float64)
    low, high = float(array.min()), float(array.max())
    span = high - low if high > low else 1.0
    scaled = np.clip(np.rint((array - low) / span * 255.0), 0, 255).astype(np.uint8)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"P5\n{array.shape[1]} {array.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + scaled.tobytes())


def _get_package_version() -> str:
    try:
        from importlib.metadata import version

        return version("adaptive-bk")
    except (ImportError, PackageNotFoundError):
        return "unknown"
