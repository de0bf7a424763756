"""Configuration documents: discovery, schema checks and field validation.

Every document is JSON carrying ``"schema": 1``. Named documents are looked up in
``$HAPTICSIM_CONFIG_DIR`` first and then in the packaged ``hapticsim/data``
directory.
"""

from __future__ import annotations

import hashlib
import json
import os
from collections.abc import Mapping
from dataclasses import fields
from importlib import resources
from pathlib import Path
from typing import Any

from ._errors import ConfigError
from ._log import get_logger
from ._pneumo import PlantParams
from ._types import PidGains

CONFIG_ENV_VAR = "HAPTICSIM_CONFIG_DIR"
SCHEMA_VERSION = 1
CONTROLLER_CONFIG_NAME = "pneumo_calibrated.json"

_log = get_logger("config")


def config_search_path() -> list[Path]:
    """Directories searched for named configs, highest priority first."""
    paths: list[Path] = []
    override = os.environ.get(CONFIG_ENV_VAR)
    if override:
        paths.append(Path(override))
    paths.append(Path(str(resources.files("hapticsim") / "data")))
    return paths


def resolve_config(name: str | Path, *, subdir: str | None = None) -> Path:
    """Resolve a config reference to a file.

    An existing path is returned as is. Otherwise ``name`` (with ``.json`` appended when
    missing) is looked up in each search directory, inside ``subdir`` when given.

    Raises:
        ConfigError: If nothing matches.
    """
    candidate = Path(name)
    if candidate.is_file():
        return candidate
    filename = candidate.name if candidate.suffix else f"{candidate.name}.json"
    for base in config_search_path():
        for directory in (base / subdir, base) if subdir else (base,):
            path = directory / filename
            if path.is_file():
                _log.debug("resolved {name} to {path}", name=str(name), path=str(path))
                return path
    raise ConfigError("", f"config {str(name)!r} not found in {CONFIG_ENV_VAR} or package data")


def load_document(path: str | Path) -> dict[str, Any]:
    """Read a JSON document and check its schema version."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise ConfigError("", f"{path}: top level must be a JSON object")
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        raise ConfigError("schema", f"expected {SCHEMA_VERSION}, got {schema!r}")
    return data


def config_hash(document: Mapping[str, Any]) -> str:
    """SHA-256 of the canonical (sorted keys, compact) JSON encoding."""
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def require(section: Mapping[str, Any], key: str, path: str) -> Any:
    """Return ``section[key]`` or raise a ConfigError naming the field path."""
    if key not in section:
        raise ConfigError(join_path(path, key), "required field is missing")
    return section[key]


def as_number(
    value: Any,
    path: str,
    *,
    minimum: float | None = None,
    maximum: float | None = None,
) -> float:
    """Validate a JSON number (bools rejected) and its bounds."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {type(value).__name__}")
    number = float(value)
    if minimum is not None and number < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    if maximum is not None and number > maximum:
        raise ConfigError(path, f"must be <= {maximum}")
    return number


def as_int(value: Any, path: str, *, minimum: int | None = None) -> int:
    """Validate a JSON integer."""
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {type(value).__name__}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}")
    return value


def as_mapping(value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    return value


def join_path(prefix: str, key: str | int) -> str:
    if isinstance(key, int):
        return f"{prefix}[{key}]"
    return f"{prefix}.{key}" if prefix else key


def plant_from_mapping(section: Mapping[str, Any], path: str = "plant") -> PlantParams:
    """Build PlantParams from a JSON object; unknown keys are rejected."""
    known = {f.name for f in fields(PlantParams)}
    values: dict[str, float] = {}
    for key, value in section.items():
        if key not in known:
            raise ConfigError(join_path(path, key), "unknown field")
        values[key] = as_number(value, join_path(path, key), minimum=0.0)
    try:
        return PlantParams(**values)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def gains_from_mapping(section: Mapping[str, Any], path: str = "gains") -> PidGains:
    """Build PidGains from a JSON object; unknown keys are rejected."""
    known = {f.name for f in fields(PidGains)}
    values: dict[str, Any] = {}
    for key, value in section.items():
        field_path = join_path(path, key)
        if key not in known:
            raise ConfigError(field_path, "unknown field")
        if key == "output_limits":
            if not isinstance(value, list) or len(value) != 2:
                raise ConfigError(field_path, "expected [min, max]")
            values[key] = (
                as_number(value[0], join_path(field_path, 0)),
                as_number(value[1], join_path(field_path, 1)),
            )
        else:
            values[key] = as_number(value, field_path, minimum=0.0)
    try:
        return PidGains(**values)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def load_controller_config(path: str | Path | None = None) -> tuple[PlantParams, PidGains]:
    """Load plant parameters and PID gains.

    Args:
        path: Explicit file or config name. Defaults to the calibrated config found on the
            search path.
    """
    resolved = resolve_config(path if path is not None else CONTROLLER_CONFIG_NAME)
    document = load_document(resolved)
    for key in document:
        if key not in ("schema", "plant", "gains", "calibration"):
            raise ConfigError(key, "unknown field")
    plant = plant_from_mapping(as_mapping(document.get("plant", {}), "plant"))
    gains = gains_from_mapping(as_mapping(document.get("gains", {}), "gains"))
    _log.debug("loaded controller config from {path}", path=str(resolved))
    return plant, gains


def controller_document(
    plant: PlantParams,
    gains: PidGains,
    *,
    calibration: Mapping[str, Any] | None = None,
) -> dict[str, Any]:
    """Serialize plant and gains as a schema-1 controller document."""
    document: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "plant": {f.name: getattr(plant, f.name) for f in fields(PlantParams)},
        "gains": {
            "kp": gains.kp,
            "ki": gains.ki,
            "kd": gains.kd,
            "sample_period": gains.sample_period,
            "output_limits": list(gains.output_limits),
        },
    }
    if calibration is not None:
        document["calibration"] = dict(calibration)
    return document


def write_document(document: Mapping[str, Any], path: str | Path) -> Path:
    """Write a JSON document with stable formatting."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(document, indent=2) + "\n", encoding="utf-8")
    return target
