"""Load a :class:`FilterConfig` from a TOML document.

Top-level keys mirror the ``FilterConfig`` fields, tables mirror the nested
configs::

    k_override = 35
    outer_rounds = 2

    [soft]
    lambda = 0.5

    [blend]
    alpha = 0.25

    [ga_binary]
    population_size = 100

    [ga_real]
    mutation_rate = 0.1

Absent keys keep their defaults.
"""

from __future__ import annotations

import sys
from dataclasses import fields
from typing import TYPE_CHECKING, Any

from .base import ConfigError, InvalidInputError
from .ga import BlendCrossoverConfig, GaConfig
from .pipeline import FilterConfig
from .runs import SoftRunsConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

if TYPE_CHECKING:
    from pathlib import Path

_SCALARS: dict[str, tuple[type, ...]] = {
    "levels": (int,),
    "k_override": (int,),
    "outer_rounds": (int,),
}
# config key -> dataclass field, where the two differ
_RENAMED = {"lambda": "lam"}


def _check_type(where: str, value: object, expected: tuple[type, ...]) -> None:
    # bool is an int subclass but never a meaningful count or rate here
    if isinstance(value, bool) or not isinstance(value, expected):
        names = " or ".join(t.__name__ for t in expected)
        raise ConfigError(f"{where} must be {names}, got {value!r}")


def _table(name: str, table: object, cls: type, defaults: object) -> Any:
    if not isinstance(table, dict):
        raise ConfigError(f"[{name}] must be a table")
    types = {f.name: f.type for f in fields(cls)}
    kwargs: dict[str, object] = {}
    for key, value in table.items():
        field_name = _RENAMED.get(key, key)
        if field_name not in types:
            raise ConfigError(f"unknown key {key!r} in [{name}]")
        expected: tuple[type, ...] = (
            (int,) if types[field_name] == "int" else (int, float)
        )
        _check_type(f"{name}.{key}", value, expected)
        kwargs[field_name] = float(value) if float in expected else value
    try:
        return cls(**{**_as_kwargs(defaults), **kwargs})
    except InvalidInputError as e:
        raise ConfigError(f"[{name}]: {e}") from e


def _as_kwargs(obj: object) -> dict[str, object]:
    return {f.name: getattr(obj, f.name) for f in fields(obj)}  # type: ignore[arg-type]


def filter_config_from_dict(document: dict[str, Any]) -> FilterConfig:
    default = FilterConfig()
    tables = {
        "ga_binary": (GaConfig, default.ga_binary),
        "ga_real": (GaConfig, default.ga_real),
        "soft": (SoftRunsConfig, default.soft),
        "blend": (BlendCrossoverConfig, default.blend),
    }
    kwargs: dict[str, object] = {}
    for key, value in document.items():
        if key in tables:
            cls, defaults = tables[key]
            kwargs[key] = _table(key, value, cls, defaults)
        elif key in _SCALARS:
            _check_type(key, value, _SCALARS[key])
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        return FilterConfig(**kwargs)  # type: ignore[arg-type]
    except InvalidInputError as e:
        raise ConfigError(str(e)) from e


def load_filter_config(path: Path) -> FilterConfig:
    try:
        with open(path, "rb") as f:
            document = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return filter_config_from_dict(document)
