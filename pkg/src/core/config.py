"""
Experiment configuration: INI-style text in, validated ExperimentConfig out.

    [experiment]
    experiment = sde_weak_rate
    seed = 20240229

    [model]
    alpha_grid = 1.7, 1.8, 1.9, 1.95
    beta = 0.0
    coefficients = ou_type

Sections only group keys; every key maps to one ExperimentConfig field.
OUTPUT_DIR is the single environment override.
"""
import configparser
import re
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .exceptions import ConfigError
from .models.schemas import ExperimentConfig

SECTIONS = ("experiment", "model", "simulation", "numerics")
LIST_FIELDS = {"alpha_grid"}
DEFAULT_OUTPUT_DIR = Path("results")


class RuntimeSettings(BaseSettings):
    """Environment (and .env) overrides"""
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")

    output_dir: Optional[Path] = None


def _line_of(raw: str, key: str) -> Optional[int]:
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*[=:]")
    for number, line in enumerate(raw.splitlines(), start=1):
        if pattern.match(line):
            return number
    return None


def _section_line(raw: str, section: str) -> Optional[int]:
    for number, line in enumerate(raw.splitlines(), start=1):
        if line.strip() == f"[{section}]":
            return number
    return None


def _split(value: str):
    return tuple(float(v) for v in value.replace(";", ",").split(",") if v.strip())


def _coerce(key: str, value: str, raw: str) -> Any:
    value = value.strip()
    try:
        if key in LIST_FIELDS:
            return _split(value)
        if key == "beta" and "," in value:
            return _split(value)
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {value!r}", field=key, line=_line_of(raw, key)) from exc
    return value


def parse_config_text(raw: str) -> Dict[str, Any]:
    """Flatten the sections of raw into field -> value"""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    # keys are case-sensitive: T (horizon) and t (evaluation time) are different fields
    parser.optionxform = str
    try:
        parser.read_string(raw)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any [section]", line=exc.lineno) from exc
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", field=exc.option, line=exc.lineno) from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", line=exc.lineno) from exc
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line=line) from exc

    values: Dict[str, Any] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(
                f"unknown section [{section}]; expected one of {', '.join(SECTIONS)}",
                line=_section_line(raw, section),
            )
        for key, value in parser.items(section):
            if key in values:
                raise ConfigError("key given in two sections", field=key, line=_line_of(raw, key))
            values[key] = _coerce(key, value, raw)
    return values


def validate_config(raw: str) -> ExperimentConfig:
    """
    Parse, default and range-check a configuration text.

    Raises:
        ConfigError: with the offending field and line where known
    """
    values = parse_config_text(raw)
    try:
        return ExperimentConfig(**values)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = str(first["loc"][0]) if first["loc"] else None
        message = first["msg"]
        if first["type"] == "extra_forbidden":
            message = "unknown key"
        raise ConfigError(message, field=field, line=_line_of(raw, field) if field else None) from exc


def load_config(path: Path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    return validate_config(raw)


def resolve_output_dir(config: ExperimentConfig, flag: Optional[Path] = None) -> Path:
    """--output-dir flag, then OUTPUT_DIR, then the config file, then results/"""
    if flag is not None:
        return Path(flag)
    env = RuntimeSettings().output_dir
    if env is not None:
        return env
    return config.output_dir or DEFAULT_OUTPUT_DIR
