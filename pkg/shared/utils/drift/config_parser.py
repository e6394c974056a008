"""
Parser für Experiment-Konfigurationen im INI-Format

Abschnitte [experiment], [environment], [learner], [window], [halfspaces]
und [active]. `auto` bzw. `none` steht für einen abgeleiteten Standardwert.
"""

import configparser
import hashlib
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Union

import structlog
from pydantic import ValidationError

from shared.models.experiment import ExperimentConfig
from shared.utils.errors import ConfigParseError, ConfigValidationError, ExperimentIOError

logger = structlog.get_logger()

AUTO_VALUES = {"auto", "none"}
DIGEST_EXCLUDED = {("experiment", "output_dir"), ("experiment", "workers")}
DIGEST_LENGTH = 12


def _syntax_error(e: configparser.Error) -> ConfigParseError:
    if isinstance(e, configparser.MissingSectionHeaderError):
        return ConfigParseError("Zeile ohne Abschnittskopf", e.lineno)
    errors = getattr(e, "errors", None)
    if isinstance(e, configparser.ParsingError) and errors:
        lineno, line = errors[0]
        return ConfigParseError(f"Ungültige Zeile {line!r}", lineno)
    lineno = getattr(e, "lineno", None)
    message = getattr(e, "message", str(e)).splitlines()[0]
    return ConfigParseError(message, lineno)


def _validation_error(e: ValidationError) -> ConfigValidationError:
    first = e.errors()[0]
    loc = [str(part) for part in first.get("loc", ())]
    if len(loc) >= 2:
        return ConfigValidationError(loc[1], first["msg"], loc[0])
    if len(loc) == 1:
        return ConfigValidationError(loc[0], first["msg"])
    return ConfigValidationError("config", first["msg"])


def parse_config(text: str) -> ExperimentConfig:
    """
    Liest eine Konfiguration aus INI-Text

    Args:
        text: Inhalt der Konfigurationsdatei

    Returns:
        Validierte ExperimentConfig

    Raises:
        ConfigParseError: Bei Syntaxfehlern, mit Zeilennummer
        ConfigValidationError: Bei unbekannten Abschnitten/Schlüsseln oder ungültigen Werten
    """
    parser = configparser.ConfigParser(
        interpolation=None,
        inline_comment_prefixes=("#", ";"),
        default_section="__defaults__",
    )
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise _syntax_error(e) from e

    data: Dict[str, Dict[str, Any]] = {}
    for section in parser.sections():
        if section not in ExperimentConfig.SECTION_ORDER:
            raise ConfigValidationError(section, "Unbekannter Abschnitt")
        data[section] = {
            key: None if value.strip().lower() in AUTO_VALUES else value.strip()
            for key, value in parser.items(section)
        }
    if "experiment" not in data:
        raise ConfigValidationError("experiment", "Abschnitt fehlt")

    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise _validation_error(e) from e
    cfg.check_compatibility()
    return cfg


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Liest und validiert eine Konfigurationsdatei."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ExperimentIOError(f"Konfiguration nicht lesbar: {path} ({e})")
    cfg = parse_config(text)
    logger.debug("config_loaded", path=str(path), digest=config_digest(cfg))
    return cfg


def format_value(value: Any) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (list, tuple)):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    return str(value)


def serialize_config(cfg: ExperimentConfig, for_digest: bool = False) -> str:
    """
    Kanonische Textform: feste Abschnittsreihenfolge, alle Schlüssel explizit

    `parse_config(serialize_config(cfg)) == cfg` gilt für jede gültige Konfiguration.
    """
    lines = []
    for section, values in cfg.section_items():
        lines.append(f"[{section}]")
        for key, value in values.items():
            if for_digest and (section, key) in DIGEST_EXCLUDED:
                continue
            lines.append(f"{key} = {format_value(value)}")
        lines.append("")
    return "\n".join(lines)


def config_digest(cfg: ExperimentConfig) -> str:
    """Erste 12 Hex-Zeichen des SHA-256 der kanonischen Form ohne Ausgabeort und Worker."""
    canonical = serialize_config(cfg, for_digest=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:DIGEST_LENGTH]


def resolve_key(cfg: ExperimentConfig, axis: str) -> tuple:
    """
    Löst "abschnitt.schlüssel" oder einen eindeutigen Schlüssel auf

    Raises:
        ConfigValidationError: Bei unbekanntem oder mehrdeutigem Schlüssel
    """
    if "." in axis:
        section, key = axis.split(".", 1)
        if section not in ExperimentConfig.SECTION_ORDER:
            raise ConfigValidationError(section, "Unbekannter Abschnitt")
        if key not in type(getattr(cfg, section)).model_fields:
            raise ConfigValidationError(key, "Unbekannter Schlüssel", section)
        return section, key
    matches = [
        section
        for section in ExperimentConfig.SECTION_ORDER
        if axis in type(getattr(cfg, section)).model_fields
    ]
    if not matches:
        raise ConfigValidationError(axis, "Unbekannter Schlüssel")
    if len(matches) > 1:
        raise ConfigValidationError(axis, f"Mehrdeutig, Abschnitt angeben: {matches}")
    return matches[0], axis


def apply_overrides(cfg: ExperimentConfig, overrides: Dict[str, Any]) -> ExperimentConfig:
    """
    Setzt Werte der Kommandozeile, Schlüssel als "abschnitt.schlüssel"; `None` wird ignoriert

    Raises:
        ConfigValidationError: Wenn ein Wert die Validierung nicht besteht
    """
    data = cfg.model_dump()
    for axis, value in overrides.items():
        if value is None:
            continue
        section, key = resolve_key(cfg, axis)
        data[section][key] = value
    try:
        updated = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise _validation_error(e) from e
    updated.check_compatibility()
    return updated
