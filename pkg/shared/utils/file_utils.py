"""
File Utilities für den Drift-Simulator

Ausgabeverzeichnisse prüfen und sichere Dateinamen für Artefakte bilden.
"""

import os
import re
import tempfile
from pathlib import Path
from typing import Union

import structlog

from shared.utils.errors import ExperimentIOError, InvalidParameterError

logger = structlog.get_logger()

# Sicherheitsmuster für Dateinamen
DANGEROUS_PATTERNS = [
    r'\.\.',  # Parent directory traversal
    r'[<>:"|?*]',
    r'[\x00-\x1f]',
]


def secure_filename(filename: str, max_length: int = 255) -> str:
    """
    Bereinigt einen Dateinamen für sichere Verwendung

    Args:
        filename: Original-Dateiname, z.B. "sweep_ab12_environment.delta.csv"
        max_length: Maximale Länge des Dateinamens

    Returns:
        Bereinigter, sicherer Dateiname

    Raises:
        InvalidParameterError: Bei leeren oder ungültigen Dateinamen
    """
    if not filename or not filename.strip():
        raise InvalidParameterError("Dateiname darf nicht leer sein")

    cleaned = re.sub(r'[^\w\s.-]', '', filename)
    cleaned = re.sub(r'\s+', '_', cleaned.strip())

    for pattern in DANGEROUS_PATTERNS:
        if re.search(pattern, cleaned):
            raise InvalidParameterError(f"Dateiname enthält gefährliche Zeichen: {filename}")

    if len(cleaned) > max_length:
        name, ext = os.path.splitext(cleaned)
        cleaned = name[:max_length - len(ext)] + ext

    if not cleaned or cleaned == '.':
        raise InvalidParameterError(f"Dateiname nach Bereinigung ungültig: {filename}")

    return cleaned


def ensure_writable_dir(path: Union[str, Path]) -> Path:
    """
    Legt das Ausgabeverzeichnis an und prüft per Probedatei die Schreibrechte

    Raises:
        ExperimentIOError: Wenn das Verzeichnis nicht angelegt oder beschrieben werden kann
    """
    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=directory, prefix=".write_check_", delete=True):
            pass
    except OSError as e:
        logger.error("output_dir_not_writable", path=str(directory), error=str(e))
        raise ExperimentIOError(f"Ausgabeverzeichnis nicht beschreibbar: {directory} ({e})")
    return directory


def artifact_path(directory: Union[str, Path], name: str) -> Path:
    """Pfad eines Artefakts mit bereinigtem Dateinamen."""
    return Path(directory) / secure_filename(name)
