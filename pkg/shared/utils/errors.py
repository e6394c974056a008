"""
Fehlerklassen für den Drift-Simulator

Gemeinsame Exception-Hierarchie für Geometrie, Umgebungen, Lernverfahren
und die Experiment-Konfiguration.
"""

from typing import Optional


class DriftSimError(Exception):
    """Basisklasse aller Simulator-Fehler"""
    pass


class InvalidParameterError(DriftSimError, ValueError):
    """Ungültiger Parameter (Dimension, Radius, Fensterlänge, ...)"""
    pass


class InvalidStateError(DriftSimError, RuntimeError):
    """Unzulässiger Zustand, z.B. leerer Versionsraum"""
    pass


class ConfigParseError(DriftSimError):
    """Syntaxfehler in einer Konfigurationsdatei"""

    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"Zeile {lineno}: {message}"
        super().__init__(message)


class ConfigValidationError(DriftSimError, ValueError):
    """Wert außerhalb des erlaubten Bereichs oder unbekannter Schlüssel"""

    def __init__(self, key: str, message: str, section: Optional[str] = None):
        self.key = key
        self.section = section
        where = f"[{section}] {key}" if section else key
        super().__init__(f"{where}: {message}")


class ExperimentIOError(DriftSimError, OSError):
    """Ausgabeverzeichnis nicht beschreibbar"""
    pass
