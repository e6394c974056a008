"""
Drift-Simulator Shared Utilities

Fehlerklassen, Logging und Dateihilfen. Die Lernverfahren liegen in
`shared.utils.drift`.
"""

from .errors import (
    ConfigParseError,
    ConfigValidationError,
    DriftSimError,
    ExperimentIOError,
    InvalidParameterError,
    InvalidStateError,
)
from .file_utils import ensure_writable_dir, secure_filename
from .log_handler import configure_logging

__all__ = [
    "ConfigParseError",
    "ConfigValidationError",
    "DriftSimError",
    "ExperimentIOError",
    "InvalidParameterError",
    "InvalidStateError",
    "ensure_writable_dir",
    "secure_filename",
    "configure_logging",
]
