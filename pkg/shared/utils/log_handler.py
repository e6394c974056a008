"""
Logging-Konfiguration und In-Memory-Handler

structlog schreibt über die Standardbibliothek nach stderr; der
InMemoryLogHandler sammelt Einträge für Tests und Berichte.
"""

import logging
import sys
from datetime import datetime
from typing import Any, Dict, List, Optional

import structlog

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def configure_logging(level: str = "INFO") -> None:
    """
    Richtet structlog mit Konsolenausgabe auf stderr ein

    Args:
        level: Einer von DEBUG, INFO, WARNING, ERROR
    """
    level = level.upper()
    if level not in LOG_LEVELS:
        raise ValueError(f"Unbekanntes Log-Level: {level}")
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level, force=True)
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="ISO"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


class InMemoryLogHandler(logging.Handler):
    """Sammelt Log-Einträge in einer Liste"""

    def __init__(self, level: int = logging.INFO, max_logs: int = 1000):
        super().__init__(level)
        self.logs: List[Dict[str, Any]] = []
        self.max_logs = max_logs

    def emit(self, record: logging.LogRecord) -> None:
        try:
            self.logs.append(
                {
                    "timestamp": datetime.fromtimestamp(record.created).isoformat(),
                    "level": record.levelname,
                    "logger": record.name,
                    "message": self.format(record),
                }
            )
            if len(self.logs) > self.max_logs:
                self.logs = self.logs[-self.max_logs:]
        except Exception:
            self.handleError(record)

    def get_logs(self) -> List[Dict[str, Any]]:
        return self.logs.copy()

    def messages(self) -> List[str]:
        return [entry["message"] for entry in self.logs]

    def clear_logs(self) -> None:
        self.logs.clear()


def create_log_handler(
    logger_name: Optional[str] = None, level: int = logging.INFO
) -> InMemoryLogHandler:
    """
    Erstellt und registriert einen InMemoryLogHandler

    Args:
        logger_name: Name des Loggers (None = root logger)
        level: Logging-Level

    Returns:
        Der erstellte Handler
    """
    handler = InMemoryLogHandler(level)
    handler.setFormatter(logging.Formatter("%(message)s"))
    target = logging.getLogger(logger_name)
    target.addHandler(handler)
    if target.level == logging.NOTSET or target.level > level:
        target.setLevel(level)
    return handler


def remove_log_handler(handler: InMemoryLogHandler, logger_name: Optional[str] = None) -> None:
    logging.getLogger(logger_name).removeHandler(handler)
