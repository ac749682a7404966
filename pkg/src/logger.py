"""
Structured logging configuration.

Usage anywhere in the package:
    from src.logger import logger
    logger.info("check finished", extra={"check": "stokes", "residual": 1e-9})
"""

import logging
import json
import sys
from datetime import datetime, timezone
from typing import Optional, TextIO

# Extra keys a caller may attach to a record; emitted when present.
EXTRA_KEYS = ("scenario", "check", "residual", "tolerance", "duration_ms")


class JSONFormatter(logging.Formatter):
    """Emit each log record as a single-line JSON object."""

    def format(self, record: logging.LogRecord) -> str:
        log_entry = {
            "ts": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        for key in EXTRA_KEYS:
            if hasattr(record, key):
                log_entry[key] = getattr(record, key)
        if record.exc_info and record.exc_info[1]:
            log_entry["exception"] = str(record.exc_info[1])
        return json.dumps(log_entry, default=str)


class PrettyFormatter(logging.Formatter):
    """Human-friendly coloured output for terminals."""

    COLORS = {
        "DEBUG": "\033[36m",     # cyan
        "INFO": "\033[32m",      # green
        "WARNING": "\033[33m",   # yellow
        "ERROR": "\033[31m",     # red
        "CRITICAL": "\033[1;31m",  # bold red
    }
    RESET = "\033[0m"

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelname, self.RESET)
        ts = datetime.now().strftime("%H:%M:%S")
        line = f"{color}{ts} [{record.levelname:<8}]{self.RESET} {record.name}: {record.getMessage()}"
        if hasattr(record, "check") and hasattr(record, "residual"):
            line += f"  ({record.check}: {record.residual:.3e})"  # type: ignore[attr-defined]
        return line


def setup_logging(
    level: str = "INFO",
    json_mode: bool = False,
    stream: Optional[TextIO] = None,
) -> logging.Logger:
    """
    Configure and return the package root logger.

    Parameters:
        level:     Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL).
        json_mode: If True, emit structured JSON; otherwise pretty-print.
        stream:    Destination; stderr by default so reports on stdout stay clean.
    """
    root = logging.getLogger("sct")
    root.setLevel(getattr(logging, level.upper(), logging.INFO))
    root.propagate = False

    # Remove any existing handlers to avoid duplicate output on reconfiguration
    root.handlers.clear()

    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(JSONFormatter() if json_mode else PrettyFormatter())
    root.addHandler(handler)

    return root


# ── Default logger (reconfigured by the CLI once flags are parsed) ──
logger = setup_logging()
