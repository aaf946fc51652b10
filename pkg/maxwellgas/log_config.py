"""Logging for maxwellgas: diagnostics on stderr, results on stdout.

Solver and check progress goes through the loggers here, all bound to
stderr. Stdout is reserved for the rich summary tables and the JSON error
document, so `maxwellgas ... > out.json` stays parseable at any verbosity.
INFO carries one line per run or check; DEBUG adds per-step detail.
"""

import logging
import sys

# Default log format
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Module-level cache for loggers
_loggers: dict[str, logging.Logger] = {}


def get_logger(name: str, level: int = logging.INFO) -> logging.Logger:
    """Cached stderr logger for one maxwellgas module.

    The logger does not propagate, so a root handler installed by
    configure_logging never duplicates its lines.

    Args:
        name: Logger name (typically __name__ of the calling module)
        level: Logging level (default: INFO)

    Returns:
        Configured Logger instance
    """
    if name in _loggers:
        return _loggers[name]

    logger = logging.getLogger(name)
    logger.setLevel(level)

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
        logger.propagate = False

    _loggers[name] = logger
    return logger


def configure_logging(level: int = logging.INFO, format_str: str | None = None):
    """Apply the CLI verbosity (-v for DEBUG, -q for WARNING) everywhere.

    Re-levels the loggers already handed out by get_logger as well as the
    maxwellgas namespace, since modules fetch theirs at import time.

    Args:
        level: Logging level for maxwellgas loggers
        format_str: Custom format string (optional)
    """
    fmt = format_str or LOG_FORMAT
    logging.basicConfig(level=level, format=fmt, stream=sys.stderr)

    logging.getLogger("maxwellgas").setLevel(level)
    for logger in _loggers.values():
        logger.setLevel(level)
        for handler in logger.handlers:
            handler.setFormatter(logging.Formatter(fmt))
