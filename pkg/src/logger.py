import logging
import sys

LOGGER_NAME = "mimo_hwi"
LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s] %(message)s"

logger = logging.getLogger(LOGGER_NAME)
logger.addHandler(logging.NullHandler())


def configure_logging(level: str | int = "INFO") -> None:
    """Attach a single stderr handler to the package logger.

    Calling it again only changes the level.
    """
    if isinstance(level, str):
        resolved = logging.getLevelName(level.upper())
        if not isinstance(resolved, int):
            raise ValueError(f"unknown log level {level}")
        level = resolved
    logger.setLevel(level)
    for handler in logger.handlers:
        if getattr(handler, "_mimo_hwi", False):
            handler.setLevel(level)
            return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler.setLevel(level)
    handler._mimo_hwi = True  # type: ignore[attr-defined]
    logger.addHandler(handler)
