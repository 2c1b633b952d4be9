"""Logging setup for the command-line entry point."""

import logging
import sys

from src.config.settings import Settings


def configure_logging(settings: Settings | None = None, level: str | None = None) -> None:
    """
    Configure root logging on stderr.
    
    stdout is reserved for reports, so every handler writes to stderr.
    
    Args:
        settings: Optional settings instance (creates new if not provided)
        level: Explicit level overriding Settings.LOG_LEVEL
    """
    if settings is None:
        settings = Settings()
    
    log_level = (level or settings.LOG_LEVEL).upper()
    
    logging.basicConfig(
        level=getattr(logging, log_level, logging.INFO),
        format=settings.LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )
