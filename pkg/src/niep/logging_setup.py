"""Rich logging for the niep command line."""

import logging

from rich.console import Console
from rich.logging import RichHandler

LOGGER_NAME = "niep"


def configure_logging(level: str = "WARNING", console: Console | None = None) -> logging.Logger:
    """
    Attach a RichHandler to the package logger.

    Calling it again replaces the previous handler, so the CLI callback can run
    once per invocation under CliRunner.

    Args:
        level: Logging level name
        console: Console to log to (stderr by default)

    Returns:
        The configured package logger
    """
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)

    handler = RichHandler(
        console=console or Console(stderr=True),
        show_time=False,
        show_path=False,
        markup=False,
    )
    logger.addHandler(handler)
    logger.setLevel(level.upper())
    logger.propagate = False
    return logger
