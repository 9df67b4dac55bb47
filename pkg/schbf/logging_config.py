import logging
import sys
from typing import Optional

from pythonjsonlogger import jsonlogger

from schbf import config


def setup_logging(level: Optional[str] = None, json_output: Optional[bool] = None) -> logging.Logger:
    """Configure the ``schbf`` logger tree.

    Plain text uses ``config.LOG_FORMAT``; ``json_output`` switches to one JSON
    object per record with the same fields plus any ``extra=`` keys.
    """
    level = (level or config.LOG_LEVEL).upper()
    json_output = config.LOG_JSON if json_output is None else json_output

    handler = logging.StreamHandler(sys.stderr)
    if json_output:
        handler.setFormatter(jsonlogger.JsonFormatter(config.LOG_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(config.LOG_FORMAT))

    logger = logging.getLogger("schbf")
    logger.handlers.clear()
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    return logger
