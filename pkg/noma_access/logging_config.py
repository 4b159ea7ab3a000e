"""
NOMA Access Sim - Logging
structlog configuration on top of the stdlib root handler
"""

import logging
import os
import sys
from typing import Optional

import structlog

_HANDLER: Optional[logging.Handler] = None


def configure_logging(level: Optional[str] = None, json_output: Optional[bool] = None) -> None:
    """Configure structlog; repeated calls replace the stderr handler instead of stacking one"""

    global _HANDLER

    level_name = (level or os.environ.get('NOMA_SIM_LOG_LEVEL', 'INFO')).upper()
    if json_output is None:
        json_output = os.environ.get('NOMA_SIM_LOG_JSON', '0') == '1'

    # Logs go to stderr, CSV output owns stdout
    root = logging.getLogger()
    if _HANDLER is not None:
        root.removeHandler(_HANDLER)
    _HANDLER = logging.StreamHandler(sys.stderr)
    _HANDLER.setFormatter(logging.Formatter('%(message)s'))
    root.addHandler(_HANDLER)
    root.setLevel(getattr(logging, level_name, logging.INFO))

    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if json_output
        else structlog.dev.ConsoleRenderer(colors=False)
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )
