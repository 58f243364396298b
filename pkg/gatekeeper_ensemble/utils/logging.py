"""Structured logging setup for the command-line tool.

Reports go to stdout, so every log line is written to stderr.
"""

import logging
import sys
from typing import Optional
import structlog
from structlog.stdlib import LoggerFactory


def setup_logging(
    level: str = "WARNING",
    json_logs: bool = False,
    command: Optional[str] = None,
    tool_name: str = "gatekeeper-ensemble",
) -> None:
    """Configure structlog for one CLI invocation.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR)
        json_logs: Render JSON lines instead of console key=value lines
        command: Subcommand bound into every log line
        tool_name: Name bound into every log line
    """
    log_level = getattr(logging, level.upper(), logging.WARNING)

    processors = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.CallsiteParameterAdder(
            parameters=[structlog.processors.CallsiteParameter.FUNC_NAME]
        ),
    ]
    if json_logs:
        processors.append(structlog.processors.JSONRenderer(sort_keys=True))
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=False))

    # Reconfigured on every main() call, so loggers must not keep a stale level.
    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(log_level),
        logger_factory=LoggerFactory(),
        cache_logger_on_first_use=False,
    )

    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=log_level, force=True)

    structlog.contextvars.clear_contextvars()
    context = {"tool": tool_name}
    if command:
        context["command"] = command
    structlog.contextvars.bind_contextvars(**context)
