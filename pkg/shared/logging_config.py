"""Structured JSON logging shared by every subcommand.

One log line format, one place it's defined. Named `logging_config.py` rather than
`logging.py` because `shared/` is on the import path flat, and a module named
`logging.py` would shadow the stdlib package.

Carries the correlation fields relevant to a pipeline run: `command` (the CLI
subcommand), `method` (the Class.method currently being processed) and `phase` (parse,
validate, translate, flatten, interpret, analyze, cfg). Fields not set default to "-".
Logs go to stderr so that reports written to stdout stay machine-readable.
"""

import contextlib
import contextvars
import logging
import sys

_command_var = contextvars.ContextVar('_fjobf_command', default='-')
_method_var = contextvars.ContextVar('_fjobf_method', default='-')
_phase_var = contextvars.ContextVar('_fjobf_phase', default='-')

JSON_LOG_FORMAT = (
    '{"time": "%(asctime)s", "level": "%(levelname)s", "module": "%(module)s", '
    '"command": "%(command)s", "method": "%(method)s", "phase": "%(phase)s", '
    '"message": "%(message)s"}'
)
PLAIN_LOG_FORMAT = '%(levelname)s %(module)s [%(command)s %(method)s %(phase)s] %(message)s'


class _CorrelationFilter(logging.Filter):
    """Injects the current contextvar-scoped correlation fields into every record."""

    def filter(self, record):
        record.command = _command_var.get()
        record.method = _method_var.get()
        record.phase = _phase_var.get()
        return True


def configure_json_logging(level=logging.INFO, stream=None, json_format=True):
    """Install the shared handler on the root logger.

    Idempotent: calling this more than once (every `main()` call in the test suite)
    does not stack duplicate handlers.
    """
    root_logger = logging.getLogger()
    if any(getattr(h, '_fjobf_json', False) for h in root_logger.handlers):
        return root_logger

    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(logging.Formatter(JSON_LOG_FORMAT if json_format else PLAIN_LOG_FORMAT))
    handler.addFilter(_CorrelationFilter())
    handler._fjobf_json = True
    root_logger.addHandler(handler)
    root_logger.setLevel(level)
    return root_logger


def set_command(value):
    """Correlate every log line with the subcommand being run."""
    _command_var.set(value or '-')


def set_method_context(method=None):
    """Correlate log lines with one Class.method. Call with no argument to clear."""
    _method_var.set(method or '-')


@contextlib.contextmanager
def phase(name):
    """Tag log lines emitted inside the block with a pipeline phase."""
    token = _phase_var.set(name or '-')
    try:
        yield
    finally:
        _phase_var.reset(token)
