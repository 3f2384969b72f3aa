"""Subcommand registration.

Each command module exposes ``register(subparsers)``, which adds its parser and sets
``handler`` to a function taking ``(args, settings)`` and returning an exit code.
"""

import sys
from pathlib import Path


def register_commands(subparsers):
    """Register every subcommand with the top-level parser."""
    from cli.commands import analyze, cfg, check, diff, obfuscate, potency, run

    check.register(subparsers)
    run.register(subparsers)
    obfuscate.register(subparsers)
    diff.register(subparsers)
    analyze.register(subparsers)
    cfg.register(subparsers)
    potency.register(subparsers)


def emit(text, path=None):
    """Write ``text`` to ``path``, or to stdout when no path is given."""
    if path is None:
        sys.stdout.write(text if text.endswith('\n') else text + '\n')
        return
    Path(path).write_text(text, encoding='utf-8')


def parse_entry(value):
    """``Class.method`` into its two parts."""
    class_name, dot, method = (value or '').partition('.')
    if not dot or not class_name or not method:
        raise ValueError(f'expected Class.method, got {value!r}')
    return class_name, method
