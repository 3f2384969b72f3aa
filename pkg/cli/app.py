"""fjobf: obfuscate SSAFJ-EH methods into CPS lambda code and measure the result.

Exit codes: 0 success, 1 domain failure (violations, disagreement, evaluation errors),
2 environment failure (missing or wrong files, bad inputs, invalid configuration).
"""

import argparse
import logging
import sys

from pydantic import ValidationError

import cli  # noqa: F401  (puts shared/ on the path)
from cli.commands import register_commands
from config import Settings
from harness import InputsError, InvalidProgram, WrongFileKind
from logging_config import configure_json_logging, set_command
from runtime import FjobfError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_ENVIRONMENT = 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog='fjobf', description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    register_commands(subparsers)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings()
    except ValidationError as exc:
        print(f'invalid configuration: {exc}', file=sys.stderr)
        return EXIT_ENVIRONMENT

    configure_json_logging(getattr(logging, settings.log_level), json_format=settings.log_json)
    set_command(args.command)
    try:
        return args.handler(args, settings)
    except InvalidProgram as exc:
        for violation in exc.violations:
            print(violation, file=sys.stderr)
        return EXIT_DOMAIN
    except (WrongFileKind, InputsError) as exc:
        print(f'error: {exc}', file=sys.stderr)
        return EXIT_ENVIRONMENT
    except OSError as exc:
        print(f'error: {exc.strerror or exc}: {exc.filename or ""}'.rstrip(': '), file=sys.stderr)
        return EXIT_ENVIRONMENT
    except FjobfError as exc:
        logger.error(f'{type(exc).__name__}: {exc}')
        print(f'error: {exc}', file=sys.stderr)
        return EXIT_DOMAIN
    finally:
        set_command(None)


if __name__ == '__main__':
    sys.exit(main())
