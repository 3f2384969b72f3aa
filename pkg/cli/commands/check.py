"""``fjobf check``: parse and validate a source program."""

import sys
from pathlib import Path

from ast_source import validate
from cli.commands import emit
from cps_translate import check_cps_shapes
from harness import SOURCE_SUFFIX, TARGET_SUFFIX, WrongFileKind
from logging_config import phase
from reports import CheckReport, ViolationEntry
from source_syntax import DuplicateLabelError, SourceSyntaxError, parse_source
from target_syntax import TargetSyntaxError, parse_target


def register(subparsers):
    parser = subparsers.add_parser('check', help='validate a .ssafj (or shape-check a .fjl) file')
    parser.add_argument('path')
    parser.add_argument('--json', dest='json_out', metavar='FILE', nargs='?', const='-',
                        help='write a CheckReport (to stdout with no FILE)')
    parser.set_defaults(handler=cmd_check)


def _violations(path):
    text = Path(path).read_text(encoding='utf-8')
    if path.suffix == SOURCE_SUFFIX:
        try:
            with phase('parse'):
                program = parse_source(text)
        except SourceSyntaxError as exc:
            rule = 'duplicate-label' if isinstance(exc, DuplicateLabelError) else 'syntax'
            return [ViolationEntry(rule=rule, message=str(exc), line=exc.line, column=exc.column)]
        with phase('validate'):
            return [ViolationEntry(**v.to_dict()) for v in validate(program)]
    if path.suffix == TARGET_SUFFIX:
        try:
            with phase('parse'):
                program = parse_target(text)
        except TargetSyntaxError as exc:
            return [ViolationEntry(rule='syntax', message=str(exc), line=exc.line, column=exc.column)]
        with phase('validate'):
            return [ViolationEntry(rule='cps-shape', message=p) for p in check_cps_shapes(program)]
    raise WrongFileKind(f'{path}: expected a {SOURCE_SUFFIX} or {TARGET_SUFFIX} file')


def cmd_check(args, settings):
    path = Path(args.path)
    violations = _violations(path)
    for v in violations:
        where = f'{v.line}:{v.column}' if v.line is not None else '-'
        print(f'{path}:{where}: {v.rule}: {v.message}', file=sys.stderr)
    if args.json_out:
        report = CheckReport(path=str(path), ok=not violations, violations=violations)
        emit(report.model_dump_json(indent=2), None if args.json_out == '-' else args.json_out)
    return 1 if violations else 0
