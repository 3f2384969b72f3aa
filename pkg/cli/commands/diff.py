"""``fjobf diff``: run input sequences on the source and obfuscated engines."""

import sys
from pathlib import Path

from cli.commands import emit
from harness import diff, parse_inputs, read_program


def register(subparsers):
    parser = subparsers.add_parser('diff', help='compare source and obfuscated behaviour')
    parser.add_argument('path')
    parser.add_argument('--inputs', required=True, metavar='FILE',
                        help='one "Class.method: arg, ..." call sequence per line')
    parser.add_argument('--no-flatten', dest='flatten', action='store_false', default=None)
    parser.add_argument('--mutate', action='store_true',
                        help='break the translation on purpose; the check must then disagree')
    parser.add_argument('-o', '--output', metavar='FILE', help='write the DiffReport here instead of stdout')
    parser.set_defaults(handler=cmd_diff)


def cmd_diff(args, settings):
    program = read_program(args.path)
    sequences = parse_inputs(Path(args.inputs).read_text(encoding='utf-8'))
    flatten = settings.flatten if args.flatten is None else args.flatten
    report = diff(program, sequences, settings.step_budget, settings.recursion_limit,
                  flatten=flatten, mutate=args.mutate)
    for row in report.rows:
        if row.verdict == 'disagree':
            print(f'{row.input}: {", ".join(row.fields)} differ', file=sys.stderr)
    emit(report.model_dump_json(indent=2), args.output)
    return 0 if report.agree else 1
