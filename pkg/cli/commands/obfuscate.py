"""``fjobf obfuscate``: translate a source program and write the FJ_λ listing."""

import logging
import sys
from pathlib import Path

from cli.commands import emit
from cps_translate import check_cps_shapes, translate_program
from harness import SOURCE_SUFFIX, WrongFileKind, prepare_source, read_program
from logging_config import phase
from target_syntax import parse_target, print_target

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('obfuscate', help='translate a .ssafj file to CPS lambda code')
    parser.add_argument('path')
    parser.add_argument('-o', '--output', metavar='FILE', help='.fjl file to write (default: stdout)')
    parser.add_argument('--flatten', dest='flatten', action='store_true', default=None,
                        help='hoist nested applications into fresh locals (default)')
    parser.add_argument('--no-flatten', dest='flatten', action='store_false',
                        help='keep nested combinator applications')
    parser.add_argument('--no-prelude', dest='prelude', action='store_false',
                        help='leave out the combinator functions, for builds that share one prelude')
    parser.add_argument('--verify', action='store_true', help='check the shape of every emitted block function')
    parser.set_defaults(handler=cmd_obfuscate)


def cmd_obfuscate(args, settings):
    if Path(args.path).suffix != SOURCE_SUFFIX:
        raise WrongFileKind(f'{args.path}: obfuscate reads {SOURCE_SUFFIX} files')
    flatten = settings.flatten if args.flatten is None else args.flatten
    source = prepare_source(read_program(args.path))
    with phase('translate'):
        target = translate_program(source, flatten=flatten, prelude=args.prelude)
    text = print_target(target)
    with phase('parse'):
        parse_target(text)
    if args.verify:
        problems = check_cps_shapes(target)
        for problem in problems:
            print(problem, file=sys.stderr)
        if problems:
            return 1
    emit(text, args.output)
    logger.info(f'wrote {len(text.splitlines())} lines' + (f' to {args.output}' if args.output else ''))
    return 0
