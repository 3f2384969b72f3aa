"""``fjobf run`` / ``fjobf run-target``: call a method on a fresh receiver."""

import json

from cli.commands import emit, parse_entry
from harness import (
    SOURCE_SUFFIX,
    CallSequence,
    InputsError,
    WrongFileKind,
    obfuscate,
    prepare_source,
    read_program,
    run_source,
    run_target,
)
from runtime import parse_literal


def _add_arguments(parser, engine_choice):
    parser.add_argument('path')
    parser.add_argument('--entry', type=parse_entry, metavar='CLASS.METHOD',
                        help='method to call (default: first method of the first class)')
    parser.add_argument('--class', dest='class_name')
    parser.add_argument('--method')
    parser.add_argument('--arg', dest='args', action='append', type=parse_literal, default=[],
                        help='argument of one call; repeat for a sequence of calls on the same receiver')
    if engine_choice:
        parser.add_argument('--engine', choices=('source', 'target'), default='source')
    parser.add_argument('--no-flatten', dest='flatten', action='store_false', default=None,
                        help='when obfuscating on the fly, keep nested applications')
    parser.add_argument('--trace', action='store_true', help='record every block entry (source engine)')
    parser.add_argument('-o', '--output', metavar='FILE', help='write the reports here instead of stdout')


def register(subparsers):
    run = subparsers.add_parser('run', help='run a method with the source or target interpreter')
    _add_arguments(run, engine_choice=True)
    run.set_defaults(handler=cmd_run)
    target = subparsers.add_parser('run-target', help='run a method with the target interpreter')
    _add_arguments(target, engine_choice=False)
    target.set_defaults(handler=cmd_run, engine='target')


def _entry(args, program):
    if args.entry:
        return args.entry
    cls = program.classes[0] if program.classes else None
    class_name = args.class_name or (cls.name if cls else None)
    method = args.method or (cls.methods[0].name if cls and cls.methods else None)
    if class_name is None or method is None:
        raise InputsError(f'{args.path}: nothing to run')
    return class_name, method


def cmd_run(args, settings):
    program = read_program(args.path)
    is_source = args.path.endswith(SOURCE_SUFFIX)
    class_name, method = _entry(args, program)
    if not args.args:
        raise InputsError('give at least one --arg')
    sequence = CallSequence(class_name, method, tuple(args.args))
    flatten = settings.flatten if args.flatten is None else args.flatten
    if args.engine == 'source':
        if not is_source:
            raise WrongFileKind(f'{args.path}: the source engine needs a .ssafj file')
        reports = run_source(prepare_source(program), sequence, settings.step_budget,
                             settings.recursion_limit, trace=args.trace)
    else:
        target = obfuscate(program, flatten) if is_source else program
        reports = run_target(target, sequence, settings.step_budget, settings.recursion_limit)
    payload = [r.model_dump(exclude_none=True) for r in reports]
    emit(json.dumps(payload, indent=2, ensure_ascii=False), args.output)
    return 1 if any(r.outcome in ('resource-limit', 'error') for r in reports) else 0
