"""``fjobf potency``: compare a method's CFG with what an attacker recovers."""

from cli.commands import emit, parse_entry
from cli.commands.analyze import entry_method
from cps_translate import translate_program
from harness import SOURCE_SUFFIX, WrongFileKind, prepare_source, read_program
from logging_config import phase
from potency import measure_potency


def register(subparsers):
    parser = subparsers.add_parser('potency', help='measure how much the obfuscation hides')
    parser.add_argument('path')
    parser.add_argument('--entry', type=parse_entry, metavar='CLASS.METHOD',
                        help='method to measure (default: the first one)')
    parser.add_argument('--budget', type=int, default=None, help='subgraph search state budget')
    parser.add_argument('--no-flatten', dest='flatten', action='store_false', default=None)
    parser.add_argument('-o', '--output', metavar='FILE', help='write the PotencyReport here instead of stdout')
    parser.set_defaults(handler=cmd_potency)


def cmd_potency(args, settings):
    if not args.path.endswith(SOURCE_SUFFIX):
        raise WrongFileKind(f'{args.path}: potency needs the {SOURCE_SUFFIX} original')
    source = prepare_source(read_program(args.path))
    flatten = settings.flatten if args.flatten is None else args.flatten
    with phase('translate'):
        target = translate_program(source, flatten=flatten)
    md = entry_method(source, args.entry)
    class_name = next(c.name for c in source.classes if md in c.methods)
    budget = settings.iso_budget if args.budget is None else args.budget
    report = measure_potency(source, target, class_name, md.name, budget)
    emit(report.model_dump_json(indent=2), args.output)
    return 0
