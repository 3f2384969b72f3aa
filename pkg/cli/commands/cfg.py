"""``fjobf cfg``: control-flow graphs as DOT.

On a ``.ssafj`` file this draws the block graph of each method; on a ``.fjl`` file it
draws the graph reconstructed by the flow analysis.
"""

from cfg import source_cfg, to_dot
from cli.commands import emit
from cli.commands.analyze import add_analysis_arguments, analyze
from harness import SOURCE_SUFFIX, InputsError, read_program


def register(subparsers):
    parser = subparsers.add_parser('cfg', help='emit source or reconstructed CFGs as DOT')
    add_analysis_arguments(parser)
    parser.add_argument('--method', help='only this method (source files)')
    parser.add_argument('--dot', metavar='FILE', help='write here instead of stdout')
    parser.set_defaults(handler=cmd_cfg)


def cmd_cfg(args, settings):
    if not args.path.endswith(SOURCE_SUFFIX):
        _, cfg = analyze(args, settings)
        emit(to_dot(cfg), args.dot)
        return 0
    program = read_program(args.path)
    graphs = []
    for cls in program.classes:
        if args.entry and cls.name != args.entry[0]:
            continue
        for md in cls.methods:
            wanted = args.method or (args.entry[1] if args.entry else None)
            if wanted and md.name != wanted:
                continue
            cfg = source_cfg(md)
            cfg.name = f'{cls.name}.{md.name}'
            graphs.append(to_dot(cfg))
    if not graphs:
        raise InputsError(f'{args.path}: no method matches')
    emit(''.join(graphs), args.dot)
    return 0
