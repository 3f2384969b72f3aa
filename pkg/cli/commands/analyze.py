"""``fjobf analyze``: flow analysis of an obfuscated program, as JSON and DOT."""

from cfa import FlowAnalysis
from cfg import build_cfg, count_simple_cycles, to_dot
from cli.commands import emit, parse_entry
from harness import SOURCE_SUFFIX, InputsError, obfuscate, read_program
from logging_config import phase
from reports import AnalysisReport, CfgSummary


def register(subparsers):
    parser = subparsers.add_parser('analyze', help='0-CFA / k-CFA over a .fjl (or obfuscated .ssafj) file')
    add_analysis_arguments(parser)
    parser.add_argument('--json', dest='json_out', metavar='FILE', help='write the AnalysisReport here (default: stdout)')
    parser.add_argument('--dot', metavar='FILE', help='also write the reconstructed CFG as DOT')
    parser.set_defaults(handler=cmd_analyze)


def add_analysis_arguments(parser):
    parser.add_argument('path')
    parser.add_argument('-k', '--context-sensitivity', dest='k', type=int, default=None,
                        help='call-string length; 0 is context-insensitive')
    parser.add_argument('--entry', type=parse_entry, metavar='CLASS.METHOD',
                        help='method the reconstructed CFG starts from (default: the first one)')
    parser.add_argument('--no-flatten', dest='flatten', action='store_false', default=None)


def load_target(args, settings):
    program = read_program(args.path)
    if args.path.endswith(SOURCE_SUFFIX):
        flatten = settings.flatten if args.flatten is None else args.flatten
        program = obfuscate(program, flatten)
    return program


def entry_method(program, entry):
    if entry is None:
        if not program.classes or not program.classes[0].methods:
            raise InputsError('the program declares no methods')
        return program.classes[0].methods[0]
    class_name, method = entry
    cls = program.cls(class_name)
    md = cls.method(method) if cls is not None else None
    if md is None:
        raise InputsError(f'no method {class_name}.{method}')
    return md


def analyze(args, settings):
    """(result, cfg) for the program and entry named on the command line."""
    program = load_target(args, settings)
    k = settings.default_k if args.k is None else args.k
    if k < 0:
        raise InputsError(f'call-string length must not be negative, got {k}')
    entry = entry_method(program, args.entry)
    with phase('analyze'):
        result = FlowAnalysis(program, k).solve()
    with phase('cfg'):
        cfg = build_cfg(result, entry.lid)
    return result, cfg


def _context_name(ctx):
    return ','.join(str(site) for site in ctx) or '-'


def analysis_report(result, cfg):
    variables = {result.var_name(key): result.display(codes) for key, codes in result.variables().items()}
    contexts = None
    if result.k > 0:
        contexts = {}
        for (key, ctx), codes in result.contextual().items():
            contexts.setdefault(result.var_name(key), {})[_context_name(ctx)] = result.display(codes)
        contexts = {name: dict(sorted(per.items())) for name, per in sorted(contexts.items())}
    summary = CfgSummary(
        nodes=sorted(cfg.label(n) for n in cfg.nodes),
        edges=sorted(cfg.labelled_edges()),
        simple_cycles=count_simple_cycles(cfg),
    )
    return AnalysisReport(
        k=result.k,
        entry=cfg.name,
        variables=dict(sorted(variables.items())),
        contexts=contexts,
        cfg=summary,
    )


def cmd_analyze(args, settings):
    result, cfg = analyze(args, settings)
    report = analysis_report(result, cfg)
    emit(report.model_dump_json(indent=2, exclude_none=True), args.json_out)
    if args.dot:
        emit(to_dot(cfg), args.dot)
    return 0
