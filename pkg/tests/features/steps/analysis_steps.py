"""Steps for tests/features/capabilities/analysis/."""
import networkx as nx
from pytest_bdd import parsers, then, when

from cfa import solve_0cfa, solve_kcfa
from cfg import build_cfg, count_simple_cycles, source_cfg


def _lambdas(text):
    return {part.strip() for part in text.replace(' and ', ',').split(',')}


@when('I analyse it without context')
def _zero(ctx):
    ctx['result'] = solve_0cfa(ctx['program'])


@when(parsers.parse('I analyse it with {k:d} call site of context'))
def _k(ctx, k):
    ctx['result'] = solve_kcfa(ctx['program'], k)


@when(parsers.parse('I rebuild the control flow of {cls}.{method}'))
def _rebuild(ctx, cls, method):
    ctx['cfg'] = build_cfg(ctx['result'], ctx['program'].cls(cls).method(method).lid)


@when(parsers.parse('I build the source control flow of {cls}.{method}'))
def _source(ctx, cls, method):
    ctx['cfg'] = source_cfg(ctx['program'].cls(cls).method(method))


@then(parsers.parse('"{name}" may hold {lambdas}'))
def _may_hold(ctx, name, lambdas):
    result = ctx['result']
    assert set(result.display(result.points_to(name))) == _lambdas(lambdas)


@then(parsers.parse('at the call on line {line:d} "{name}" holds only {lam}'))
def _holds_at(ctx, line, name, lam):
    result = ctx['result']
    assert result.display(result.at_context(name, (line,))) == [lam]


@then(parsers.parse('the graph has at least {n:d} simple cycles'))
def _cycles(ctx, n):
    assert count_simple_cycles(ctx['cfg']) >= n


@then(parsers.parse('some cycle passes through {lam}'))
def _through(ctx, lam):
    cfg = ctx['cfg']
    assert any(lam in {cfg.label(node) for node in cycle} for cycle in nx.simple_cycles(cfg.graph))


@then(parsers.parse('it has {nodes:d} nodes, {edges:d} edges and {cycles:d} simple cycle'))
def _shape(ctx, nodes, edges, cycles):
    assert ctx['cfg'].counts() == (nodes, edges)
    assert count_simple_cycles(ctx['cfg']) == cycles
