"""Tests for shared/cfg.py."""

import networkx as nx
import pytest

from cfa import solve_0cfa
from cfg import Cfg, build_cfg, count_simple_cycles, source_cfg, subgraph_isomorphic, to_dot
from target_syntax import parse_target
from tests.support.factories import load_prepared

pytestmark = pytest.mark.analysis


def _graph(edges, nodes=()):
    cfg = Cfg()
    for node in nodes:
        cfg.add_node(node)
    for a, b in edges:
        cfg.add_node(a)
        cfg.add_node(b)
        cfg.add_edge(a, b)
    return cfg


def _cycle(n):
    return _graph([(i, (i + 1) % n) for i in range(n)])


@pytest.fixture
def fib_cfg():
    return source_cfg(load_prepared('fib').cls('FibGen').method('get'))


def test_fib_source_cfg_shape(fib_cfg):
    assert fib_cfg.counts() == (9, 10)
    assert fib_cfg.entry == 'L1'
    assert count_simple_cycles(fib_cfg) == 1


def test_fib_source_cfg_edges(fib_cfg):
    # The throw goes to the catch head; both the catch and the else arm fall through to the return.
    assert fib_cfg.labelled_edges() == {
        ('1', '2', 'plain'),
        ('2', '3', 'plain'),
        ('3', '4', 't'),
        ('3', '5', 'f'),
        ('4', '8', 'plain'),
        ('5', '6', 't'),
        ('6', '5', 'plain'),
        ('5', '7', 'f'),
        ('7', '9', 'plain'),
        ('8', '9', 'plain'),
    }


def test_method_call_in_try_may_reach_the_handler():
    cfg = source_cfg(load_prepared('raising_call').cls('Gate').method('admit'))
    assert {('3', '4', 'plain'), ('3', '5', 'plain')} <= cfg.labelled_edges()


def test_nested_loops_have_two_cycles():
    cfg = source_cfg(load_prepared('mul').cls('Mul').method('mul'))
    assert count_simple_cycles(cfg) == 2


def test_edge_under_both_arms_keeps_both_tags():
    cfg = Cfg()
    cfg.add_node('a')
    cfg.add_node('b')
    cfg.add_edge('a', 'b', 't')
    cfg.add_edge('a', 'b', 'f')
    assert cfg.edges == {('a', 'b', 't'), ('a', 'b', 'f')}
    assert cfg.counts() == (2, 1)


def test_reconstructed_cfg_follows_call_edges():
    program = parse_target(
        'class T {\n'
        '    int m(int x) {\n'
        '        int => int f = n -> g(n);\n'
        '        return f(x);\n'
        '    }\n'
        '}\n'
        'int g(int v) { return v; }\n'
    )
    result = solve_0cfa(program)
    cfg = build_cfg(result, program.cls('T').method('m').lid)
    assert cfg.labelled_edges() == {('T.m', 'λ_3', 'plain'), ('λ_3', 'λ_7', 'plain')}
    assert cfg.name == 'T.m'


def test_triangle_is_not_in_a_square():
    outcome = subgraph_isomorphic(_cycle(3), _cycle(4), budget=1000)
    assert outcome.verdict == 'no'


def test_single_node_is_in_anything(fib_cfg):
    outcome = subgraph_isomorphic(_graph([], nodes=['only']), fib_cfg, budget=1000)
    assert outcome.verdict == 'yes'
    assert outcome.mapping['only'] in fib_cfg.nodes


def test_loop_is_found_in_fib(fib_cfg):
    outcome = subgraph_isomorphic(_cycle(2), fib_cfg, budget=1000)
    assert outcome.verdict == 'yes'
    assert set(outcome.mapping.values()) == {'L5', 'L6'}


def test_larger_pattern_is_rejected_without_search():
    outcome = subgraph_isomorphic(_cycle(5), _cycle(4), budget=1000)
    assert (outcome.verdict, outcome.explored) == ('no', 0)


def test_search_gives_up_at_the_budget():
    # A complete acyclic digraph holds no cycle, but proving it takes many states.
    host = Cfg(graph=nx.DiGraph([(i, j) for i in range(30) for j in range(i + 1, 30)]))
    for node in host.graph.nodes:
        host.graph.nodes[node]['label'] = str(node)
    outcome = subgraph_isomorphic(_cycle(10), host, budget=1000)
    assert outcome.verdict == 'budget-exceeded'
    assert outcome.explored == 1000


def test_dot_output(fib_cfg):
    dot = to_dot(fib_cfg)
    assert dot.startswith('digraph "get" {')
    assert 'label="1", shape=box' in dot
    assert '[label="t"]' in dot
    assert dot.count('->') == 10
    assert dot.rstrip().endswith('}')
