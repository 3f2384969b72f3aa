"""Tests for shared/flatten.py."""

import pytest

from ast_target import INT_T, Apply, Assign, IfElse, Lambda, MethodCall, Return, Var, arrow, walk
from flatten import flatten, flatten_program
from target_syntax import parse_target
from tests.support.factories import CORPUS_PROGRAMS, load_target, target_runs

pytestmark = pytest.mark.obfuscation

HEADER = 'class T {\n    int m(int x) {\n        int r, y;\n        int => int => int f;\n        int => int g;\n'
FOOTER = '\n        return r;\n    }\n}\n'


def _method(body, extra=''):
    program = parse_target(HEADER + body + FOOTER + extra)
    return flatten(program.cls('T').method('m'), program)


def _nested_applications(program):
    """Applications or method calls with a non-atomic function or argument."""
    found = []
    for cls in program.classes:
        for md in cls.methods:
            roots = [d.init for d in md.locals if d.init is not None] + list(md.body)
            for root in roots:
                for node in walk(root):
                    if isinstance(node, Apply):
                        parts = (node.fn, *node.args)
                    elif isinstance(node, MethodCall):
                        parts = (node.receiver, node.arg)
                    else:
                        continue
                    if any(isinstance(p, (Apply, MethodCall, Lambda)) for p in parts):
                        found.append(node)
    return found


def test_curried_application_is_hoisted_inside_out():
    md = _method('r = f(x)(g(y));')
    assert md.body[:3] == (
        Assign('f_x', Apply(Var('f'), (Var('x'),))),
        Assign('g_y', Apply(Var('g'), (Var('y'),))),
        Assign('r', Apply(Var('f_x'), (Var('g_y'),))),
    )
    assert md.body[3] == Return(Var('r'))


def test_hoisted_names_become_typed_locals():
    md = _method('r = f(x)(g(y));')
    assert md.declared_type('f_x') == arrow(INT_T, INT_T)
    assert md.declared_type('g_y') == INT_T


def test_lambda_arguments_take_the_parameter_name():
    md = _method('r = twice(n -> n + 1, x);', 'int twice(int => int h, int v) { return h(h(v)); }\n')
    assert md.body[0].target == 'twice_h'
    assert isinstance(md.body[0].expr, Lambda)
    assert md.body[1] == Assign('r', Apply(Var('twice'), (Var('twice_h'), Var('x'))))


def test_method_call_arguments_are_hoisted():
    md = _method('r = this.m(g(x));')
    assert md.body[0] == Assign('g_x', Apply(Var('g'), (Var('x'),)))
    assert md.body[1].expr == MethodCall(md.body[1].expr.receiver, 'm', Var('g_x'))


def test_hoisting_stays_inside_if_arms():
    md = _method('if (x > 0) { r = f(x)(x); } else { r = 0; }')
    stmt = md.body[0]
    assert isinstance(stmt, IfElse)
    assert [s.target for s in stmt.then_body] == ['f_x', 'r']


def test_fresh_names_avoid_existing_identifiers():
    md = _method('y = f(x)(x);\nr = f(x)(y);', '')
    hoisted = [s.target for s in md.body if isinstance(s, Assign) and s.target not in ('r', 'y')]
    assert hoisted == ['f_x', 'f_x_2']


def test_already_flat_method_is_unchanged():
    program = parse_target(HEADER + 'r = g(x);' + FOOTER)
    md = program.cls('T').method('m')
    assert flatten(md, program) == md


def test_top_level_functions_are_left_alone():
    program = load_target('fib', flatten=False)
    assert flatten_program(program).functions == program.functions


@pytest.mark.parametrize('name', CORPUS_PROGRAMS)
def test_translations_have_no_nested_applications(name):
    assert _nested_applications(load_target(name, flatten=True)) == []
    assert _nested_applications(load_target(name, flatten=False)) != []


@pytest.mark.parametrize('name', ['fib', 'multi_entry', 'nested_try'])
def test_flattening_is_idempotent(name):
    flat = flatten_program(load_target(name, flatten=False))
    assert flatten_program(flat) == flat


def test_flattening_preserves_behaviour():
    nested = load_target('nested_try', flatten=False)
    flat = flatten_program(nested)
    args = (1, 7, 60, 9)
    assert [r.observable() for r in target_runs(flat, 'Nested.run', *args)] == [
        r.observable() for r in target_runs(nested, 'Nested.run', *args)
    ]
