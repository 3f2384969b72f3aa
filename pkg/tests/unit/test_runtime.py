"""Tests for shared/runtime.py: values, the heap and the operator table."""

import sys

import pytest

from runtime import (
    EvalError,
    Loc,
    ResourceLimitExceeded,
    StepBudget,
    Store,
    apply_operator,
    deep_recursion,
    parse_literal,
    render_value,
)

pytestmark = pytest.mark.interpretation


@pytest.mark.parametrize('op, left, right, expected', [
    ('+', 2, 3, 5),
    ('-', 2, 3, -1),
    ('*', -4, 3, -12),
    ('/', 7, 2, 3),
    ('/', -7, 2, -3),
    ('%', -7, 2, -1),
    ('%', 7, -2, 1),
    ('<', 1, 2, True),
    ('>=', 2, 2, True),
    ('==', 3, 3, True),
    ('!=', True, False, True),
    ('&&', True, False, False),
    ('||', False, True, True),
])
def test_operator_table(op, left, right, expected):
    assert apply_operator(op, left, right) == expected


def test_plus_concatenates_when_either_side_is_a_string():
    assert apply_operator('+', 'greater than ', 3) == 'greater than 3'
    assert apply_operator('+', True, '!') == 'true!'
    assert apply_operator('+', 'x', None) == 'xnull'


def test_division_by_zero_is_an_eval_error():
    with pytest.raises(EvalError, match='division by zero'):
        apply_operator('/', 1, 0)
    with pytest.raises(EvalError, match='division by zero'):
        apply_operator('%', 1, 0)


def test_arithmetic_on_booleans_is_an_eval_error():
    with pytest.raises(EvalError):
        apply_operator('-', True, 1)
    with pytest.raises(EvalError):
        apply_operator('&&', 1, True)


def test_equality_does_not_mix_kinds():
    assert apply_operator('==', 1, True) is False
    assert apply_operator('==', None, None) is True
    assert apply_operator('==', Loc(1), Loc(1)) is True
    assert apply_operator('==', Loc(1), Loc(2)) is False


def test_store_allocates_increasing_locations_with_defaults():
    store = Store()
    a = store.allocate('A', {'n': 0})
    b = store.allocate('A', {'n': 0})
    assert (a.address, b.address) == (1, 2)
    store.write_field(a, 'n', 5)
    assert store.read_field(a, 'n') == 5
    assert store.read_field(b, 'n') == 0


def test_store_rejects_unknown_fields_and_non_locations():
    store = Store()
    a = store.allocate('A', {'n': 0})
    with pytest.raises(EvalError):
        store.read_field(a, 'm')
    with pytest.raises(EvalError):
        store.write_field(7, 'n', 1)


def test_snapshot_follows_references():
    store = Store()
    inner = store.allocate('B', {'v': 1})
    outer = store.allocate('A', {'child': inner, 'flag': True})
    assert store.snapshot([outer]) == [
        {'class': 'A', 'fields': {'child': '#1', 'flag': 'true'}},
        {'class': 'B', 'fields': {'v': '1'}},
    ]


def test_snapshot_ignores_addresses():
    first, second = Store(), Store()
    second.allocate('Noise', {})
    a = first.allocate('A', {'n': 1})
    b = second.allocate('A', {'n': 1})
    assert first.snapshot([a, None]) == second.snapshot([b, 3])


def test_render_value():
    store = Store()
    loc = store.allocate('A', {})
    assert render_value(None) == 'null'
    assert render_value(False) == 'false'
    assert render_value(-3) == '-3'
    assert render_value(loc, store) == 'A@1'
    assert render_value(Loc(9)) == 'obj@9'


@pytest.mark.parametrize('text, value', [('3', 3), (' -12 ', -12), ('true', True), ('false', False), ('null', None)])
def test_parse_literal(text, value):
    assert parse_literal(text) == value


def test_parse_literal_rejects_other_text():
    with pytest.raises(ValueError):
        parse_literal('three')


def test_step_budget_runs_out():
    budget = StepBudget(2)
    budget.tick()
    budget.tick()
    with pytest.raises(ResourceLimitExceeded):
        budget.tick()


def test_deep_recursion_restores_the_limit_and_converts_overflow():
    before = sys.getrecursionlimit()

    def down(n):
        return down(n + 1)

    with pytest.raises(ResourceLimitExceeded):
        with deep_recursion(before):
            down(0)
    assert sys.getrecursionlimit() == before
