"""Tests for shared/interp_target.py."""

import pytest

from interp_target import Closure, Frame, FunctionRef, Observer, TargetInterpreter, eval_t_method, eval_t_stmts
from runtime import Effects, EvalError, ResourceLimitExceeded, StepBudget, Store
from target_syntax import parse_target
from tests.support.factories import load_target, target_runs

pytestmark = pytest.mark.interpretation


def _run(text, arg, *, budget=10_000, observer=None, cls='T', method='m'):
    program = parse_target(text)
    store = Store()
    effects = Effects()
    interpreter = TargetInterpreter(program, StepBudget(budget), effects, observer)
    receiver = interpreter.instantiate(store, cls)
    md = program.cls(cls).method(method)
    value, _ = interpreter.eval_t_method(md, receiver, arg, store)
    return value, effects.printed


def _class(body):
    return f'class T {{\n    int m(int x) {{\n{body}\n    }}\n}}\n'


def test_lambda_application():
    value, _ = _run(_class('int => int inc = n -> n + 1; return inc(x);'), 4)
    assert value == 5


def test_curried_application():
    value, _ = _run(_class('int => int => int add = a -> b -> a + b; return add(x)(10);'), 4)
    assert value == 14


def test_multi_parameter_lambda():
    value, _ = _run(_class('return ((a, b) -> a * b)(x, 3);'), 5)
    assert value == 15


def test_top_level_function_is_a_value():
    text = _class('int => int inc = n -> n + 1; return twice(inc, x);') + (
        'int twice(int => int f, int v) { return f(f(v)); }\n'
    )
    value, _ = _run(text, 1)
    assert value == 3


def test_single_parameter_accepts_no_arguments():
    value, _ = _run(_class('void => int seven = n -> 7; return seven();'), 0)
    assert value == 7


def test_arity_mismatch_is_an_error():
    with pytest.raises(EvalError, match='expects 2 arguments'):
        _run(_class('return ((a, b) -> a + b)(x);'), 1)


def test_applying_a_non_function_is_an_error():
    with pytest.raises(EvalError, match='cannot apply'):
        _run(_class('int y = 3; return y(x);'), 1)


def test_unbound_variable_is_an_error():
    with pytest.raises(EvalError, match='unbound'):
        _run(_class('return nowhere;'), 1)


def test_if_condition_must_be_boolean():
    with pytest.raises(EvalError, match='not a boolean'):
        _run(_class('if (x) { return 1; } return 0;'), 1)


class TestStatementLists:
    """eval_t_stmts runs a body fragment in a given frame and reports what it returned."""

    @pytest.fixture
    def method(self):
        program = parse_target(_class('int y;\ny = x + 1;\nreturn y;\ny = 0;'))
        return program, program.cls('T').method('m')

    def _frame(self, md):
        frame = Frame(md)
        frame.bindings.update({'x': 4, 'y': None})
        return frame

    def test_empty_list(self, method):
        program, md = method
        store = Store()
        assert eval_t_stmts(program, (), self._frame(md), store) == (None, store)

    def test_assignments_only(self, method):
        program, md = method
        store = Store()
        frame = self._frame(md)
        value, after = eval_t_stmts(program, md.body[:1], frame, store)
        assert value is None
        assert after is store
        assert frame.bindings['y'] == 5

    def test_return_stops_the_list(self, method):
        program, md = method
        store = Store()
        frame = self._frame(md)
        value, after = eval_t_stmts(program, md.body, frame, store)
        assert value == 5
        assert after is store
        assert frame.bindings['y'] == 5


def test_continuations_share_the_activation_frame():
    body = (
        'int c;\n'
        'void => void bump = n -> { c = c + x; return; };\n'
        'c = 0;\n'
        'bump();\n'
        'bump();\n'
        'return c;'
    )
    value, _ = _run(_class(body), 3)
    assert value == 6


def test_lambda_parameters_shadow_frame_locals():
    body = 'int n = 100;\nint => int f = n -> { n = n + 1; return n; };\nint r = f(x);\nreturn n + r;'
    value, _ = _run(_class(body), 1)
    assert value == 102


def test_print_and_fields():
    text = (
        'class T {\n'
        '    int count = 0;\n'
        '    int m(int x) {\n'
        '        this.count = this.count + x;\n'
        '        System.out.println("count " + this.count);\n'
        '        return this.count;\n'
        '    }\n'
        '}\n'
    )
    value, printed = _run(text, 4)
    assert value == 4
    assert printed == ['count 4']


def test_exception_class_is_built_in():
    text = _class('Exception e = new Exception(); return 1;')
    value, _ = _run(text, 0)
    assert value == 1


def test_step_budget_stops_runaway_recursion():
    program = parse_target(_class('return spin(x);') + 'int spin(int n) { return spin(n); }\n')
    store = Store()
    receiver = TargetInterpreter(program).instantiate(store, 'T')
    with pytest.raises(ResourceLimitExceeded):
        eval_t_method(program, program.cls('T').method('m'), receiver, 0, store, budget=StepBudget(500))


def test_observer_sees_callable_bindings_and_calls(mocker):
    observer = mocker.create_autospec(Observer, instance=True)
    text = _class('int k = 2; int => int inc = n -> n + k; return inc(x);')
    program = parse_target(text)
    md = program.cls('T').method('m')
    inc = md.locals[1].init
    _run(text, 1, observer=observer)
    # Only callable values are reported; the int local is not.
    binds = [c.args for c in observer.on_bind.call_args_list]
    assert [(lid, name) for lid, name, _ in binds] == [(md.lid, 'inc')]
    assert isinstance(binds[0][2], Closure)
    observer.on_call.assert_called_once_with(md.lid, inc.lid, [1])


def test_observer_sees_function_references(mocker):
    observer = mocker.create_autospec(Observer, instance=True)
    text = _class('int => int f = id; return f(x);') + 'int id(int v) { return v; }\n'
    program = parse_target(text)
    fn = program.function('id')
    value, _ = _run(text, 9, observer=observer)
    assert value == 9
    assert isinstance(observer.on_bind.call_args_list[0].args[2], FunctionRef)
    assert observer.on_call.call_args_list[0].args[1] == fn.lid


def test_translated_fibgen():
    reports = target_runs(load_target('fib'), 'FibGen.get', 3, 2, 5)
    assert [r.value for r in reports] == ['2', '-1', '5']
    assert [r.outcome for r in reports] == ['normal'] * 3
    assert reports[1].printed == ['the input should be greater than 3.']


def test_translated_exception_escapes_as_outcome():
    reports = target_runs(load_target('guard'), 'Guard.check', 5, -1, 0)
    assert [r.outcome for r in reports] == ['normal', 'exception', 'normal']
    assert reports[1].value == 'Exception'


def test_translated_cross_method_exception():
    reports = target_runs(load_target('raising_call'), 'Gate.admit', 1, 3, 4, 2)
    assert [r.value for r in reports] == ['4', '10', '12', '7']
    assert reports[2].printed == ['rejected 12']


def test_unknown_entry_is_an_error():
    with pytest.raises(EvalError, match='no method'):
        target_runs(load_target('abs'), 'Abs.missing', 1)
