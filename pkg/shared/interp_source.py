"""Reference interpreter for SSAFJ-EH.

Evaluation follows the block semantics directly: every block yields either a normal
outcome carrying its exit label or a raised exception carrying the label of the block
that raised it. φ joins pick their operand by the label control arrived from.

Label threading, in short:

* a block list threads the exit label of each block into the next one;
* every block exits with its own label, compound blocks included;
* an exception keeps the label of the Throw or MethodCall block that produced it until
  a try/catch consumes it (raise-φs resolve against it, catch blocks run with it as
  their predecessor); an exception escaping a method is relabelled ``L0``.
"""

import logging
from dataclasses import dataclass, field

from ast_source import (
    Assigns,
    BinOp,
    Const,
    FieldAccess,
    FieldAssign,
    IfElse,
    MethodCall,
    New,
    Print,
    Return,
    This,
    Throw,
    TryCatch,
    Var,
    VarAssign,
    While,
)
from runtime import (
    EXCEPTION_CLASS,
    Effects,
    EvalError,
    StepBudget,
    apply_operator,
    deep_recursion,
    render_value,
)

logger = logging.getLogger(__name__)

ENTRY_LABEL = 'L0'


class PhiResolutionError(EvalError):
    """Some but not all φs of a join name the incoming label."""


@dataclass
class Normal:
    value: object
    env: dict
    store: object
    exit_label: str


@dataclass
class Raised:
    payload: object
    env: dict
    store: object
    label: str


ExceptionOutcome = Raised


@dataclass
class GEnvS:
    """Field and method tables of a program."""

    fields: dict = field(default_factory=dict)
    methods: dict = field(default_factory=dict)

    @classmethod
    def from_program(cls, program):
        genv = cls()
        for c in program.classes:
            genv.fields[c.name] = tuple(c.fields)
            for md in c.methods:
                genv.methods[(c.name, md.name)] = md
        return genv

    def method(self, class_name, name):
        try:
            return self.methods[(class_name, name)]
        except KeyError:
            raise EvalError(f'{class_name} has no method {name!r}') from None

    def instantiate(self, store, class_name):
        if class_name == EXCEPTION_CLASS and class_name not in self.fields:
            return store.allocate(class_name, {})
        if class_name not in self.fields:
            raise EvalError(f'unknown class {class_name!r}')
        defaults = {fd.name: (fd.default.value if fd.default is not None else None) for fd in self.fields[class_name]}
        return store.allocate(class_name, defaults)


def resolve_phis(phis, incoming, lenv):
    """Bind each φ target to its operand for ``incoming``.

    A join none of whose φs names the incoming label leaves the environment alone; a
    join where only some do is an error.
    """
    named = [phi for phi in phis if phi.operand_for(incoming) is not None]
    if not named:
        return lenv
    if len(named) != len(phis):
        missing = ', '.join(phi.target for phi in phis if phi.operand_for(incoming) is None)
        raise PhiResolutionError(f'no operand for {incoming} in φ of {missing}')
    env = dict(lenv)
    for phi in phis:
        source = phi.operand_for(incoming)
        if source not in env:
            raise EvalError(f'φ {phi.target} reads unbound variable {source!r}')
        env[phi.target] = env[source]
    return env


class BlockTracer:
    """Collects one record per block entry with the bindings changed since the last one."""

    def __init__(self, store=None):
        self.records = []
        self._last = [{}]
        self.store = store

    def enter_method(self):
        self._last.append({})

    def leave_method(self):
        self._last.pop()

    def record(self, label, pred, lenv):
        last = self._last[-1]
        changed = {
            name: render_value(value, self.store)
            for name, value in lenv.items()
            if name not in last or last[name] is not value
        }
        self._last[-1] = dict(lenv)
        self.records.append({'label': label, 'pred': pred, 'env_diff': changed})


class SourceInterpreter:
    def __init__(self, genv, budget=None, effects=None, tracer=None):
        self.genv = genv
        self.budget = budget or StepBudget(1_000_000)
        self.effects = effects or Effects()
        self.tracer = tracer

    def eval_method(self, md, receiver, arg, store):
        lenv = {decl.name: None for decl in md.locals}
        lenv['this'] = receiver
        lenv[md.param] = arg
        if self.tracer is not None:
            self.tracer.enter_method()
        try:
            outcome = self.eval_blocks(md.body, ENTRY_LABEL, lenv, store)
        finally:
            if self.tracer is not None:
                self.tracer.leave_method()
        if isinstance(outcome, Raised):
            return Raised(outcome.payload, outcome.env, outcome.store, ENTRY_LABEL)
        return outcome

    def eval_blocks(self, blocks, pred, lenv, store):
        outcome = Normal(None, lenv, store, pred)
        for block in blocks:
            outcome = self.eval_block(block, outcome.exit_label, outcome.env, outcome.store)
            if isinstance(outcome, Raised):
                return outcome
        return outcome

    def eval_block(self, block, pred, lenv, store):
        self.budget.tick()
        if self.tracer is not None:
            self.tracer.record(block.label, pred, lenv)
        label = block.label
        body = block.body

        if isinstance(body, Assigns):
            return Normal(None, self.eval_assignments(body.assignments, lenv, store), store, label)

        if isinstance(body, Return):
            return Normal(self.eval_expr(body.expr, lenv, store), lenv, store, label)

        if isinstance(body, Throw):
            return Raised(self.eval_expr(body.expr, lenv, store), lenv, store, label)

        if isinstance(body, MethodCall):
            receiver = self.eval_expr(body.receiver, lenv, store)
            arg = self.eval_expr(body.arg, lenv, store)
            callee = self.genv.method(store.get(receiver).class_name, body.method)
            result = self.eval_method(callee, receiver, arg, store)
            if isinstance(result, Raised):
                return Raised(result.payload, lenv, result.store, label)
            return Normal(None, {**lenv, body.target: result.value}, result.store, label)

        if isinstance(body, TryCatch):
            outcome = self.eval_blocks(body.try_blocks, pred, lenv, store)
            if isinstance(outcome, Raised):
                handler_env = resolve_phis(body.raise_phis, outcome.label, outcome.env)
                handler_env = {**handler_env, body.exn_var: outcome.payload}
                outcome = self.eval_blocks(body.catch_blocks, outcome.label, handler_env, outcome.store)
                if isinstance(outcome, Raised):
                    return outcome
            env = resolve_phis(body.join_phis, outcome.exit_label, outcome.env)
            return Normal(outcome.value, env, outcome.store, label)

        if isinstance(body, While):
            incoming = pred
            while True:
                lenv = resolve_phis(body.entry_phis, incoming, lenv)
                cond = self.eval_expr(body.cond, lenv, store)
                if not isinstance(cond, bool):
                    raise EvalError(f'while {label}: condition is {render_value(cond, store)}, not a boolean')
                if not cond:
                    return Normal(None, lenv, store, label)
                outcome = self.eval_blocks(body.body, label, lenv, store)
                if isinstance(outcome, Raised):
                    return outcome
                incoming, lenv, store = outcome.exit_label, outcome.env, outcome.store

        if isinstance(body, IfElse):
            cond = self.eval_expr(body.cond, lenv, store)
            if not isinstance(cond, bool):
                raise EvalError(f'if {label}: condition is {render_value(cond, store)}, not a boolean')
            branch = body.then_blocks if cond else body.else_blocks
            outcome = self.eval_blocks(branch, label, lenv, store)
            if isinstance(outcome, Raised):
                return outcome
            env = resolve_phis(body.join_phis, outcome.exit_label, outcome.env)
            return Normal(outcome.value, env, outcome.store, label)

        raise TypeError(f'not a block body: {body!r}')

    def eval_assignments(self, assignments, lenv, store):
        for assignment in assignments:
            lenv = self.eval_assignment(assignment, lenv, store)
        return lenv

    def eval_assignment(self, assignment, lenv, store):
        if isinstance(assignment, VarAssign):
            return {**lenv, assignment.target: self.eval_expr(assignment.expr, lenv, store)}
        if isinstance(assignment, FieldAssign):
            receiver = self.eval_expr(assignment.receiver, lenv, store)
            store.write_field(receiver, assignment.field, self.eval_expr(assignment.expr, lenv, store))
            return lenv
        if isinstance(assignment, Print):
            self.effects.emit(render_value(self.eval_expr(assignment.expr, lenv, store), store))
            return lenv
        raise TypeError(f'not an assignment: {assignment!r}')

    def eval_expr(self, expr, lenv, store):
        if isinstance(expr, Const):
            return expr.value
        if isinstance(expr, Var):
            if expr.name not in lenv:
                raise EvalError(f'unbound variable {expr.name!r}')
            return lenv[expr.name]
        if isinstance(expr, This):
            return lenv['this']
        if isinstance(expr, FieldAccess):
            return store.read_field(self.eval_expr(expr.receiver, lenv, store), expr.field)
        if isinstance(expr, New):
            return self.genv.instantiate(store, expr.class_name)
        if isinstance(expr, BinOp):
            left = self.eval_expr(expr.left, lenv, store)
            right = self.eval_expr(expr.right, lenv, store)
            return apply_operator(expr.op, left, right, store)
        raise TypeError(f'not an expression: {expr!r}')


def eval_method(md, receiver, arg, genv, store, budget=None, effects=None, tracer=None, recursion_limit=200_000):
    """Run one method; returns Normal (value and store) or Raised."""
    interpreter = SourceInterpreter(genv, budget, effects, tracer)
    with deep_recursion(recursion_limit):
        return interpreter.eval_method(md, receiver, arg, store)


def eval_blocks(blocks, pred, genv, lenv, store, budget=None, effects=None):
    return SourceInterpreter(genv, budget, effects).eval_blocks(blocks, pred, lenv, store)


def eval_block(block, pred, genv, lenv, store, budget=None, effects=None):
    return SourceInterpreter(genv, budget, effects).eval_block(block, pred, lenv, store)


def eval_expr(expr, genv, lenv, store):
    return SourceInterpreter(genv).eval_expr(expr, lenv, store)
