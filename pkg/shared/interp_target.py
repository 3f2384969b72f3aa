"""Interpreter for FJ_λ.

Closures capture their defining environment. Lambda formals live in a scope created
per application and chained to the closure's environment; every other name a method or
function body assigns lives in the single frame of that activation, so continuations
created inside the activation share its locals. An assignment updates the nearest scope
that declares the name and falls back to the frame.

Top-level functions are values too: a free name that is neither bound nor a local
resolves to the function of that name.

An optional observer sees every binding of a callable value and every call edge; the
soundness suites use it to check the flow analyses against concrete runs.
"""

import itertools
import logging
from dataclasses import dataclass, field

from ast_target import (
    Apply,
    Assign,
    BinOp,
    Const,
    Eval,
    FieldAccess,
    FieldUpdate,
    IfElse,
    Lambda,
    MethodCall,
    New,
    Print,
    Return,
    This,
    Var,
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

_frame_ids = itertools.count(1)


@dataclass(eq=False)
class Frame:
    """Locals of one method or function activation."""

    owner: object
    receiver: object = None
    bindings: dict = field(default_factory=dict)
    frame_id: int = field(default_factory=lambda: next(_frame_ids))

    @property
    def lid(self):
        return self.owner.lid


@dataclass(eq=False)
class Scope:
    """Formals of one lambda application."""

    code: Lambda
    bindings: dict
    parent: object

    @property
    def lid(self):
        return self.code.lid


@dataclass(eq=False)
class Closure:
    code: Lambda
    env: object

    @property
    def lid(self):
        return self.code.lid

    def __str__(self):
        return f'<closure #{self.code.lid}>'


@dataclass(eq=False)
class FunctionRef:
    fn: object

    @property
    def lid(self):
        return self.fn.lid

    def __str__(self):
        return f'<function {self.fn.name}>'


def frame_of(env):
    while isinstance(env, Scope):
        env = env.parent
    return env


class Observer:
    """No-op hooks; subclass to watch an evaluation."""

    def on_bind(self, scope_lid, name, value):
        pass

    def on_call(self, caller_lid, callee_lid, args):
        pass


class _Returned(Exception):
    pass


class TargetInterpreter:
    def __init__(self, program, budget=None, effects=None, observer=None):
        self.program = program
        self.classes = {c.name: c for c in program.classes}
        self.functions = {fn.name: FunctionRef(fn) for fn in program.functions}
        self.budget = budget or StepBudget(1_000_000)
        self.effects = effects or Effects()
        self.observer = observer or Observer()

    # --- heap ---

    def instantiate(self, store, class_name):
        cls = self.classes.get(class_name)
        if cls is None:
            if class_name == EXCEPTION_CLASS:
                return store.allocate(class_name, {})
            raise EvalError(f'unknown class {class_name!r}')
        defaults = {fd.name: (fd.default.value if fd.default is not None else None) for fd in cls.fields}
        return store.allocate(class_name, defaults)

    def method(self, store, receiver, name):
        class_name = store.get(receiver).class_name
        cls = self.classes.get(class_name)
        md = cls.method(name) if cls is not None else None
        if md is None:
            raise EvalError(f'{class_name} has no method {name!r}')
        return md

    # --- activations ---

    def eval_t_method(self, md, receiver, arg, store):
        """Run a class method on ``receiver``; returns (value, store)."""
        return self.activate(md, receiver, [arg], store), store

    def call_function(self, fn, args, store):
        return self.activate(fn, None, list(args), store)

    def activate(self, md, receiver, args, store):
        if len(args) != len(md.params):
            if not (len(md.params) == 1 and not args):
                raise EvalError(f'{md.name} expects {len(md.params)} arguments, got {len(args)}')
            args = [None]
        frame = Frame(md, receiver)
        frame.bindings.update({decl.name: None for decl in md.locals})
        for param, value in zip(md.params, args):
            self._bind(frame, param.name, value)
        for decl in md.locals:
            if decl.init is not None:
                self._bind(frame, decl.name, self.eval_t_expr(decl.init, frame, store))
        return self._run_body(md.body, frame, store)

    def apply(self, fn, args, store, caller_lid=None):
        if isinstance(fn, FunctionRef):
            self.observer.on_call(caller_lid, fn.lid, args)
            return self.call_function(fn.fn, args, store)
        if not isinstance(fn, Closure):
            raise EvalError(f'cannot apply {render_value(fn, store)}')
        self.observer.on_call(caller_lid, fn.lid, args)
        params = fn.code.params
        if len(args) != len(params):
            if not (len(params) == 1 and not args):
                raise EvalError(f'closure #{fn.lid} expects {len(params)} arguments, got {len(args)}')
            args = [None]
        scope = Scope(fn.code, {}, fn.env)
        for param, value in zip(params, args):
            self._bind(scope, param.name, value)
        return self._run_body(fn.code.body, scope, store)

    def _run_body(self, stmts, env, store):
        try:
            self.eval_t_stmts(stmts, env, store)
        except _Returned as ret:
            return ret.args[0]
        return None

    # --- statements ---

    def eval_t_stmts(self, stmts, env, store):
        """Execute statements in ``env``; a return unwinds to the enclosing body."""
        for stmt in stmts:
            self.eval_t_stmt(stmt, env, store)

    def eval_t_stmt(self, stmt, env, store):
        self.budget.tick()
        if isinstance(stmt, Assign):
            self.assign(env, stmt.target, self.eval_t_expr(stmt.expr, env, store))
        elif isinstance(stmt, FieldUpdate):
            receiver = self.eval_t_expr(stmt.receiver, env, store)
            store.write_field(receiver, stmt.field, self.eval_t_expr(stmt.expr, env, store))
        elif isinstance(stmt, Return):
            raise _Returned(None if stmt.expr is None else self.eval_t_expr(stmt.expr, env, store))
        elif isinstance(stmt, IfElse):
            cond = self.eval_t_expr(stmt.cond, env, store)
            if not isinstance(cond, bool):
                raise EvalError(f'if condition is {render_value(cond, store)}, not a boolean')
            self.eval_t_stmts(stmt.then_body if cond else stmt.else_body, env, store)
        elif isinstance(stmt, Print):
            self.effects.emit(render_value(self.eval_t_expr(stmt.expr, env, store), store))
        elif isinstance(stmt, Eval):
            self.eval_t_expr(stmt.expr, env, store)
        else:
            raise TypeError(f'not a statement: {stmt!r}')

    # --- expressions ---

    def eval_t_expr(self, expr, env, store):
        if isinstance(expr, Const):
            return expr.value
        if isinstance(expr, Var):
            return self.lookup(env, expr.name)
        if isinstance(expr, This):
            return frame_of(env).receiver
        if isinstance(expr, Lambda):
            return Closure(expr, env)
        if isinstance(expr, Apply):
            fn = self.eval_t_expr(expr.fn, env, store)
            args = [self.eval_t_expr(a, env, store) for a in expr.args]
            return self.apply(fn, args, store, env.lid)
        if isinstance(expr, MethodCall):
            receiver = self.eval_t_expr(expr.receiver, env, store)
            arg = self.eval_t_expr(expr.arg, env, store)
            md = self.method(store, receiver, expr.method)
            self.observer.on_call(env.lid, md.lid, [arg])
            value, _ = self.eval_t_method(md, receiver, arg, store)
            return value
        if isinstance(expr, FieldAccess):
            return store.read_field(self.eval_t_expr(expr.receiver, env, store), expr.field)
        if isinstance(expr, New):
            return self.instantiate(store, expr.class_name)
        if isinstance(expr, BinOp):
            left = self.eval_t_expr(expr.left, env, store)
            right = self.eval_t_expr(expr.right, env, store)
            return apply_operator(expr.op, left, right, store)
        raise TypeError(f'not an expression: {expr!r}')

    # --- names ---

    def lookup(self, env, name):
        scope = env
        while isinstance(scope, Scope):
            if name in scope.bindings:
                return scope.bindings[name]
            scope = scope.parent
        if name in scope.bindings:
            return scope.bindings[name]
        if name in self.functions:
            return self.functions[name]
        raise EvalError(f'unbound variable {name!r}')

    def assign(self, env, name, value):
        scope = env
        while isinstance(scope, Scope):
            if name in scope.bindings:
                self._bind(scope, name, value)
                return
            scope = scope.parent
        self._bind(scope, name, value)

    def _bind(self, scope, name, value):
        scope.bindings[name] = value
        if isinstance(value, (Closure, FunctionRef)):
            self.observer.on_bind(scope.lid, name, value)


def eval_t_method(program, md, receiver, arg, store, budget=None, effects=None, observer=None,
                  recursion_limit=200_000):
    interpreter = TargetInterpreter(program, budget, effects, observer)
    with deep_recursion(recursion_limit):
        return interpreter.eval_t_method(md, receiver, arg, store)


def eval_t_stmts(program, stmts, env, store, budget=None, effects=None):
    """Run a statement list in ``env``; returns (value, store), value None if nothing returned."""
    interpreter = TargetInterpreter(program, budget, effects)
    try:
        interpreter.eval_t_stmts(stmts, env, store)
    except _Returned as ret:
        return ret.args[0], store
    return None, store


def eval_t_expr(program, expr, env, store):
    return TargetInterpreter(program).eval_t_expr(expr, env, store)
