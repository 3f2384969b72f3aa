"""Flattening of nested and curried applications.

``r = f(x)(g(y));`` becomes::

    f_x = f(x);
    g_y = g(y);
    r = f_x(g_y);

Each statement keeps its outermost application; everything nested inside it (inner
applications, method calls and lambda literals passed as arguments) is hoisted into an
assignment to a fresh method local, inside-out and left to right. Lambda bodies are
flattened recursively, and hoisting never moves code out of an ``if`` arm.
"""

import logging
from dataclasses import replace

from ast_target import (
    VAR_T,
    Apply,
    Arrow,
    Assign,
    BinOp,
    Const,
    Eval,
    FieldAccess,
    FieldUpdate,
    FreshNames,
    IfElse,
    Lambda,
    LocalDecl,
    MethodCall,
    Param,
    Print,
    Return,
    This,
    Var,
    function_type,
    peel,
    walk,
)

logger = logging.getLogger(__name__)

MAX_NAME = 40


def _param_type(t, index):
    for _ in range(index):
        if not isinstance(t, Arrow):
            return None
        t = t.result
    return t.param if isinstance(t, Arrow) else None


def _label(expr):
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, This):
        return 'this'
    if isinstance(expr, Const):
        if expr.value is None:
            return 'null'
        if isinstance(expr.value, bool):
            return 'true' if expr.value else 'false'
        if isinstance(expr.value, int) and expr.value >= 0:
            return str(expr.value)
        return 'c'
    return 'e'


def _taken_names(md, program):
    taken = {'this', *(fn.name for fn in program.functions)}
    taken.update(p.name for p in md.params)
    taken.update(d.name for d in md.locals)
    roots = [d.init for d in md.locals if d.init is not None] + list(md.body)
    for root in roots:
        for node in walk(root):
            if isinstance(node, Var):
                taken.add(node.name)
            elif isinstance(node, Assign):
                taken.add(node.target)
            elif isinstance(node, Param):
                taken.add(node.name)
    return taken


class _Flattener:
    def __init__(self, md, program):
        self.md = md
        self.function_params = {fn.name: fn.params for fn in program.functions}
        self.types = {fn.name: fn.type for fn in program.functions}
        self.types.update({p.name: p.type for p in md.params if p.type is not None})
        self.types.update({d.name: d.type for d in md.locals})
        self.method_types = {
            m.name: m.return_type for cls in program.classes for m in cls.methods
        }
        self.names = FreshNames(_taken_names(md, program))
        self.new_locals = []

    def method(self):
        locals_ = []
        for decl in self.md.locals:
            if isinstance(decl.init, Lambda):
                decl = replace(decl, init=self.lam(decl.init))
            locals_.append(decl)
        body = self.stmts(self.md.body)
        if not self.new_locals:
            return replace(self.md, locals=tuple(locals_), body=body)
        logger.debug(f'{self.md.name}: hoisted {len(self.new_locals)} applications')
        return replace(self.md, locals=tuple(locals_) + tuple(self.new_locals), body=body)

    # --- statements ---

    def stmts(self, stmts):
        out = []
        for stmt in stmts:
            pre = []
            if isinstance(stmt, Assign):
                stmt = replace(stmt, expr=self.top(stmt.expr, pre))
            elif isinstance(stmt, Return) and stmt.expr is not None:
                stmt = replace(stmt, expr=self.top(stmt.expr, pre))
            elif isinstance(stmt, Eval):
                stmt = replace(stmt, expr=self.top(stmt.expr, pre))
            elif isinstance(stmt, Print):
                stmt = replace(stmt, expr=self.top(stmt.expr, pre))
            elif isinstance(stmt, FieldUpdate):
                receiver = self.atom(stmt.receiver, pre)
                stmt = replace(stmt, receiver=receiver, expr=self.top(stmt.expr, pre))
            elif isinstance(stmt, IfElse):
                stmt = replace(
                    stmt,
                    cond=self.top(stmt.cond, pre),
                    then_body=self.stmts(stmt.then_body),
                    else_body=self.stmts(stmt.else_body),
                )
            out.extend(pre)
            out.append(stmt)
        return tuple(out)

    # --- expressions ---

    def top(self, expr, pre):
        """``expr`` with its own application kept and everything below it hoisted."""
        if isinstance(expr, Lambda):
            return self.lam(expr)
        if isinstance(expr, Apply):
            return self.application(expr, pre)
        if isinstance(expr, MethodCall):
            receiver = self.atom(expr.receiver, pre)
            return replace(expr, receiver=receiver, arg=self.atom(expr.arg, pre))
        return self.inner(expr, pre)

    def application(self, expr, pre):
        fn = self.atom(expr.fn, pre)
        callee = _label(fn)
        fn_type = self.type_of(fn)
        params = self.function_params.get(fn.name) if isinstance(fn, Var) else None
        args = []
        for i, arg in enumerate(expr.args):
            if params is not None and i < len(params):
                hint = f'{callee}_{params[i].name}'
            else:
                hint = f'{callee}_fn'
            args.append(self.atom(arg, pre, hint, _param_type(fn_type, i)))
        return Apply(fn, tuple(args))

    def atom(self, expr, pre, hint='fn', type_hint=None):
        """An application-free stand-in for ``expr``; applications and lambdas get names."""
        if isinstance(expr, (Apply, MethodCall)):
            flat = self.top(expr, pre)
            name = self.names.take(self._app_name(flat))
            self._declare(name, self.type_of(flat))
            pre.append(Assign(name, flat))
            return Var(name)
        if isinstance(expr, Lambda):
            flat = self.lam(expr)
            name = self.names.take(hint)
            self._declare(name, type_hint or function_type(flat.params, VAR_T))
            pre.append(Assign(name, flat))
            return Var(name)
        return self.inner(expr, pre)

    def inner(self, expr, pre):
        if isinstance(expr, BinOp):
            return replace(expr, left=self.atom(expr.left, pre), right=self.atom(expr.right, pre))
        if isinstance(expr, FieldAccess):
            return replace(expr, receiver=self.atom(expr.receiver, pre))
        return expr

    def lam(self, expr):
        saved = dict(self.types)
        self.types.update({p.name: p.type for p in expr.params if p.type is not None})
        try:
            return replace(expr, body=self.stmts(expr.body))
        finally:
            self.types = saved

    # --- names and types ---

    def _app_name(self, app):
        if isinstance(app, MethodCall):
            name = f'{_label(app.receiver)}_{app.method}_{_label(app.arg)}'
        elif app.args:
            name = '_'.join([_label(app.fn)] + [_label(a) for a in app.args])
        else:
            name = f'{_label(app.fn)}_call'
        if len(name) > MAX_NAME:
            head = _label(app.fn) if isinstance(app, Apply) else app.method
            name = f'{head}_app'
        return name

    def _declare(self, name, type_):
        self.types[name] = type_
        self.new_locals.append(LocalDecl(type_ or VAR_T, name))

    def type_of(self, expr):
        if isinstance(expr, Var):
            return self.types.get(expr.name)
        if isinstance(expr, Apply):
            return peel(self.type_of(expr.fn), max(len(expr.args), 1))
        if isinstance(expr, MethodCall):
            return self.method_types.get(expr.method)
        if isinstance(expr, Lambda):
            return function_type(expr.params, VAR_T)
        return None


def flatten(md, program):
    """Flattened copy of one method; ``program`` supplies function and method types."""
    return _Flattener(md, program).method()


def flatten_program(program):
    """Flatten every class method; top-level functions are left as written."""
    classes = []
    for cls in program.classes:
        methods = tuple(flatten(md, program) for md in cls.methods)
        classes.append(replace(cls, methods=methods))
    return replace(program, classes=tuple(classes))
