"""SSAFJ-EH to FJ_λ: the CPS obfuscator.

Every block becomes a local continuation function of type ``CpsFunc``
(``ExCont => NmCont => void``) and control flow is rebuilt from the combinators
``seq``, ``ifelse``, ``loop`` and ``trycatch``. φ assignments move into small connector
functions that run when control passes from one block to the next.

The public method keeps its signature: it drives ``<m>_cps`` with ``id_raise`` as the
exception continuation and reads the result back from ``res``.
"""

import logging
from dataclasses import dataclass, field, replace

import ast_source as src
from ast_source import iter_blocks, label_number, label_order, method_identifiers, min_label
from ast_target import (
    CPS_FUNC,
    DEFAULT_ALIASES,
    EX_CONT,
    EXCEPTION_T,
    VOID_T,
    Apply,
    Assign,
    BaseType,
    BinOp,
    Const,
    Eval,
    FieldAccess,
    FieldDecl,
    FieldUpdate,
    FreshNames,
    Lambda,
    LocalDecl,
    MethodCall,
    New,
    Param,
    Print,
    Return,
    TargetClass,
    TargetMethod,
    TargetProgram,
    This,
    Var,
    arrow,
    rebuild,
    walk,
)
from flatten import flatten_program
from runtime import FjobfError
from target_syntax import parse_target, reindex

logger = logging.getLogger(__name__)

RESERVED_LOCALS = ('input', 'res', 'ex')
COMBINATORS = ('loop', 'seq', 'trycatch', 'ifelse')
ID_RAISE = 'id_raise'

PRELUDE = """\
type ExCont = Exception => void;
type NmCont = void => void;
type CpsFunc = ExCont => NmCont => void;

void id_raise(Exception e) {
    return;
}

CpsFunc loop(void => bool cond, CpsFunc visitor, CpsFunc exit) {
    return raise -> k -> {
        if (cond()) {
            NmCont => void visitor_raise = visitor(raise);
            NmCont nloop = n -> {
                CpsFunc ploop = loop(cond, visitor, exit);
                NmCont => void ploop_raise = ploop(raise);
                return ploop_raise(k);
            };
            return visitor_raise(nloop);
        } else {
            NmCont => void exit_raise = exit(raise);
            return exit_raise(k);
        }
    };
}

CpsFunc seq(CpsFunc first, CpsFunc second) {
    return raise -> k -> {
        NmCont => void first_raise = first(raise);
        NmCont n_second = n -> {
            NmCont => void second_raise = second(raise);
            return second_raise(k);
        };
        return first_raise(n_second);
    };
}

CpsFunc trycatch(CpsFunc tr, Exception => CpsFunc hdl) {
    return raise -> k -> {
        ExCont ex_hdl = ex -> {
            CpsFunc hdl_ex = hdl(ex);
            NmCont => void hdl_ex_raise = hdl_ex(raise);
            return hdl_ex_raise(k);
        };
        NmCont => void tr_hdl = tr(ex_hdl);
        return tr_hdl(k);
    };
}

CpsFunc ifelse(void => bool cond, CpsFunc th, CpsFunc el) {
    return raise -> k -> {
        if (cond()) {
            NmCont => void th_raise = th(raise);
            return th_raise(k);
        } else {
            NmCont => void el_raise = el(raise);
            return el_raise(k);
        }
    };
}
"""


class TranslationError(FjobfError):
    pass


def emit_prelude():
    """The combinators and ``id_raise`` as top-level functions, in a fixed order."""
    return parse_target(PRELUDE).functions


# --- Naming ---


@dataclass
class TransContext:
    method: str
    param: str
    names: FreshNames
    order: dict
    local_types: dict
    raise_name: str = 'raise'
    k_name: str = 'k'
    value_name: str = 'v'
    exn_name: str = 'exn'
    catch_vars: list = field(default_factory=list)

    def block_name(self, label):
        return self.names.take(f'{self.method}{label_number(label)}')

    def jump_name(self, label):
        return self.names.take(f'{self.method}k{label_number(label)}')


@dataclass(frozen=True)
class TransResult:
    decls: tuple
    main: object


# --- Expressions and assignments ---


def target_type(t):
    return BaseType(t.name)


def translate_expr(expr, ctx):
    if isinstance(expr, src.Const):
        return Const(expr.value)
    if isinstance(expr, src.Var):
        return Var('input' if expr.name == ctx.param else expr.name)
    if isinstance(expr, src.This):
        return This()
    if isinstance(expr, src.FieldAccess):
        return FieldAccess(translate_expr(expr.receiver, ctx), expr.field)
    if isinstance(expr, src.New):
        return New(expr.class_name)
    if isinstance(expr, src.BinOp):
        return BinOp(expr.op, translate_expr(expr.left, ctx), translate_expr(expr.right, ctx))
    raise TypeError(f'not an expression: {expr!r}')


def translate_assignment(a, ctx):
    if isinstance(a, src.VarAssign):
        return Assign(a.target, translate_expr(a.expr, ctx))
    if isinstance(a, src.FieldAssign):
        return FieldUpdate(translate_expr(a.receiver, ctx), a.field, translate_expr(a.expr, ctx))
    if isinstance(a, src.Print):
        return Print(translate_expr(a.expr, ctx))
    raise TypeError(f'not an assignment: {a!r}')


def _call(name, *args):
    return Apply(Var(name), tuple(args))


def _seq(first, second):
    return _call('seq', first, second)


def _cps_lambda(ctx, stmts):
    inner = Lambda((Param(None, ctx.k_name),), tuple(stmts))
    return Lambda((Param(None, ctx.raise_name),), (Return(inner),))


def _continue(ctx):
    return Return(Apply(Var(ctx.k_name), ()))


def _decl(name, init):
    return LocalDecl(CPS_FUNC, name, init)


# --- φ resolution and connectors ---


def resolve_phi_pairs(phis, label, ctx=None):
    """(target, operand) for each φ at ``label``, in φ order."""
    pairs = []
    for phi in phis:
        source = phi.operand_for(label)
        if source is None:
            raise TranslationError(f'φ {phi.target} has no operand for {label}')
        value = Var('input') if ctx is not None and source == ctx.param else Var(source)
        pairs.append((phi.target, value))
    return pairs


def _lenient_pairs(phis, label, ctx):
    named = [phi for phi in phis if phi.operand_for(label) is not None]
    if not named:
        return []
    if len(named) != len(phis):
        missing = ', '.join(phi.target for phi in phis if phi.operand_for(label) is None)
        raise TranslationError(f'{ctx.method}: no operand for {label} in φ of {missing}')
    return resolve_phi_pairs(phis, label, ctx)


def translate_jump(phis, label, ctx):
    """Connector ``mk_l`` performing the φ moves for ``label`` and then continuing."""
    pairs = _lenient_pairs(phis, label, ctx)
    name = ctx.jump_name(label)
    body = [Assign(target, value) for target, value in pairs] + [_continue(ctx)]
    return TransResult((_decl(name, _cps_lambda(ctx, body)),), Var(name))


# --- Blocks ---


def translate_blocks(blocks, phi_k, phi_r, ctx):
    """Declarations and main expression for a block list."""
    if not blocks:
        raise TranslationError(f'{ctx.method}: empty block list')
    head, rest = blocks[0], blocks[1:]
    label, body = head.label, head.body

    def tail():
        if rest:
            return translate_blocks(rest, phi_k, phi_r, ctx)
        return translate_jump(phi_k, label, ctx)

    if isinstance(body, src.IfElse):
        then_part = translate_blocks(body.then_blocks, body.join_phis, phi_r, ctx)
        else_part = translate_blocks(body.else_blocks, body.join_phis, phi_r, ctx)
        cond = Lambda((), (Return(translate_expr(body.cond, ctx)),))
        after = tail()
        main = _seq(_call('ifelse', cond, then_part.main, else_part.main), after.main)
        return TransResult(then_part.decls + else_part.decls + after.decls, main)

    if isinstance(body, src.While):
        try:
            entry_label = min_label(body.entry_phis, ctx.order)
        except src.MinLabelError as exc:
            raise TranslationError(f'{ctx.method} {label}: {exc}') from None
        entry = translate_jump(body.entry_phis, entry_label or label, ctx)
        cond = Lambda((), (Return(translate_expr(body.cond, ctx)),))
        loop_body = translate_blocks(body.body, body.entry_phis, phi_r, ctx)
        after = tail()
        main = _seq(entry.main, _call('loop', cond, loop_body.main, after.main))
        return TransResult(entry.decls + loop_body.decls + after.decls, main)

    if isinstance(body, src.TryCatch):
        tried = translate_blocks(body.try_blocks, body.join_phis, body.raise_phis, ctx)
        caught = translate_blocks(body.catch_blocks, body.join_phis, phi_r, ctx)
        if body.exn_var not in {name for name, _ in ctx.catch_vars}:
            ctx.catch_vars.append((body.exn_var, target_type(body.exn_type)))
        handler = Lambda(
            (Param(EXCEPTION_T, ctx.exn_name),),
            (
                Assign('ex', Var(ctx.exn_name)),
                Assign(body.exn_var, Var('ex')),
                Return(caught.main),
            ),
        )
        after = tail()
        main = _seq(_call('trycatch', tried.main, handler), after.main)
        return TransResult(tried.decls + caught.decls + after.decls, main)

    name = ctx.block_name(label)

    if isinstance(body, src.Throw):
        pairs = _lenient_pairs(phi_r, label, ctx)
        stmts = [Assign(t, v) for t, v in pairs]
        stmts.append(Return(Apply(Var(ctx.raise_name), (translate_expr(body.expr, ctx),))))
        return _chain(name, _cps_lambda(ctx, stmts), label, rest, phi_k, phi_r, ctx, connect=False)

    if isinstance(body, src.Return):
        stmts = [Assign('res', translate_expr(body.expr, ctx)), _continue(ctx)]
        return _chain(name, _cps_lambda(ctx, stmts), label, rest, phi_k, phi_r, ctx, connect=False)

    if isinstance(body, src.MethodCall):
        raise_arg = Var(ctx.raise_name)
        pairs = _lenient_pairs(phi_r, label, ctx)
        if pairs:
            moves = [Assign(t, v) for t, v in pairs]
            raise_arg = Lambda(
                (Param(EXCEPTION_T, ctx.exn_name),),
                tuple(moves) + (Return(Apply(Var(ctx.raise_name), (Var(ctx.exn_name),))),),
            )
        result_type = ctx.local_types.get(body.target)
        on_value = Lambda(
            (Param(result_type, ctx.value_name),),
            (Assign(body.target, Var(ctx.value_name)), _continue(ctx)),
        )
        started = MethodCall(translate_expr(body.receiver, ctx), f'{body.method}_cps', translate_expr(body.arg, ctx))
        call = Apply(Apply(started, (raise_arg,)), (on_value,))
        return _chain(name, _cps_lambda(ctx, [Return(call)]), label, rest, phi_k, phi_r, ctx, connect=True)

    if isinstance(body, src.Assigns):
        stmts = [translate_assignment(a, ctx) for a in body.assignments] + [_continue(ctx)]
        return _chain(name, _cps_lambda(ctx, stmts), label, rest, phi_k, phi_r, ctx, connect=True)

    raise TypeError(f'not a block body: {body!r}')


def _chain(name, fn, label, rest, phi_k, phi_r, ctx, connect):
    decls = (_decl(name, fn),)
    if rest:
        after = translate_blocks(rest, phi_k, phi_r, ctx)
        return TransResult(decls + after.decls, _seq(Var(name), after.main))
    if not connect:
        return TransResult(decls, Var(name))
    after = translate_jump(phi_k, label, ctx)
    return TransResult(decls + after.decls, _seq(Var(name), after.main))


# --- Methods and programs ---


def _check_names(cls_name, md, identifiers):
    clashes = sorted(identifiers & (set(RESERVED_LOCALS) | set(COMBINATORS) | {ID_RAISE}))
    if clashes:
        raise TranslationError(f'{cls_name}.{md.name}: identifiers reserved by the translation: {", ".join(clashes)}')


def translate_method(md, class_name=''):
    """The public wrapper for one source method.

    Its locals hold the translated declarations, the block functions and ``<m>_cps``
    (declared last, after every block function it refers to).
    """
    identifiers = method_identifiers(md)
    _check_names(class_name, md, identifiers)
    names = FreshNames(identifiers | set(RESERVED_LOCALS) | set(COMBINATORS) | {ID_RAISE, 'this'})
    ctx = TransContext(
        method=md.name,
        param=md.param,
        names=names,
        order=label_order(md),
        local_types={d.name: target_type(d.type) for d in md.locals},
    )
    ctx.raise_name = names.take('raise')
    ctx.k_name = names.take('k')
    ctx.value_name = names.take('v')
    ctx.exn_name = names.take('exn')
    in_name = names.take('in')
    r_name = names.take('r')
    cps_name = names.take(f'{md.name}_cps')

    result = translate_blocks(md.body, (), (), ctx)

    param_t = target_type(md.param_type)
    return_t = target_type(md.return_type)
    result_k = arrow(return_t, VOID_T)
    driven = Apply(Apply(result.main, (Var(ctx.raise_name),)), (Lambda((), (Return(Apply(Var(ctx.k_name), (Var('res'),))),)),))
    cps_init = Lambda(
        (Param(param_t, in_name),),
        (Return(Lambda(
            (Param(EX_CONT, ctx.raise_name),),
            (Return(Lambda(
                (Param(result_k, ctx.k_name),),
                (Assign('input', Var(in_name)), Return(driven)),
            )),),
        )),),
    )

    locals_ = [LocalDecl(target_type(d.type), d.name) for d in md.locals]
    declared = {d.name for d in md.locals}
    for name, type_ in (('input', param_t), ('res', return_t), ('ex', EXCEPTION_T)):
        locals_.append(LocalDecl(type_, name))
        declared.add(name)
    for var, type_ in ctx.catch_vars:
        if var not in declared:
            locals_.append(LocalDecl(type_, var))
            declared.add(var)
    locals_.extend(result.decls)
    locals_.append(LocalDecl(arrow(param_t, EX_CONT, result_k, VOID_T), cps_name, cps_init))

    final_k = Lambda((Param(None, r_name),), (Assign('res', Var(r_name)), Return(None)))
    run = Apply(Apply(Apply(Var(cps_name), (Var(md.param),)), (Var(ID_RAISE),)), (final_k,))
    body = (Eval(run), Return(Var('res')))
    wrapper = TargetMethod(return_t, md.name, (Param(param_t, md.param),), tuple(locals_), body)
    logger.debug(f'translated {class_name}.{md.name}: {len(result.decls)} continuation functions')
    return wrapper


def cps_entry_method(wrapper):
    """``<m>_cps(T in)``: a fresh activation of the wrapper's locals returning its CPS function.

    Method-call blocks of other methods invoke this entry instead of the wrapper so the
    callee runs under the caller's continuations.
    """
    cps_local = wrapper.locals[-1]
    param_t = wrapper.params[0].type
    taken = {d.name for d in wrapper.locals} | {p.name for p in wrapper.params}
    in_name = FreshNames(taken).take('in')
    return TargetMethod(
        return_type=cps_local.type.result,
        name=f'{wrapper.name}_cps',
        params=(Param(param_t, in_name),),
        locals=wrapper.locals,
        body=(Return(Apply(Var(cps_local.name), (Var(in_name),))),),
    )


def called_methods(program):
    """Names of every method some block invokes."""
    return {
        block.body.method
        for cls in program.classes
        for md in cls.methods
        for block in iter_blocks(md.body)
        if isinstance(block.body, src.MethodCall)
    }


def translate_program(program, flatten=True, prelude=True):
    """Obfuscate a validated, preprocessed source program.

    The result is re-read from its own listing, so positions and lambda display names
    match the text ``print_target`` produces for it.
    """
    called = called_methods(program)
    classes = []
    for cls in program.classes:
        methods = []
        entries = []
        for md in cls.methods:
            wrapper = translate_method(md, cls.name)
            methods.append(wrapper)
            if md.name in called:
                if cls.method(f'{md.name}_cps') is not None:
                    raise TranslationError(f'{cls.name} already declares {md.name}_cps')
                entries.append(cps_entry_method(wrapper))
        fields = tuple(
            FieldDecl(target_type(fd.type), fd.name, Const(fd.default.value) if fd.default is not None else None)
            for fd in cls.fields
        )
        classes.append(TargetClass(cls.name, fields, tuple(methods + entries)))
    target = TargetProgram(tuple(classes), tuple(emit_prelude()) if prelude else (), DEFAULT_ALIASES)
    if flatten:
        target = flatten_program(target)
    return reindex(target)


# --- Checks and fault injection ---

_COMBINATOR_ARITY = {'loop': 3, 'seq': 2, 'trycatch': 2, 'ifelse': 3, ID_RAISE: 1}


def check_cps_shapes(program):
    """Structural problems in an obfuscated program; an empty list means none.

    Every block function must be ``raise -> k -> {...}``, each ``<m>_cps`` must take
    one input and return such a function, and every combinator call must pass the
    combinator's exact number of arguments.
    """
    problems = []
    for cls in program.classes:
        for md in cls.methods:
            where = f'{cls.name}.{md.name}'
            for decl in md.locals:
                if decl.init is None or not isinstance(decl.init, Lambda):
                    continue
                if decl.type == CPS_FUNC and not _is_cps_function(decl.init):
                    problems.append(f'{where}: {decl.name} is not of the form raise -> k -> {{...}}')
                elif decl.name == f'{md.name}_cps' or decl.name.startswith(f'{md.name}_cps_'):
                    inner = _single_return(decl.init)
                    if len(decl.init.params) != 1 or not _is_cps_function(inner):
                        problems.append(f'{where}: {decl.name} does not return a CPS function')
            for node in _method_nodes(md):
                if isinstance(node, Apply) and isinstance(node.fn, Var) and node.fn.name in _COMBINATOR_ARITY:
                    expected = _COMBINATOR_ARITY[node.fn.name]
                    if program.function(node.fn.name) is not None and len(node.args) != expected:
                        problems.append(
                            f'{where}: {node.fn.name} applied to {len(node.args)} arguments, expected {expected}'
                        )
    return problems


def _single_return(fn):
    if isinstance(fn, Lambda) and len(fn.body) == 1 and isinstance(fn.body[0], Return):
        return fn.body[0].expr
    return None


def _is_cps_function(fn):
    if not isinstance(fn, Lambda) or len(fn.params) != 1:
        return False
    inner = _single_return(fn)
    return isinstance(inner, Lambda) and len(inner.params) == 1


def _method_nodes(md):
    for decl in md.locals:
        if decl.init is not None:
            yield from walk(decl.init)
    for stmt in md.body:
        yield from walk(stmt)


def plant_fault(program):
    """Copy of ``program`` whose first return-block function stores null in ``res``.

    Used to show the differential check catches a broken translation.
    """
    planted = False

    def mutate(node):
        nonlocal planted
        if planted or not isinstance(node, Assign) or node.target != 'res':
            return node
        planted = True
        return replace(node, expr=Const(None))

    classes = []
    for cls in program.classes:
        methods = []
        for md in cls.methods:
            locals_ = []
            for decl in md.locals:
                if not planted and decl.init is not None and decl.type == CPS_FUNC:
                    decl = replace(decl, init=rebuild(decl.init, mutate))
                locals_.append(decl)
            methods.append(replace(md, locals=tuple(locals_)))
        classes.append(replace(cls, methods=tuple(methods)))
    if not planted:
        raise TranslationError('no return block to mutate')
    return replace(program, classes=tuple(classes))
