"""Text format of FJ_λ: parser and pretty-printer.

Type aliases (``type CpsFunc = ExCont => NmCont => void;``) are expanded while parsing
and kept on the program so the printer can fold expanded types back into their names.
Parsed programs come back indexed: every method, function and lambda has its ordinal,
and positions are those of the parsed text, so lambda display names follow its lines.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from ast_target import (
    BOOL_T,
    INT_T,
    VOID_T,
    Apply,
    Arrow,
    Assign,
    BaseType,
    BinOp,
    Const,
    Eval,
    FieldAccess,
    FieldDecl,
    FieldUpdate,
    IfElse,
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
    index_lambdas,
    rebuild,
    walk,
)
from ast_source import Pos
from runtime import FjobfError
from source_syntax import PRECEDENCE, format_const, negate, unescape_string

logger = logging.getLogger(__name__)

_GRAMMAR_PATH = Path(__file__).parent / 'grammars' / 'fjl.lark'


class TargetSyntaxError(FjobfError):
    def __init__(self, message, line=None, column=None):
        where = f' at {line}:{column}' if line is not None else ''
        super().__init__(f'{message}{where}')
        self.line = line
        self.column = column


_PARSER = None


def _parser():
    global _PARSER
    if _PARSER is None:
        _PARSER = Lark(
            _GRAMMAR_PATH.read_text(encoding='utf-8'),
            parser='earley',
            lexer='basic',
            start='start',
            propagate_positions=True,
            maybe_placeholders=False,
        )
    return _PARSER


def _pos(meta):
    if getattr(meta, 'empty', True):
        return None
    return Pos(meta.line, meta.column)


@dataclass(frozen=True)
class _AliasDecl:
    name: str
    type: object


@dataclass(frozen=True)
class _MethodBody:
    locals: tuple
    stmts: tuple


def _declared_locals(locals_, stmts):
    """Locals introduced by typed assignments (``T x = e;``) inside lambda bodies."""
    known = {decl.name for decl in locals_}
    extra = []
    for stmt in stmts:
        for node in walk(stmt):
            if isinstance(node, Assign) and node.declared is not None and node.target not in known:
                known.add(node.target)
                extra.append(LocalDecl(node.declared, node.target))
    for decl in locals_:
        if decl.init is None:
            continue
        for node in walk(decl.init):
            if isinstance(node, Assign) and node.declared is not None and node.target not in known:
                known.add(node.target)
                extra.append(LocalDecl(node.declared, node.target))
    return tuple(locals_) + tuple(extra)


class _ToAst(Transformer):
    def start(self, children):
        aliases, classes, functions = [], [], []
        for item in children:
            if isinstance(item, _AliasDecl):
                aliases.append(item)
            elif isinstance(item, TargetClass):
                classes.append(item)
            else:
                functions.append(item)
        table = {}
        resolved = []
        for decl in aliases:
            expansion = expand_aliases(decl.type, table)
            table[decl.name] = expansion
            resolved.append((decl.name, expansion))
        program = TargetProgram(tuple(classes), tuple(functions), tuple(resolved))
        return expand_aliases(program, table) if table else program

    def alias(self, children):
        name, type_ = children
        return _AliasDecl(str(name), type_)

    @v_args(meta=True)
    def class_decl(self, meta, children):
        name, members = children[0], children[1:]
        fields, methods = [], []
        for member in members:
            if isinstance(member, list):
                fields.extend(member)
            elif isinstance(member, FieldDecl):
                fields.append(member)
            else:
                methods.append(member)
        return TargetClass(str(name), tuple(fields), tuple(methods), _pos(meta))

    def field_decl(self, children):
        type_, *names = children
        return [FieldDecl(type_, str(n)) for n in names]

    def field_default(self, children):
        type_, name, value = children
        return FieldDecl(type_, str(name), value)

    def neg_int_lit(self, children):
        return Const(-int(children[1]))

    @v_args(meta=True)
    def method_decl(self, meta, children):
        ret, name, *rest = children
        body = rest[-1]
        params = rest[0] if len(rest) == 2 else ()
        locals_ = _declared_locals(body.locals, body.stmts)
        return TargetMethod(ret, str(name), params, locals_, body.stmts, _pos(meta))

    function_decl = method_decl

    def params(self, children):
        return tuple(children)

    def typed_param(self, children):
        type_, name = children
        return Param(type_, str(name))

    def method_body(self, children):
        locals_, stmts = [], []
        for item in children:
            if isinstance(item, list):
                locals_.extend(item)
            elif isinstance(item, LocalDecl):
                locals_.append(item)
            else:
                stmts.append(item)
        return _MethodBody(tuple(locals_), tuple(stmts))

    def local_decl(self, children):
        type_, *names = children
        return [LocalDecl(type_, str(n)) for n in names]

    def local_init(self, children):
        type_, name, init = children
        return LocalDecl(type_, str(name), init)

    # --- types ---

    def int_type(self, _):
        return INT_T

    def bool_type(self, _):
        return BOOL_T

    def void_type(self, _):
        return VOID_T

    def named_type(self, children):
        return BaseType(str(children[0]))

    def arrow_type(self, children):
        param, result = children
        return Arrow(param, result)

    # --- statements ---

    @v_args(meta=True)
    def assign(self, meta, children):
        target, expr = children
        return Assign(str(target), expr, _pos(meta))

    @v_args(meta=True)
    def typed_assign(self, meta, children):
        type_, target, expr = children
        return Assign(str(target), expr, _pos(meta), declared=type_)

    @v_args(meta=True)
    def field_update(self, meta, children):
        receiver, name, expr = children
        return FieldUpdate(receiver, str(name), expr, _pos(meta))

    @v_args(meta=True)
    def return_stmt(self, meta, children):
        return Return(children[0] if children else None, _pos(meta))

    @v_args(meta=True)
    def if_stmt(self, meta, children):
        cond, then_body, *rest = children
        return IfElse(cond, then_body, rest[0] if rest else (), _pos(meta))

    def stmt_block(self, children):
        return tuple(children)

    @v_args(meta=True)
    def print_stmt(self, meta, children):
        return Print(children[0], _pos(meta))

    @v_args(meta=True)
    def eval_stmt(self, meta, children):
        expr = children[0]
        if not isinstance(expr, (Apply, MethodCall)):
            raise TargetSyntaxError('only applications and method calls can stand as statements', meta.line, meta.column)
        return Eval(expr, _pos(meta))

    # --- lambdas ---

    @v_args(meta=True)
    def lambda_expr(self, meta, children):
        params, body = children
        return Lambda(params, body, _pos(meta))

    def bare_param(self, children):
        return (Param(None, str(children[0])),)

    def no_params(self, _):
        return ()

    def paren_params(self, children):
        return tuple(children)

    def lparam(self, children):
        if len(children) == 1:
            return Param(None, str(children[0]))
        type_, name = children
        return Param(type_, str(name))

    def block_body(self, children):
        return tuple(children)

    @v_args(meta=True)
    def expr_block_body(self, meta, children):
        return (Return(children[0], _pos(meta)),)

    expr_body = expr_block_body

    # --- expressions ---

    def binop(self, children):
        left, op, right = children
        return BinOp(str(op), left, right)

    def neg(self, children):
        return negate(children[1])

    def field_access(self, children):
        receiver, name = children
        return FieldAccess(receiver, str(name))

    def apply(self, children):
        fn, *rest = children
        return Apply(fn, tuple(rest[0]) if rest else ())

    def method_call(self, children):
        receiver, name, arg = children
        return MethodCall(receiver, str(name), arg)

    def args(self, children):
        return list(children)

    def var(self, children):
        return Var(str(children[0]))

    def this(self, _):
        return This()

    def new(self, children):
        return New(str(children[0]))

    def int_lit(self, children):
        return Const(int(children[0]))

    def true_lit(self, _):
        return Const(True)

    def false_lit(self, _):
        return Const(False)

    def null_lit(self, _):
        return Const(None)

    def string_lit(self, children):
        return Const(unescape_string(str(children[0])))


def expand_aliases(node, table):
    """Replace every alias name inside ``node`` by its expansion."""

    def expand(n):
        if isinstance(n, BaseType) and n.name in table:
            return table[n.name]
        return n

    return rebuild(node, expand)


def parse_target(text):
    """Parse FJ_λ text into an indexed TargetProgram."""
    try:
        tree = _parser().parse(text)
        program = _ToAst().transform(tree)
    except UnexpectedInput as exc:
        line = getattr(exc, 'line', None)
        column = getattr(exc, 'column', None)
        raise TargetSyntaxError('syntax error', line if line and line > 0 else None, column) from None
    except VisitError as exc:
        raise exc.orig_exc
    logger.debug(f'parsed {len(program.classes)} classes and {len(program.functions)} functions')
    return index_lambdas(program)


def reindex(program):
    """Round-trip through the printed text so positions match the printed listing."""
    return parse_target(print_target(program))


# --- Pretty-printing ---

ATOM = 10
LAMBDA = 0


def _alias_name(t, aliases):
    for name, expansion in aliases:
        if t == expansion:
            return name
    return None


def format_type(t, aliases=()):
    name = _alias_name(t, aliases)
    if name is not None:
        return name
    if isinstance(t, BaseType):
        return t.name
    left = format_type(t.param, aliases)
    if isinstance(t.param, Arrow) and _alias_name(t.param, aliases) is None:
        left = f'({left})'
    return f'{left} => {format_type(t.result, aliases)}'


def _prec(expr):
    if isinstance(expr, BinOp):
        return PRECEDENCE[expr.op]
    if isinstance(expr, Lambda):
        return LAMBDA
    if isinstance(expr, Const) and isinstance(expr.value, int) and not isinstance(expr.value, bool) and expr.value < 0:
        return 7
    return ATOM


class _TargetPrinter:
    def __init__(self, aliases=(), indent='    '):
        self.aliases = tuple(aliases)
        self.indent = indent

    def type(self, t):
        return format_type(t, self.aliases)

    def program(self, program):
        sections = []
        if program.aliases:
            lines = [
                f'type {name} = {format_type(expansion, program.aliases[:i])};'
                for i, (name, expansion) in enumerate(program.aliases)
            ]
            sections.append('\n'.join(lines))
        sections.extend(self.cls(cls) for cls in program.classes)
        sections.extend(self.method(fn, 0) for fn in program.functions)
        return '\n\n'.join(sections) + '\n'

    def cls(self, cls):
        lines = [f'class {cls.name} {{']
        for fd in cls.fields:
            default = f' = {format_const(fd.default.value)}' if fd.default is not None else ''
            lines.append(f'{self.indent}{self.type(fd.type)} {fd.name}{default};')
        lines.extend(self.method(md, 1) for md in cls.methods)
        lines.append('}')
        return '\n'.join(lines)

    def method(self, md, depth):
        pad = self.indent * depth
        params = ', '.join(f'{self.type(p.type)} {p.name}' for p in md.params)
        lines = [f'{pad}{self.type(md.return_type)} {md.name}({params}) {{']
        inner = self.indent * (depth + 1)
        for decl in md.locals:
            init = f' = {self.expr(decl.init, depth + 1)}' if decl.init is not None else ''
            lines.append(f'{inner}{self.type(decl.type)} {decl.name}{init};')
        lines.extend(self.stmt(s, depth + 1) for s in md.body)
        lines.append(f'{pad}}}')
        return '\n'.join(lines)

    def block(self, stmts, depth):
        if not stmts:
            return '{}'
        body = '\n'.join(self.stmt(s, depth + 1) for s in stmts)
        return f'{{\n{body}\n{self.indent * depth}}}'

    def stmt(self, s, depth):
        pad = self.indent * depth
        if isinstance(s, Assign):
            return f'{pad}{s.target} = {self.expr(s.expr, depth)};'
        if isinstance(s, FieldUpdate):
            return f'{pad}{self.operand(s.receiver, depth, ATOM)}.{s.field} = {self.expr(s.expr, depth)};'
        if isinstance(s, Return):
            return f'{pad}return;' if s.expr is None else f'{pad}return {self.expr(s.expr, depth)};'
        if isinstance(s, Print):
            return f'{pad}System.out.println({self.expr(s.expr, depth)});'
        if isinstance(s, Eval):
            return f'{pad}{self.expr(s.expr, depth)};'
        if isinstance(s, IfElse):
            text = f'{pad}if ({self.expr(s.cond, depth)}) {self.block(s.then_body, depth)}'
            if s.else_body:
                text += f' else {self.block(s.else_body, depth)}'
            return text
        raise TypeError(f'not a statement: {s!r}')

    def operand(self, expr, depth, needed):
        text = self.expr(expr, depth)
        return f'({text})' if _prec(expr) < needed else text

    def params(self, params):
        if len(params) == 1 and params[0].type is None:
            return params[0].name
        inner = ', '.join(p.name if p.type is None else f'{self.type(p.type)} {p.name}' for p in params)
        return f'({inner})'

    def expr(self, expr, depth):
        if isinstance(expr, Const):
            return format_const(expr.value)
        if isinstance(expr, Var):
            return expr.name
        if isinstance(expr, This):
            return 'this'
        if isinstance(expr, New):
            return f'new {expr.class_name}()'
        if isinstance(expr, FieldAccess):
            return f'{self.operand(expr.receiver, depth, ATOM)}.{expr.field}'
        if isinstance(expr, MethodCall):
            return f'{self.operand(expr.receiver, depth, ATOM)}.{expr.method}({self.expr(expr.arg, depth)})'
        if isinstance(expr, Apply):
            fn = self.expr(expr.fn, depth)
            if not isinstance(expr.fn, (Var, This, New, Const, Apply, MethodCall)):
                fn = f'({fn})'
            return f'{fn}({", ".join(self.expr(a, depth) for a in expr.args)})'
        if isinstance(expr, BinOp):
            prec = PRECEDENCE[expr.op]
            left = self.operand(expr.left, depth, prec)
            right = self.operand(expr.right, depth, prec + 1)
            return f'{left} {expr.op} {right}'
        if isinstance(expr, Lambda):
            head = self.params(expr.params)
            body = expr.body
            if len(body) == 1 and isinstance(body[0], Return) and body[0].expr is not None:
                return f'{head} -> {self.expr(body[0].expr, depth)}'
            return f'{head} -> {self.block(body, depth)}'
        raise TypeError(f'not an expression: {expr!r}')


def print_target(program):
    """Render a TargetProgram; `parse_target` reads the result back into an equal AST."""
    return _TargetPrinter(program.aliases).program(program)


def format_target_expr(expr, aliases=()):
    return _TargetPrinter(aliases).expr(expr, 0)

