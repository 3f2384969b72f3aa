"""Text format of SSAFJ-EH: parser and pretty-printer.

The grammar lives in grammars/ssafj.lark and follows the listing style of the worked
FibGen example (`Ln:` label prefixes, `join { x = phi(L1:a, L2:b) }` clauses).
`print_source` emits text that `parse_source` turns back into an equal AST.
"""

import logging
import re
from pathlib import Path

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from ast_source import (
    BOOL,
    INT,
    VOID,
    Assigns,
    BinOp,
    Block,
    Const,
    FieldAccess,
    FieldAssign,
    FieldDecl,
    IfElse,
    LocalDecl,
    MethodCall,
    New,
    Phi,
    Pos,
    Print,
    Return,
    SourceClass,
    SourceMethod,
    SourceProgram,
    This,
    Throw,
    TryCatch,
    TypeName,
    Var,
    VarAssign,
    While,
    iter_blocks,
)
from runtime import FjobfError

logger = logging.getLogger(__name__)

_GRAMMAR_PATH = Path(__file__).parent / 'grammars' / 'ssafj.lark'


class SourceSyntaxError(FjobfError):
    def __init__(self, message, line=None, column=None):
        where = f' at {line}:{column}' if line is not None else ''
        super().__init__(f'{message}{where}')
        self.line = line
        self.column = column


class DuplicateLabelError(SourceSyntaxError):
    pass


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


_ESCAPES = {'n': '\n', 't': '\t', 'r': '\r', '"': '"', '\\': '\\'}


def unescape_string(token):
    return re.sub(r'\\(.)', lambda m: _ESCAPES.get(m.group(1), m.group(1)), token[1:-1])


def escape_string(text):
    out = text.replace('\\', '\\\\').replace('"', '\\"')
    return '"' + out.replace('\n', '\\n').replace('\t', '\\t').replace('\r', '\\r') + '"'


def _pos(meta):
    if getattr(meta, 'empty', True):
        return None
    return Pos(meta.line, meta.column)


def negate(expr):
    if isinstance(expr, Const) and isinstance(expr.value, int) and not isinstance(expr.value, bool):
        return Const(-expr.value)
    return BinOp('-', Const(0), expr)


class _ToAst(Transformer):
    def start(self, children):
        return SourceProgram(tuple(children))

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
        return SourceClass(str(name), tuple(fields), tuple(methods), _pos(meta))

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
        ret, name, ptype, param, *items = children
        locals_, blocks = [], []
        for item in items:
            if isinstance(item, list):
                locals_.extend(item)
            else:
                blocks.append(item)
        return SourceMethod(ret, str(name), ptype, str(param), tuple(locals_), tuple(blocks), _pos(meta))

    def local_decl(self, children):
        type_, *names = children
        return [LocalDecl(type_, str(n)) for n in names]

    def int_type(self, _):
        return INT

    def bool_type(self, _):
        return BOOL

    def void_type(self, _):
        return VOID

    def class_type(self, children):
        return TypeName(str(children[0]))

    # --- blocks ---

    def block(self, children):
        label, body = children
        return Block(str(label), body, Pos(label.line, label.column))

    def region(self, children):
        return tuple(children)

    def assigns(self, children):
        return Assigns(tuple(children))

    braced_assigns = assigns

    def return_body(self, children):
        return Return(children[0])

    def throw_body(self, children):
        return Throw(children[0])

    def call_body(self, children):
        target, receiver, method, arg = children
        return MethodCall(str(target), receiver, str(method), arg)

    def try_body(self, children):
        try_blocks, raise_phis, exn_type, exn_var, catch_blocks, join_phis = children
        return TryCatch(try_blocks, raise_phis, exn_type, str(exn_var), catch_blocks, join_phis)

    def while_body(self, children):
        entry_phis, cond, body = children
        return While(entry_phis, cond, body)

    def if_body(self, children):
        cond, then_blocks, else_blocks, join_phis = children
        return IfElse(cond, then_blocks, else_blocks, join_phis)

    def join(self, children):
        return tuple(children)

    @v_args(meta=True)
    def phi(self, meta, children):
        target, *operands = children
        return Phi(str(target), tuple(operands), _pos(meta))

    def phi_operand(self, children):
        label, name = children
        return (str(label), str(name))

    def var_assign(self, children):
        target, expr = children
        return VarAssign(str(target), expr)

    def field_assign(self, children):
        receiver, name, expr = children
        return FieldAssign(receiver, str(name), expr)

    def print_stmt(self, children):
        return Print(children[0])

    # --- expressions ---

    def binop(self, children):
        left, op, right = children
        return BinOp(str(op), left, right)

    def neg(self, children):
        return negate(children[1])

    def field_access(self, children):
        receiver, name = children
        return FieldAccess(receiver, str(name))

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


def parse_source(text):
    """Parse SSAFJ-EH text into a SourceProgram, rejecting duplicate labels."""
    try:
        tree = _parser().parse(text)
        program = _ToAst().transform(tree)
    except UnexpectedInput as exc:
        line = getattr(exc, 'line', None)
        column = getattr(exc, 'column', None)
        raise SourceSyntaxError('syntax error', line if line and line > 0 else None, column) from None
    except VisitError as exc:
        raise exc.orig_exc
    for cls in program.classes:
        for md in cls.methods:
            seen = set()
            for block in iter_blocks(md.body):
                if block.label in seen:
                    pos = block.pos
                    raise DuplicateLabelError(
                        f'label {block.label} appears twice in {cls.name}.{md.name}',
                        pos.line if pos else None, pos.column if pos else None,
                    )
                seen.add(block.label)
    logger.debug(f'parsed {len(program.classes)} classes')
    return program


# --- Pretty-printing ---

PRECEDENCE = {
    '||': 1, '&&': 2, '==': 3, '!=': 3,
    '<': 4, '>': 4, '<=': 4, '>=': 4,
    '+': 5, '-': 5, '*': 6, '/': 6, '%': 6,
}
ATOM = 10


def format_const(value):
    if value is None:
        return 'null'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, str):
        return escape_string(value)
    return str(value)


def _prec(expr):
    if isinstance(expr, BinOp):
        return PRECEDENCE[expr.op]
    if isinstance(expr, Const) and isinstance(expr.value, int) and not isinstance(expr.value, bool) and expr.value < 0:
        return 7
    return ATOM


def format_expr(expr):
    if isinstance(expr, Const):
        return format_const(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, This):
        return 'this'
    if isinstance(expr, New):
        return f'new {expr.class_name}()'
    if isinstance(expr, FieldAccess):
        recv = format_expr(expr.receiver)
        if _prec(expr.receiver) < ATOM:
            recv = f'({recv})'
        return f'{recv}.{expr.field}'
    if isinstance(expr, BinOp):
        prec = PRECEDENCE[expr.op]
        left, right = format_expr(expr.left), format_expr(expr.right)
        if _prec(expr.left) < prec:
            left = f'({left})'
        if _prec(expr.right) <= prec:
            right = f'({right})'
        return f'{left} {expr.op} {right}'
    raise TypeError(f'not an expression: {expr!r}')


def format_assignment(a):
    if isinstance(a, VarAssign):
        return f'{a.target} = {format_expr(a.expr)};'
    if isinstance(a, FieldAssign):
        recv = format_expr(a.receiver)
        if _prec(a.receiver) < ATOM:
            recv = f'({recv})'
        return f'{recv}.{a.field} = {format_expr(a.expr)};'
    return f'System.out.println({format_expr(a.expr)});'


def format_phis(phis):
    inner = '; '.join(
        f'{phi.target} = phi({", ".join(f"{label}:{name}" for label, name in phi.operands)})' for phi in phis
    )
    return f'join {{{inner}}}'


class _SourcePrinter:
    def __init__(self, indent='    '):
        self.indent = indent
        self.lines = []

    def emit(self, depth, text):
        self.lines.append(f'{self.indent * depth}{text}')

    def program(self, program):
        for i, cls in enumerate(program.classes):
            if i:
                self.lines.append('')
            self.cls(cls)
        return '\n'.join(self.lines) + '\n'

    def cls(self, cls):
        self.emit(0, f'class {cls.name} {{')
        for fd in cls.fields:
            default = f' = {format_const(fd.default.value)}' if fd.default is not None else ''
            self.emit(1, f'{fd.type} {fd.name}{default};')
        for md in cls.methods:
            self.method(md)
        self.emit(0, '}')

    def method(self, md):
        self.emit(1, f'{md.return_type} {md.name}({md.param_type} {md.param}) {{')
        for decl in md.locals:
            self.emit(2, f'{decl.type} {decl.name};')
        self.blocks(md.body, 2)
        self.emit(1, '}')

    def blocks(self, blocks, depth):
        for block in blocks:
            self.block(block, depth)

    def block(self, block, depth):
        head = f'{block.label}: '
        body = block.body
        if isinstance(body, Assigns):
            if not body.assignments:
                self.emit(depth, f'{head}{{ }}')
                return
            pad = ' ' * len(head)
            for i, a in enumerate(body.assignments):
                self.emit(depth, f'{head if i == 0 else pad}{format_assignment(a)}')
        elif isinstance(body, Return):
            self.emit(depth, f'{head}return {format_expr(body.expr)};')
        elif isinstance(body, Throw):
            self.emit(depth, f'{head}throw {format_expr(body.expr)};')
        elif isinstance(body, MethodCall):
            recv = format_expr(body.receiver)
            if _prec(body.receiver) < ATOM:
                recv = f'({recv})'
            self.emit(depth, f'{head}{body.target} = {recv}.{body.method}({format_expr(body.arg)});')
        elif isinstance(body, TryCatch):
            self.emit(depth, f'{head}try {{')
            self.blocks(body.try_blocks, depth + 1)
            raise_join = f' {format_phis(body.raise_phis)}' if body.raise_phis else ''
            self.emit(depth, f'}}{raise_join} catch ({body.exn_type} {body.exn_var}) {{')
            self.blocks(body.catch_blocks, depth + 1)
            self.emit(depth, '}' + (f' {format_phis(body.join_phis)}' if body.join_phis else ''))
        elif isinstance(body, While):
            entry = f'{format_phis(body.entry_phis)} ' if body.entry_phis else ''
            self.emit(depth, f'{head}{entry}while ({format_expr(body.cond)}) {{')
            self.blocks(body.body, depth + 1)
            self.emit(depth, '}')
        elif isinstance(body, IfElse):
            self.emit(depth, f'{head}if ({format_expr(body.cond)}) {{')
            self.blocks(body.then_blocks, depth + 1)
            self.emit(depth, '} else {')
            self.blocks(body.else_blocks, depth + 1)
            self.emit(depth, '}' + (f' {format_phis(body.join_phis)}' if body.join_phis else ''))
        else:
            raise TypeError(f'not a block body: {body!r}')


def print_source(program):
    """Render a SourceProgram in the listing style `parse_source` reads."""
    return _SourcePrinter().program(program)
