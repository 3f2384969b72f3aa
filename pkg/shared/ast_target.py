"""Abstract syntax of FJ_λ, the obfuscator's target language.

FJ_λ extends the source object language with function types, lambda literals and
top-level functions (the CPS combinators). A method declares its locals up front;
locals declared with a lambda initializer are installed when the method is entered.

Every lambda, method and top-level function carries an ordinal (``lid``) once the
program has been indexed. Ordinals follow document order and are what the analyses
and the instrumented interpreter key their results by.
"""

from dataclasses import dataclass, field, fields, is_dataclass, replace
from typing import Union

from runtime import EXCEPTION_CLASS

# --- Types ---


@dataclass(frozen=True)
class BaseType:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Arrow:
    param: 'FunType'
    result: 'FunType'


FunType = Union[BaseType, Arrow]

INT_T = BaseType('int')
BOOL_T = BaseType('bool')
VOID_T = BaseType('void')
EXCEPTION_T = BaseType(EXCEPTION_CLASS)
VAR_T = BaseType('var')


def arrow(*types):
    """Right-associated arrow chain: arrow(a, b, c) is a => (b => c)."""
    result = types[-1]
    for t in reversed(types[:-1]):
        result = Arrow(t, result)
    return result


EX_CONT = arrow(EXCEPTION_T, VOID_T)
NM_CONT = arrow(VOID_T, VOID_T)
CPS_FUNC = arrow(EX_CONT, NM_CONT, VOID_T)
DEFAULT_ALIASES = (('ExCont', EX_CONT), ('NmCont', NM_CONT), ('CpsFunc', CPS_FUNC))


def peel(t, n=1):
    """Result type after applying a function of type ``t`` to ``n`` arguments."""
    for _ in range(n):
        if not isinstance(t, Arrow):
            return None
        t = t.result
    return t


def function_type(params, result):
    return arrow(*[p.type or VAR_T for p in params], result) if params else arrow(VOID_T, result)


# --- Expressions ---


@dataclass(frozen=True)
class Const:
    value: Union[int, bool, str, None]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class This:
    pass


@dataclass(frozen=True)
class Apply:
    fn: 'TargetExpr'
    args: tuple


@dataclass(frozen=True)
class MethodCall:
    receiver: 'TargetExpr'
    method: str
    arg: 'TargetExpr'


@dataclass(frozen=True)
class FieldAccess:
    receiver: 'TargetExpr'
    field: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: 'TargetExpr'
    right: 'TargetExpr'


@dataclass(frozen=True)
class New:
    class_name: str


@dataclass(frozen=True)
class Param:
    type: FunType | None
    name: str


@dataclass(frozen=True)
class Lambda:
    params: tuple
    body: tuple
    pos: object = field(default=None, compare=False)
    lid: int | None = field(default=None, compare=False)


TargetExpr = Union[Const, Var, This, Apply, MethodCall, FieldAccess, BinOp, New, Lambda]


# --- Statements ---


@dataclass(frozen=True)
class Assign:
    target: str
    expr: TargetExpr
    pos: object = field(default=None, compare=False)
    declared: FunType | None = field(default=None, compare=False)


@dataclass(frozen=True)
class FieldUpdate:
    receiver: TargetExpr
    field: str
    expr: TargetExpr
    pos: object = field(default=None, compare=False)


TargetAssignment = Union[Assign, FieldUpdate]


@dataclass(frozen=True)
class Return:
    expr: TargetExpr | None
    pos: object = field(default=None, compare=False)


@dataclass(frozen=True)
class IfElse:
    cond: TargetExpr
    then_body: tuple
    else_body: tuple
    pos: object = field(default=None, compare=False)


@dataclass(frozen=True)
class Print:
    expr: TargetExpr
    pos: object = field(default=None, compare=False)


@dataclass(frozen=True)
class Eval:
    """An application evaluated for its effect."""

    expr: TargetExpr
    pos: object = field(default=None, compare=False)


TargetStmt = Union[Assign, FieldUpdate, Return, IfElse, Print, Eval]


# --- Declarations ---


@dataclass(frozen=True)
class LocalDecl:
    type: FunType
    name: str
    init: TargetExpr | None = None


@dataclass(frozen=True)
class FieldDecl:
    type: FunType
    name: str
    default: Const | None = None


@dataclass(frozen=True)
class TargetMethod:
    """A class method (one parameter) or a top-level function (any number)."""

    return_type: FunType
    name: str
    params: tuple
    locals: tuple
    body: tuple
    pos: object = field(default=None, compare=False)
    lid: int | None = field(default=None, compare=False)

    def local(self, name):
        for decl in self.locals:
            if decl.name == name:
                return decl
        return None

    def declared_type(self, name):
        for p in self.params:
            if p.name == name:
                return p.type
        decl = self.local(name)
        return decl.type if decl is not None else None

    @property
    def type(self):
        return function_type(self.params, self.return_type)


@dataclass(frozen=True)
class TargetClass:
    name: str
    fields: tuple
    methods: tuple
    pos: object = field(default=None, compare=False)

    def method(self, name):
        for md in self.methods:
            if md.name == name:
                return md
        return None


@dataclass(frozen=True)
class TargetProgram:
    classes: tuple
    functions: tuple = ()
    aliases: tuple = DEFAULT_ALIASES

    def cls(self, name):
        for c in self.classes:
            if c.name == name:
                return c
        return None

    def function(self, name):
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None


# --- Generic traversal ---


def child_nodes(node):
    """Structural children of an AST node, skipping position and ordinal fields."""
    for f in fields(node):
        if not f.compare:
            continue
        yield from _nodes(getattr(node, f.name))


def _nodes(value):
    if is_dataclass(value) and not isinstance(value, type):
        yield value
    elif isinstance(value, tuple):
        for item in value:
            yield from _nodes(item)


def walk(node):
    """Preorder over every node below (and including) ``node``."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(list(child_nodes(current))))


def rebuild(node, fn):
    """Bottom-up rewrite: ``fn`` receives each node with its children already rebuilt."""
    if not is_dataclass(node) or isinstance(node, type):
        return node
    changes = {}
    for f in fields(node):
        if not f.compare:
            continue
        old = getattr(node, f.name)
        new = _rebuild_value(old, fn)
        if new is not old:
            changes[f.name] = new
    if changes:
        node = replace(node, **changes)
    return fn(node)


def _rebuild_value(value, fn):
    if is_dataclass(value) and not isinstance(value, type):
        return rebuild(value, fn)
    if isinstance(value, tuple):
        items = tuple(_rebuild_value(v, fn) for v in value)
        return items if any(a is not b for a, b in zip(items, value)) else value
    return value


# --- Lambda registry ---


@dataclass(frozen=True)
class LambdaId:
    ordinal: int
    display: str
    kind: str  # 'lambda', 'method' or 'function'
    qualname: str
    line: int | None = None

    def __str__(self):
        return self.display


def code_units(program):
    """Every method, function and lambda in document order."""
    for cls in program.classes:
        for md in cls.methods:
            yield md
            yield from (n for n in _walk_decl(md) if isinstance(n, Lambda))
    for fn in program.functions:
        yield fn
        yield from (n for n in _walk_decl(fn) if isinstance(n, Lambda))


def _walk_decl(md):
    for decl in md.locals:
        if decl.init is not None:
            yield from walk(decl.init)
    for stmt in md.body:
        yield from walk(stmt)


def index_lambdas(program):
    """Assign document-order ordinals to every method, function and lambda."""
    # Ordinals are keyed by the identity of the original nodes, recorded before the copy.
    order = {id(unit): i for i, unit in enumerate(code_units(program))}

    def visit(value):
        if isinstance(value, tuple):
            return tuple(visit(v) for v in value)
        if not is_dataclass(value) or isinstance(value, type):
            return value
        changes = {}
        for f in fields(value):
            if not f.compare:
                continue
            old = getattr(value, f.name)
            new = visit(old)
            if new is not old:
                changes[f.name] = new
        updated = replace(value, **changes) if changes else value
        if isinstance(value, (Lambda, TargetMethod)) and id(value) in order:
            updated = replace(updated, lid=order[id(value)])
        return updated

    return visit(program)


def lambda_table(program):
    """LambdaId for every ordinal, with display names built from source lines.

    Lambdas are named ``λ_<line>`` with a prime per earlier lambda on the same line;
    top-level functions by the line of their declaration; class methods as
    ``Class.method``. Units without positions fall back to ``λ#<ordinal>``.
    """
    table = {}
    per_line = {}
    for cls in program.classes:
        for md in cls.methods:
            _register(table, per_line, md, 'method', f'{cls.name}.{md.name}')
            for node in _walk_decl(md):
                if isinstance(node, Lambda):
                    _register(table, per_line, node, 'lambda', None)
    for fn in program.functions:
        _register(table, per_line, fn, 'function', fn.name)
        for node in _walk_decl(fn):
            if isinstance(node, Lambda):
                _register(table, per_line, node, 'lambda', None)
    return table


def _register(table, per_line, unit, kind, qualname):
    if unit.lid is None:
        raise ValueError('program has not been indexed; call index_lambdas first')
    line = getattr(unit.pos, 'line', None)
    if kind == 'method':
        display = qualname
    elif line is None:
        display = f'λ#{unit.lid}'
    else:
        primes = per_line.get(line, 0)
        per_line[line] = primes + 1
        display = f'λ_{line}' + "'" * primes
    table[unit.lid] = LambdaId(unit.lid, display, kind, qualname or display, line)


def is_indexed(program):
    return all(unit.lid is not None for unit in code_units(program))


class FreshNames:
    """Hands out identifiers that collide with nothing already taken."""

    def __init__(self, taken=()):
        self.taken = set(taken)

    def take(self, base):
        candidate, n = base, 2
        while candidate in self.taken:
            candidate, n = f'{base}_{n}', n + 1
        self.taken.add(candidate)
        return candidate
