"""Abstract syntax of SSAFJ-EH, structural validation and the while-entry normalization.

A method body is a list of labeled blocks. Compound blocks (try/catch, while, if/else)
nest further block lists and carry φ joins that select a value by the label of the
block control arrived from.

ASTs are frozen dataclasses; source positions are carried but excluded from equality so
that a reparsed pretty-print compares equal to the original.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Iterator, Union

from runtime import EXCEPTION_CLASS, FjobfError

logger = logging.getLogger(__name__)


class MinLabelError(FjobfError):
    """A while block's entry φs do not agree on a single entry label."""


@dataclass(frozen=True)
class Pos:
    line: int
    column: int

    def __str__(self):
        return f'{self.line}:{self.column}'


@dataclass(frozen=True)
class TypeName:
    name: str

    @property
    def is_class(self):
        return self.name not in PRIMITIVE_TYPES

    def __str__(self):
        return self.name


INT = TypeName('int')
BOOL = TypeName('bool')
VOID = TypeName('void')
EXCEPTION = TypeName(EXCEPTION_CLASS)
PRIMITIVE_TYPES = frozenset({'int', 'bool', 'void'})


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
class FieldAccess:
    receiver: 'Expr'
    field: str


@dataclass(frozen=True)
class New:
    class_name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: 'Expr'
    right: 'Expr'


Expr = Union[Const, Var, This, FieldAccess, New, BinOp]


# --- Assignments (the statements an Assigns block holds) ---

@dataclass(frozen=True)
class VarAssign:
    target: str
    expr: Expr


@dataclass(frozen=True)
class FieldAssign:
    receiver: Expr
    field: str
    expr: Expr


@dataclass(frozen=True)
class Print:
    """`System.out.println(e)`, the only effect besides heap updates."""

    expr: Expr


Assignment = Union[VarAssign, FieldAssign, Print]


@dataclass(frozen=True)
class Phi:
    target: str
    operands: tuple  # of (label, variable)
    pos: Pos | None = field(default=None, compare=False)

    def operand_for(self, label):
        for op_label, name in self.operands:
            if op_label == label:
                return name
        return None

    @property
    def labels(self):
        return tuple(label for label, _ in self.operands)


# --- Block bodies ---

@dataclass(frozen=True)
class Assigns:
    assignments: tuple


@dataclass(frozen=True)
class Return:
    expr: Expr


@dataclass(frozen=True)
class Throw:
    expr: Expr


@dataclass(frozen=True)
class MethodCall:
    target: str
    receiver: Expr
    method: str
    arg: Expr


@dataclass(frozen=True)
class TryCatch:
    try_blocks: tuple
    raise_phis: tuple
    exn_type: TypeName
    exn_var: str
    catch_blocks: tuple
    join_phis: tuple


@dataclass(frozen=True)
class While:
    entry_phis: tuple
    cond: Expr
    body: tuple


@dataclass(frozen=True)
class IfElse:
    cond: Expr
    then_blocks: tuple
    else_blocks: tuple
    join_phis: tuple


BlockBody = Union[Assigns, Return, Throw, MethodCall, TryCatch, While, IfElse]


@dataclass(frozen=True)
class Block:
    label: str
    body: BlockBody
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class LocalDecl:
    type: TypeName
    name: str


@dataclass(frozen=True)
class FieldDecl:
    type: TypeName
    name: str
    default: Const | None = None


@dataclass(frozen=True)
class SourceMethod:
    return_type: TypeName
    name: str
    param_type: TypeName
    param: str
    locals: tuple
    body: tuple
    pos: Pos | None = field(default=None, compare=False)

    def local_type(self, name):
        if name == self.param:
            return self.param_type
        for decl in self.locals:
            if decl.name == name:
                return decl.type
        return None


@dataclass(frozen=True)
class SourceClass:
    name: str
    fields: tuple
    methods: tuple
    pos: Pos | None = field(default=None, compare=False)

    def method(self, name):
        for md in self.methods:
            if md.name == name:
                return md
        return None


@dataclass(frozen=True)
class SourceProgram:
    classes: tuple

    def cls(self, name):
        for c in self.classes:
            if c.name == name:
                return c
        return None


# --- Traversal helpers ---

def child_regions(body):
    """The nested block lists of a compound block body, in document order."""
    if isinstance(body, TryCatch):
        return (body.try_blocks, body.catch_blocks)
    if isinstance(body, While):
        return (body.body,)
    if isinstance(body, IfElse):
        return (body.then_blocks, body.else_blocks)
    return ()


def phis_of(body):
    if isinstance(body, TryCatch):
        return body.raise_phis + body.join_phis
    if isinstance(body, While):
        return body.entry_phis
    if isinstance(body, IfElse):
        return body.join_phis
    return ()


def iter_blocks(blocks) -> Iterator[Block]:
    """Every block of a region, preorder (a compound block before its children)."""
    for block in blocks:
        yield block
        for region in child_regions(block.body):
            yield from iter_blocks(region)


def label_order(method):
    """Block-tree document order of the method's labels."""
    return {block.label: i for i, block in enumerate(iter_blocks(method.body))}


def region_labels(blocks):
    return {block.label for block in iter_blocks(blocks)}


def label_number(label):
    return int(label[1:]) if label[1:].isdigit() else -1


def defined_names(method):
    """(name, pos) for every definition in the method, the parameter included."""
    defs = [(method.param, method.pos)]
    for block in iter_blocks(method.body):
        body = block.body
        if isinstance(body, Assigns):
            defs.extend((a.target, block.pos) for a in body.assignments if isinstance(a, VarAssign))
        elif isinstance(body, MethodCall):
            defs.append((body.target, block.pos))
        elif isinstance(body, TryCatch):
            defs.append((body.exn_var, block.pos))
        defs.extend((phi.target, phi.pos or block.pos) for phi in phis_of(body))
    return defs


def expr_names(expr):
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, FieldAccess):
        return expr_names(expr.receiver)
    if isinstance(expr, BinOp):
        return expr_names(expr.left) | expr_names(expr.right)
    return set()


def method_identifiers(method):
    """Every variable name the method mentions, for fresh-name hygiene."""
    names = {method.param} | {d.name for d in method.locals}
    names.update(name for name, _ in defined_names(method))
    for block in iter_blocks(method.body):
        body = block.body
        for phi in phis_of(body):
            names.update(name for _, name in phi.operands)
        if isinstance(body, Assigns):
            for a in body.assignments:
                names |= expr_names(a.expr)
                if isinstance(a, FieldAssign):
                    names |= expr_names(a.receiver)
        elif isinstance(body, (Return, Throw)):
            names |= expr_names(body.expr)
        elif isinstance(body, MethodCall):
            names |= expr_names(body.receiver) | expr_names(body.arg)
        elif isinstance(body, (While, IfElse)):
            names |= expr_names(body.cond)
    return names


# --- Validation ---

@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    line: int | None = None
    column: int | None = None

    def __str__(self):
        where = f'{self.line}:{self.column}' if self.line is not None else '-'
        return f'{where}: {self.rule}: {self.message}'

    def to_dict(self):
        return {'rule': self.rule, 'message': self.message, 'line': self.line, 'column': self.column}


def _violation(rule, message, pos):
    return Violation(rule, message, pos.line if pos else None, pos.column if pos else None)


def validate(program):
    """Structural checks. Violations are accumulated, never raised."""
    violations = []
    class_names = set()
    for cls in program.classes:
        if cls.name in class_names:
            violations.append(_violation('duplicate-class', f'class {cls.name} declared twice', cls.pos))
        class_names.add(cls.name)
    known_classes = class_names | {EXCEPTION_CLASS}

    for cls in program.classes:
        seen_fields = set()
        for fd in cls.fields:
            if fd.name in seen_fields:
                violations.append(_violation('duplicate-field', f'{cls.name}.{fd.name} declared twice', cls.pos))
            seen_fields.add(fd.name)
            if fd.type.is_class and fd.type.name not in known_classes:
                violations.append(_violation('unknown-class', f'field type {fd.type} is not declared', cls.pos))
        seen_methods = set()
        for md in cls.methods:
            if md.name in seen_methods:
                violations.append(_violation('duplicate-method', f'{cls.name}.{md.name} declared twice', md.pos))
            seen_methods.add(md.name)
            violations.extend(_validate_method(md, known_classes))
    return violations


def _validate_method(md, known_classes):
    violations = []
    where = md.name

    seen_locals = {md.param}
    for decl in md.locals:
        if decl.name in seen_locals:
            violations.append(_violation('duplicate-local', f'{where}: {decl.name} declared twice', md.pos))
        seen_locals.add(decl.name)
        if decl.type.is_class and decl.type.name not in known_classes:
            violations.append(_violation('unknown-class', f'{where}: type {decl.type} is not declared', md.pos))

    labels = {}
    for block in iter_blocks(md.body):
        if block.label in labels:
            violations.append(_violation('duplicate-label', f'{where}: label {block.label} used twice', block.pos))
        labels.setdefault(block.label, block)
        for region in child_regions(block.body):
            if not region:
                violations.append(_violation('empty-region', f'{where}: {block.label} has an empty block list', block.pos))

    if not md.body or not isinstance(md.body[-1].body, Return):
        pos = md.body[-1].pos if md.body else md.pos
        violations.append(_violation('last-block-return', f'{where}: the last block must be a return', pos))

    counts = {}
    for name, pos in defined_names(md):
        counts.setdefault(name, []).append(pos)
    for name, positions in counts.items():
        if len(positions) > 1:
            violations.append(_violation('single-assignment', f'{where}: {name} is assigned {len(positions)} times', positions[1]))

    for block in iter_blocks(md.body):
        for phi in phis_of(block.body):
            pos = phi.pos or block.pos
            if len(set(phi.labels)) != len(phi.labels):
                violations.append(_violation('phi-label-resolution', f'{where}: {phi.target} repeats an operand label', pos))
            for label in phi.labels:
                if label not in labels:
                    violations.append(_violation('phi-label-resolution', f'{where}: {phi.target} names unknown label {label}', pos))
        for expr in _block_exprs(block.body):
            for cname in _new_classes(expr):
                if cname not in known_classes:
                    violations.append(_violation('unknown-class', f'{where}: new {cname}() of an undeclared class', block.pos))

    violations.extend(_validate_whiles(md.body, where, catch_head=False))
    return violations


def _validate_whiles(blocks, where, catch_head):
    violations = []
    for i, block in enumerate(blocks):
        body = block.body
        if isinstance(body, While):
            inside = region_labels(body.body)
            for phi in body.entry_phis:
                back = [label for label in phi.labels if label in inside]
                entry = [label for label in phi.labels if label not in inside]
                allowed_entries = len(entry) >= 1 if (catch_head and i == 0) else len(entry) == 1
                if len(back) != 1 or not allowed_entries:
                    violations.append(_violation(
                        'while-phi-arity',
                        f'{where}: while {block.label} entry φ {phi.target} needs one entry and one loop-back operand',
                        phi.pos or block.pos,
                    ))
        if isinstance(body, TryCatch):
            violations.extend(_validate_whiles(body.try_blocks, where, catch_head=False))
            violations.extend(_validate_whiles(body.catch_blocks, where, catch_head=True))
        else:
            for region in child_regions(body):
                violations.extend(_validate_whiles(region, where, catch_head=False))
    return violations


def _block_exprs(body):
    if isinstance(body, Assigns):
        for a in body.assignments:
            yield a.expr
            if isinstance(a, FieldAssign):
                yield a.receiver
    elif isinstance(body, (Return, Throw)):
        yield body.expr
    elif isinstance(body, MethodCall):
        yield body.receiver
        yield body.arg
    elif isinstance(body, (While, IfElse)):
        yield body.cond


def _new_classes(expr):
    if isinstance(expr, New):
        yield expr.class_name
    elif isinstance(expr, FieldAccess):
        yield from _new_classes(expr.receiver)
    elif isinstance(expr, BinOp):
        yield from _new_classes(expr.left)
        yield from _new_classes(expr.right)


# --- While-entry normalization ---

def min_label(phis, order=None):
    """The entry label shared by a while block's two-operand entry φs.

    ``order`` maps labels to their document position; without it labels are compared
    by number. Returns None for an empty list.
    """
    if not phis:
        return None

    def key(label):
        return order[label] if order is not None and label in order else label_number(label)

    entry = None
    for phi in phis:
        if len(phi.operands) != 2:
            raise MinLabelError(f'φ {phi.target} has {len(phi.operands)} operands, expected 2')
        candidate = min(phi.labels, key=key)
        if entry is not None and candidate != entry:
            raise MinLabelError(f'entry φs disagree on the entry label: {entry} vs {candidate}')
        entry = candidate
    return entry


class _Fresh:
    def __init__(self, method):
        self.names = method_identifiers(method)
        self.next_label = max((label_number(b.label) for b in iter_blocks(method.body)), default=0) + 1

    def label(self):
        label = f'L{self.next_label}'
        self.next_label += 1
        return label

    def name(self, base):
        candidate, n = f'{base}_k', 2
        while candidate in self.names:
            candidate, n = f'{base}_k{n}', n + 1
        self.names.add(candidate)
        return candidate


def preprocess_while_entries(program):
    """Give every catch-head while exactly one entry label.

    A while that starts a catch clause can be entered from several raising blocks. An
    empty block with a fresh label is inserted before it, the entry values are merged
    by new raise-φs of the try, and the while φs are rewritten to (fresh:merged,
    loop-back:value). Programs without such whiles come back structurally equal.
    """
    classes = []
    for cls in program.classes:
        methods = tuple(_preprocess_method(md) for md in cls.methods)
        classes.append(replace(cls, methods=methods))
    return replace(program, classes=tuple(classes))


def _preprocess_method(md):
    fresh = None
    new_locals = []

    def declare(name, like):
        # a variable padded into a φ is read before it may be assigned, so it must start out null
        if md.local_type(name) is not None or any(d.name == name for d in new_locals):
            return
        declared = next((md.local_type(n) for n in like if md.local_type(n) is not None), None)
        if declared is not None:
            new_locals.append(LocalDecl(declared, name))

    def rewrite(blocks):
        nonlocal fresh
        out = []
        for block in blocks:
            body = block.body
            if isinstance(body, TryCatch):
                try_blocks = rewrite(body.try_blocks)
                catch_blocks = rewrite(body.catch_blocks)
                raise_phis = body.raise_phis
                head = catch_blocks[0] if catch_blocks else None
                if head is not None and isinstance(head.body, While) and _needs_entry_block(head.body):
                    if fresh is None:
                        fresh = _Fresh(md)
                    entry_label = fresh.label()
                    inside = region_labels(head.body.body)
                    merged, rewritten = [], []
                    for phi in head.body.entry_phis:
                        entries = tuple(op for op in phi.operands if op[0] not in inside)
                        backs = tuple(op for op in phi.operands if op[0] in inside)
                        merged_name = fresh.name(phi.target)
                        merged.append(Phi(merged_name, entries, phi.pos))
                        rewritten.append(replace(phi, operands=((entry_label, merged_name),) + backs))
                        declared = md.local_type(phi.target)
                        if declared is not None:
                            new_locals.append(LocalDecl(declared, merged_name))
                    logger.debug(f'{md.name}: inserted {entry_label} before while {head.label}')
                    keep = {m.target: phi.target for m, phi in zip(merged, head.body.entry_phis)}
                    raise_phis = _cover_labels(raise_phis + tuple(merged), keep)
                    for phi in raise_phis:
                        declare(keep.get(phi.target, phi.target), [name for _, name in phi.operands])
                    head = replace(head, body=replace(head.body, entry_phis=tuple(rewritten)))
                    catch_blocks = (Block(entry_label, Assigns(()), head.pos), head) + tuple(catch_blocks[1:])
                body = replace(body, try_blocks=tuple(try_blocks), raise_phis=raise_phis,
                               catch_blocks=tuple(catch_blocks))
            elif isinstance(body, While):
                body = replace(body, body=tuple(rewrite(body.body)))
            elif isinstance(body, IfElse):
                body = replace(body, then_blocks=tuple(rewrite(body.then_blocks)),
                               else_blocks=tuple(rewrite(body.else_blocks)))
            out.append(replace(block, body=body) if body is not block.body else block)
        return out

    body = tuple(rewrite(md.body))
    if fresh is None:
        return md
    return replace(md, body=body, locals=md.locals + tuple(new_locals))


def _cover_labels(phis, keep):
    """Give every φ of a raise list an operand for each label any of them names.

    A φ missing a label gets the variable it should keep unchanged on that path:
    ``keep[target]`` when given, otherwise its own target.
    """
    labels = []
    for phi in phis:
        labels.extend(label for label in phi.labels if label not in labels)
    covered = []
    for phi in phis:
        extra = tuple((label, keep.get(phi.target, phi.target)) for label in labels if phi.operand_for(label) is None)
        covered.append(replace(phi, operands=phi.operands + extra) if extra else phi)
    return tuple(covered)


def _needs_entry_block(loop):
    inside = region_labels(loop.body)
    return any(sum(1 for label in phi.labels if label not in inside) > 1 for phi in loop.entry_phis)
