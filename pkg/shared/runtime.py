"""Runtime model shared by the source and target interpreters.

Values are plain Python objects: ``int``, ``bool``, ``str`` (print-only), ``None`` for
null, and ``Loc`` for heap locations. The target interpreter adds its closure values on
top. The heap is a ``Store`` of ``HeapObject`` cells addressed by increasing location
numbers; cells are never removed.
"""

import contextlib
import sys
from collections import deque
from dataclasses import dataclass, field
from typing import Callable


class FjobfError(Exception):
    """Root of every error the toolchain raises on purpose."""


class EvalError(FjobfError):
    """A program did something the semantics gives no meaning to."""


class ResourceLimitExceeded(FjobfError):
    """The step budget or the host recursion ceiling ran out."""


EXCEPTION_CLASS = 'Exception'


@dataclass(frozen=True)
class Loc:
    address: int

    def __str__(self):
        return f'@{self.address}'


@dataclass
class HeapObject:
    class_name: str
    fields: dict = field(default_factory=dict)


@dataclass
class Store:
    cells: dict = field(default_factory=dict)
    next_location: int = 1

    def allocate(self, class_name, field_defaults):
        loc = Loc(self.next_location)
        self.cells[loc.address] = HeapObject(class_name, dict(field_defaults))
        self.next_location += 1
        return loc

    def get(self, loc):
        if not isinstance(loc, Loc):
            raise EvalError(f'expected an object location, got {render_value(loc)}')
        try:
            return self.cells[loc.address]
        except KeyError:
            raise EvalError(f'dangling location {loc}') from None

    def read_field(self, loc, name):
        obj = self.get(loc)
        if name not in obj.fields:
            raise EvalError(f'{obj.class_name} has no field {name!r}')
        return obj.fields[name]

    def write_field(self, loc, name, value):
        obj = self.get(loc)
        if name not in obj.fields:
            raise EvalError(f'{obj.class_name} has no field {name!r}')
        obj.fields[name] = value

    def snapshot(self, roots):
        """Objects reachable from ``roots`` in discovery order, references as list positions.

        Discovery is breadth-first over fields in name order, so two stores holding the
        same object graph give equal snapshots whatever addresses they allocated.
        """
        order = {}
        pending = deque(r for r in roots if isinstance(r, Loc))
        while pending:
            loc = pending.popleft()
            if loc.address in order or loc.address not in self.cells:
                continue
            order[loc.address] = len(order)
            fields = self.cells[loc.address].fields
            pending.extend(fields[name] for name in sorted(fields) if isinstance(fields[name], Loc))

        def ref(value):
            if isinstance(value, Loc):
                return f'#{order[value.address]}' if value.address in order else 'null'
            return render_value(value, self)

        return [
            {
                'class': self.cells[address].class_name,
                'fields': {name: ref(v) for name, v in sorted(self.cells[address].fields.items())},
            }
            for address in order
        ]


@dataclass
class Effects:
    """Side channel for the built-in print."""

    printed: list = field(default_factory=list)

    def emit(self, text):
        self.printed.append(text)


@dataclass
class StepBudget:
    limit: int
    used: int = 0

    def tick(self):
        self.used += 1
        if self.used > self.limit:
            raise ResourceLimitExceeded(f'step budget of {self.limit} exhausted')


@contextlib.contextmanager
def deep_recursion(limit):
    """Raise the host recursion ceiling for the duration of one evaluation."""
    previous = sys.getrecursionlimit()
    sys.setrecursionlimit(max(previous, limit))
    try:
        yield
    except RecursionError as exc:
        raise ResourceLimitExceeded('host recursion ceiling reached') from exc
    finally:
        sys.setrecursionlimit(previous)


def render_value(value, store=None):
    if value is None:
        return 'null'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (int, str)):
        return str(value)
    if isinstance(value, Loc):
        if store is not None and value.address in store.cells:
            return f'{store.cells[value.address].class_name}{value}'
        return f'obj{value}'
    return str(value)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _ints(op, left, right):
    if not (_is_int(left) and _is_int(right)):
        raise EvalError(f'operator {op} expects integers, got {render_value(left)} and {render_value(right)}')


def _bools(op, left, right):
    if not (isinstance(left, bool) and isinstance(right, bool)):
        raise EvalError(f'operator {op} expects booleans, got {render_value(left)} and {render_value(right)}')


def _same(left, right):
    if left is None or right is None:
        return left is right
    return type(left) is type(right) and left == right


def _java_div(left, right):
    if right == 0:
        raise EvalError('division by zero')
    quotient = abs(left) // abs(right)
    return quotient if (left >= 0) == (right >= 0) else -quotient


def _java_mod(left, right):
    if right == 0:
        raise EvalError('division by zero')
    return left - right * _java_div(left, right)


_ARITH: dict[str, Callable[[int, int], object]] = {
    '-': lambda a, b: a - b,
    '*': lambda a, b: a * b,
    '/': _java_div,
    '%': _java_mod,
    '<': lambda a, b: a < b,
    '>': lambda a, b: a > b,
    '<=': lambda a, b: a <= b,
    '>=': lambda a, b: a >= b,
}

OPERATORS = ('||', '&&', '==', '!=', '<', '>', '<=', '>=', '+', '-', '*', '/', '%')


def apply_operator(op, left, right, store=None):
    """The binary operator table shared by both languages.

    ``+`` concatenates renderings when either side is a string; ``==``/``!=`` compare
    values of the same kind and treat locations by identity.
    """
    if op == '+':
        if isinstance(left, str) or isinstance(right, str):
            return render_value(left, store) + render_value(right, store)
        _ints(op, left, right)
        return left + right
    if op in _ARITH:
        _ints(op, left, right)
        return _ARITH[op](left, right)
    if op == '==':
        return _same(left, right)
    if op == '!=':
        return not _same(left, right)
    if op == '&&':
        _bools(op, left, right)
        return left and right
    if op == '||':
        _bools(op, left, right)
        return left or right
    raise EvalError(f'unknown operator {op!r}')


def parse_literal(text):
    """Parse a command-line argument into a runtime value (int, bool or null)."""
    token = text.strip()
    if token == 'true':
        return True
    if token == 'false':
        return False
    if token == 'null':
        return None
    try:
        return int(token)
    except ValueError:
        raise ValueError(f'not an int, bool or null literal: {text!r}') from None
