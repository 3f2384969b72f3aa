"""Control-flow analysis of FJ_λ programs: which lambdas may each variable hold.

One solver covers both the context-insensitive analysis (``k = 0``) and call-string
sensitivity (``k >= 1``). Abstract values are closures: a lambda ordinal plus the
contexts of the scopes it closed over, so a lambda created inside ``seq`` at call site
12 keeps reading ``seq``'s formals at context 12 when it runs later.

Variables are keyed by the scope that owns them (a lambda for its formals, the method
or function for every other name), the name, and the context of that scope.

States are per statement and flow-sensitive between calls. Any call may run code that
assigns shared method locals, so after a call the state forgets its own bindings and
reads fall back to the global summary of every value ever stored in the variable. A
variable absent from a state reads as that summary.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

from ast_target import (
    Apply,
    Assign,
    BaseType,
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
    TargetMethod,
    This,
    Var,
    is_indexed,
    index_lambdas,
    lambda_table,
    walk,
)

logger = logging.getLogger(__name__)

ENTRY = -1


class VarKey(NamedTuple):
    scope: int
    name: str


class Slot(NamedTuple):
    scope: int
    name: str
    ctx: tuple


class CallSite(NamedTuple):
    code: int
    ordinal: int
    line: int | None

    def __str__(self):
        return str(self.line) if self.line is not None else f'#{self.code}.{self.ordinal}'


class AbsClosure(NamedTuple):
    code: int
    env: tuple  # (scope, ctx) pairs for every enclosing scope, outermost first


class Config(NamedTuple):
    code: int
    ctx: tuple
    env: tuple


class StmtId(NamedTuple):
    code: int
    ordinal: int


class CallEdge(NamedTuple):
    caller: int
    callee: int
    site: CallSite
    tag: str  # 'plain', 't' or 'f'


@dataclass(frozen=True)
class AbstractState:
    bindings: dict = field(default_factory=dict)
    reachable: bool = True


BOTTOM = AbstractState({}, reachable=False)


def push(site, ctx, k):
    return ((site,) + ctx)[:k]


def join(states):
    """Pointwise union; unreachable states are the identity.

    A variable bound in only some of the states is dropped, so it reads as its summary.
    """
    live = [s for s in states if s.reachable]
    if not live:
        return BOTTOM
    keys = set(live[0].bindings)
    for s in live[1:]:
        keys &= set(s.bindings)
    merged = {}
    for key in keys:
        merged[key] = frozenset().union(*(s.bindings[key] for s in live))
    return AbstractState(merged)


@dataclass
class _Body:
    stmts: list = field(default_factory=list)
    preds: list = field(default_factory=list)
    tags: list = field(default_factory=list)

    def visit(self, stmts, incoming, tag):
        current = incoming
        for stmt in stmts:
            ordinal = len(self.stmts)
            self.stmts.append(stmt)
            self.preds.append(tuple(current))
            self.tags.append(tag)
            if isinstance(stmt, IfElse):
                exits = self.visit(stmt.then_body, (ordinal,), 't')
                exits += self.visit(stmt.else_body, (ordinal,), 'f')
                current = tuple(dict.fromkeys(exits))
            else:
                current = (ordinal,)
        return current


def _body_of(unit):
    body = _Body()
    if isinstance(unit, TargetMethod):
        inits = [Assign(d.name, d.init) for d in unit.locals if d.init is not None]
        body.visit(tuple(inits) + unit.body, (ENTRY,), 'plain')
    else:
        body.visit(unit.body, (ENTRY,), 'plain')
    return body


def _assigned_names(unit):
    roots = [d.init for d in unit.locals if d.init is not None] + list(unit.body)
    names = set()
    for root in roots:
        names.update(n.target for n in walk(root) if isinstance(n, Assign))
    return names


@dataclass
class AnalysisResult:
    k: int
    table: dict
    slots: dict
    states: dict
    edges: frozenset
    returned: dict
    configs: tuple
    owners: dict

    def variables(self):
        """Points-to sets with contexts merged, as lambda ordinals."""
        merged = defaultdict(set)
        for slot, values in self.slots.items():
            merged[VarKey(slot.scope, slot.name)].update(v.code for v in values)
        return {key: frozenset(codes) for key, codes in merged.items()}

    def contextual(self):
        out = {}
        for slot, values in self.slots.items():
            out[(VarKey(slot.scope, slot.name), slot.ctx)] = frozenset(v.code for v in values)
        return out

    def points_to(self, name, scope=None):
        """Union of the points-to sets of every variable called ``name``."""
        found = set()
        for key, codes in self.variables().items():
            if key.name == name and (scope is None or key.scope == scope):
                found |= codes
        return frozenset(found)

    def at_context(self, name, ctx_lines):
        """Points-to set of ``name`` in the context whose call sites sit on ``ctx_lines``."""
        found = set()
        for (key, ctx), codes in self.contextual().items():
            if key.name == name and tuple(site.line for site in ctx) == tuple(ctx_lines):
                found |= codes
        return frozenset(found)

    def callers(self, code):
        return frozenset(edge.site for edge in self.edges if edge.callee == code)

    def call_edges(self):
        return frozenset((e.caller, e.callee, e.tag) for e in self.edges)

    def display(self, codes):
        return sorted((self.table[c].display for c in codes), key=_display_order)

    def var_name(self, key):
        return f'{key.name}@{self.table[key.scope].display}'


def _display_order(name):
    digits = ''.join(ch for ch in name if ch.isdigit())
    return (int(digits) if digits and name.startswith('λ') else -1, name)


class FlowAnalysis:
    """Worklist solver over configurations (code unit, call string, closure contexts)."""

    def __init__(self, program, k=0):
        if not is_indexed(program):
            program = index_lambdas(program)
        self.program = program
        self.k = k
        self.table = lambda_table(program)
        self.units = {}
        self.parents = {}
        self.owners = {}
        self.owner_class = {}
        self.function_lids = {fn.name: fn.lid for fn in program.functions}
        self._index_units()
        self.bodies = {lid: _body_of(unit) for lid, unit in self.units.items()}
        self.frame_names = {
            lid: {p.name for p in unit.params} | {d.name for d in unit.locals} | _assigned_names(unit)
            for lid, unit in self.units.items()
            if isinstance(unit, TargetMethod)
        }

        self.configs = []
        self.known = set()
        self.store = defaultdict(frozenset)
        self.entries = defaultdict(lambda: defaultdict(frozenset))
        self.returned = defaultdict(frozenset)
        self.edges = set()
        self.states = {}
        self.changed = False

    # --- static structure ---

    def _index_units(self):
        for cls in self.program.classes:
            for md in cls.methods:
                self.owner_class[md.lid] = cls.name
                self._index_owner(md)
        for fn in self.program.functions:
            self._index_owner(fn)

    def _index_owner(self, owner):
        self.units[owner.lid] = owner
        self.owners[owner.lid] = owner.lid

        def visit(node, parent):
            for child in walk(node):
                if isinstance(child, Lambda) and child.lid not in self.units:
                    self.units[child.lid] = child
                    self.parents[child.lid] = parent
                    self.owners[child.lid] = owner.lid
                    for stmt in child.body:
                        visit(stmt, child.lid)

        for decl in owner.locals:
            if decl.init is not None:
                visit(decl.init, owner.lid)
        for stmt in owner.body:
            visit(stmt, owner.lid)

    def chain(self, code):
        """Scopes visible from ``code``, innermost first, ending with the owner."""
        scopes = [code]
        while scopes[-1] in self.parents:
            scopes.append(self.parents[scopes[-1]])
        return scopes

    def _resolve(self, name, code):
        """(scope, function lid or None) for a name read or written in ``code``."""
        for scope in self.chain(code):
            unit = self.units[scope]
            if isinstance(unit, Lambda):
                if any(p.name == name for p in unit.params):
                    return scope, None
                continue
            declared = any(p.name == name for p in unit.params) or unit.local(name) is not None
            fn = None if declared else self.function_lids.get(name)
            if fn is not None and name not in self.frame_names[scope]:
                return None, fn
            return scope, fn
        raise AssertionError(f'unit #{code} has no owner')

    def statement(self, sid):
        return self.bodies[sid.code].stmts[sid.ordinal]

    def statement_ids(self, code):
        return [StmtId(code, o) for o in range(len(self.bodies[code].stmts))]

    def static_config(self, code):
        """The context-free configuration of a unit, as the k = 0 analysis sees it."""
        return Config(code, (), tuple((scope, ()) for scope in reversed(self.chain(code)[1:])))

    # --- configurations ---

    def _ctx_of(self, scope, config):
        if scope == config.code:
            return config.ctx
        return dict(config.env).get(scope, ())

    def _slot(self, name, config):
        scope, _ = self._resolve(name, config.code)
        if scope is None:
            scope = self.owners[config.code]
        return Slot(scope, name, self._ctx_of(scope, config))

    def _discover(self, config):
        if config in self.known:
            return
        self.known.add(config)
        self.configs.append(config)
        self.changed = True

    def _grow(self, table, key, values):
        if values - table[key]:
            table[key] = table[key] | values
            self.changed = True

    # --- transfer ---

    def abstract_eval(self, sigma, expr, config):
        """Closures ``expr`` may evaluate to without running any call."""
        if isinstance(expr, Var):
            return self._read(expr.name, sigma, config)
        if isinstance(expr, Lambda):
            return frozenset({AbsClosure(expr.lid, config.env + ((config.code, config.ctx),))})
        return frozenset()

    def _read(self, name, sigma, config):
        scope, fn = self._resolve(name, config.code)
        values = frozenset()
        if scope is not None:
            slot = Slot(scope, name, self._ctx_of(scope, config))
            values = sigma.bindings[slot] if slot in sigma.bindings else self.store[slot]
        if fn is not None:
            values |= {AbsClosure(fn, ())}
        return values

    def flow(self, sid, sigma, config=None, commit=True):
        """Output state of statement ``sid`` given its input state.

        With ``commit`` the calls it makes are recorded (new configurations, formal
        bindings, edges, stored values); without, the solver's tables stay untouched.
        """
        if not sigma.reachable:
            return sigma
        config = config or self.static_config(sid.code)
        stmt = self.statement(sid)
        line = getattr(stmt.pos, 'line', None)
        call = _CallContext(CallSite(sid.code, sid.ordinal, line), self.bodies[sid.code].tags[sid.ordinal], commit)
        if isinstance(stmt, Assign):
            values = self._eval(stmt.expr, sigma, config, call)
            slot = self._slot(stmt.target, config)
            bindings = {} if call.made else dict(sigma.bindings)
            bindings[slot] = values
            if commit:
                self._grow(self.store, slot, values)
            return AbstractState(bindings)
        if isinstance(stmt, Return):
            if stmt.expr is not None:
                values = self._eval(stmt.expr, sigma, config, call)
                if commit:
                    self._grow(self.returned, config, values)
        elif isinstance(stmt, IfElse):
            self._eval(stmt.cond, sigma, config, call)
        elif isinstance(stmt, FieldUpdate):
            self._eval(stmt.receiver, sigma, config, call)
            self._eval(stmt.expr, sigma, config, call)
        elif isinstance(stmt, (Print, Eval)):
            self._eval(stmt.expr, sigma, config, call)
        return AbstractState({}) if call.made else sigma

    def _eval(self, expr, sigma, config, call):
        if isinstance(expr, Apply):
            fns = self._eval(expr.fn, sigma, config, call)
            args = [self._eval(a, sigma, config, call) for a in expr.args]
            call.made = True
            result = frozenset()
            for closure in sorted(fns):
                result |= self._apply(closure, args, config, call)
            return result
        if isinstance(expr, MethodCall):
            self._eval(expr.receiver, sigma, config, call)
            arg = self._eval(expr.arg, sigma, config, call)
            call.made = True
            result = frozenset()
            for md in self._callees(expr, config.code):
                callee = Config(md.lid, push(call.site, config.ctx, self.k), ())
                result |= self._enter(callee, md.params, [arg], config, call)
            return result
        if isinstance(expr, BinOp):
            self._eval(expr.left, sigma, config, call)
            self._eval(expr.right, sigma, config, call)
            return frozenset()
        if isinstance(expr, FieldAccess):
            self._eval(expr.receiver, sigma, config, call)
            return frozenset()
        if isinstance(expr, (Const, This, New)):
            return frozenset()
        return self.abstract_eval(sigma, expr, config)

    def _apply(self, closure, args, config, call):
        unit = self.units[closure.code]
        callee = Config(closure.code, push(call.site, config.ctx, self.k), closure.env)
        return self._enter(callee, unit.params, args, config, call)

    def _enter(self, callee, params, args, config, call):
        if call.commit:
            self._discover(callee)
            edge = CallEdge(config.code, callee.code, call.site, call.tag)
            if edge not in self.edges:
                self.edges.add(edge)
                self.changed = True
            for param, values in zip(params, args):
                self._grow(self.entries[callee], param.name, values)
                self._grow(self.store, Slot(callee.code, param.name, callee.ctx), values)
        return self.returned.get(callee, frozenset())

    def _callees(self, expr, code):
        owner = self.owners[code]
        class_name = None
        if isinstance(expr.receiver, This):
            class_name = self.owner_class.get(owner)
        elif isinstance(expr.receiver, Var):
            declared = self.units[owner].declared_type(expr.receiver.name)
            if isinstance(declared, BaseType):
                class_name = declared.name
        cls = self.program.cls(class_name) if class_name else None
        if cls is not None and cls.method(expr.method) is not None:
            return [cls.method(expr.method)]
        return [m for c in self.program.classes for m in c.methods if m.name == expr.method]

    # --- entry and join ---

    def flow_lambda(self, config):
        """Entry state: each formal bound to what the known callers pass."""
        if config not in self.known:
            return BOTTOM
        unit = self.units[config.code]
        formals = self.entries.get(config, {})
        return AbstractState({
            Slot(config.code, p.name, config.ctx): formals.get(p.name, frozenset())
            for p in unit.params
        })

    def join_at(self, config, ordinal, outs=None):
        outs = self.states if outs is None else outs
        states = []
        for pred in self.bodies[config.code].preds[ordinal]:
            if pred == ENTRY:
                states.append(self.flow_lambda(config))
            else:
                states.append(outs.get((config, pred), BOTTOM))
        return join(states)

    def callers(self, code):
        return frozenset(edge.site for edge in self.edges if edge.callee == code)

    # --- fixpoint ---

    def seed(self, entries=None):
        methods = entries or [md for cls in self.program.classes for md in cls.methods]
        for md in methods:
            self._discover(Config(md.lid, (), ()))

    def run_round(self):
        """One pass over every known configuration; True when anything grew."""
        self.changed = False
        i = 0
        while i < len(self.configs):
            config = self.configs[i]
            outs = {}
            for ordinal in range(len(self.bodies[config.code].stmts)):
                sigma = self.join_at(config, ordinal, outs)
                outs[(config, ordinal)] = self.flow(StmtId(config.code, ordinal), sigma, config)
            for key, state in outs.items():
                if self.states.get(key) != state:
                    self.states[key] = state
                    self.changed = True
            i += 1
        return self.changed

    def solve(self, entries=None):
        self.seed(entries)
        rounds = 0
        while self.run_round():
            rounds += 1
            logger.debug(f'k={self.k} round {rounds}: {len(self.configs)} configurations')
        logger.info(f'k={self.k} fixpoint after {rounds + 1} rounds, {len(self.configs)} configurations')
        return self.result()

    def result(self):
        return AnalysisResult(
            k=self.k,
            table=self.table,
            slots={slot: values for slot, values in self.store.items() if values or slot.scope in self.units},
            states=dict(self.states),
            edges=frozenset(self.edges),
            returned=dict(self.returned),
            configs=tuple(self.configs),
            owners=dict(self.owners),
        )


@dataclass
class _CallContext:
    site: CallSite
    tag: str
    commit: bool
    made: bool = False


def solve_0cfa(program, entries=None):
    return FlowAnalysis(program, 0).solve(entries)


def solve_kcfa(program, k, entries=None):
    if k < 1:
        raise ValueError(f'call-string length must be at least 1, got {k}')
    return FlowAnalysis(program, k).solve(entries)


def solve(program, k=0, entries=None):
    return FlowAnalysis(program, k).solve(entries)
