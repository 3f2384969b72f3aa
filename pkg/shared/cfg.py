"""Control-flow graphs: the source block graph, the graph an attacker reconstructs from
a flow analysis of the obfuscated program, and the measurements compared between them.
"""

import logging
from dataclasses import dataclass, field

import networkx as nx
from networkx.algorithms.isomorphism import DiGraphMatcher

import ast_source as src
from runtime import FjobfError

logger = logging.getLogger(__name__)

PLAIN = 'plain'


@dataclass
class Cfg:
    """Directed graph with display labels on nodes and t/f tags on edges."""

    graph: nx.DiGraph = field(default_factory=nx.DiGraph)
    entry: object = None
    name: str = 'cfg'

    def add_node(self, node, label=None):
        if node not in self.graph:
            self.graph.add_node(node, label=str(label if label is not None else node))

    def add_edge(self, a, b, tag=PLAIN):
        if self.graph.has_edge(a, b):
            self.graph.edges[a, b]['tags'].add(tag)
        else:
            self.graph.add_edge(a, b, tags={tag})

    @property
    def nodes(self):
        return set(self.graph.nodes)

    @property
    def edges(self):
        """(a, b, tag) triples; an edge taken under both arms carries each tag."""
        return {(a, b, tag) for a, b, tags in self.graph.edges(data='tags') for tag in tags}

    def label(self, node):
        return self.graph.nodes[node]['label']

    def labelled_edges(self):
        return {(self.label(a), self.label(b), tag) for a, b, tag in self.edges}

    def counts(self):
        return self.graph.number_of_nodes(), self.graph.number_of_edges()


# --- Reconstructed CFG ---


def build_cfg(result, entry):
    """Caller/callee graph of the code units reachable from ``entry``.

    ``entry`` is the ordinal of the method the attacker starts from; an edge a -> b
    means some statement of a may invoke b, tagged with the if arm it sits under.
    """
    cfg = Cfg(entry=entry, name=result.table[entry].display)
    cfg.add_node(entry, result.table[entry].display)
    succ = {}
    for edge in sorted(result.edges):
        succ.setdefault(edge.caller, []).append(edge)
    pending, seen = [entry], {entry}
    while pending:
        node = pending.pop()
        for edge in succ.get(node, ()):
            cfg.add_node(edge.callee, result.table[edge.callee].display)
            cfg.add_edge(node, edge.callee, edge.tag)
            if edge.callee not in seen:
                seen.add(edge.callee)
                pending.append(edge.callee)
    logger.info(f'reconstructed {cfg.name}: {cfg.graph.number_of_nodes()} nodes, {cfg.graph.number_of_edges()} edges')
    return cfg


# --- Source CFG ---


def source_cfg(md):
    """Block graph of a source method.

    A compound block branches into its regions: an if to both arm heads (t, f), a while
    to its body (t) and past the loop (f), a try to the try region. The last block of a
    region continues after the compound block, except in a while body, which loops back
    to the while. A throw goes to the head of the innermost enclosing catch region; a
    method call inside a try may also go there.
    """
    cfg = Cfg(name=md.name)
    if md.body:
        cfg.entry = md.body[0].label
    _region(cfg, md.body, after=None, handler=None)
    return cfg


def _region(cfg, blocks, after, handler):
    for i, block in enumerate(blocks):
        cfg.add_node(block.label, src.label_number(block.label) if src.label_number(block.label) >= 0 else block.label)
        nxt = blocks[i + 1].label if i + 1 < len(blocks) else after
        body = block.body
        if isinstance(body, src.IfElse):
            _branch(cfg, block.label, body.then_blocks, nxt, 't')
            _branch(cfg, block.label, body.else_blocks, nxt, 'f')
            _region(cfg, body.then_blocks, nxt, handler)
            _region(cfg, body.else_blocks, nxt, handler)
        elif isinstance(body, src.While):
            _branch(cfg, block.label, body.body, block.label, 't')
            _link(cfg, block.label, nxt, 'f')
            _region(cfg, body.body, block.label, handler)
        elif isinstance(body, src.TryCatch):
            catch_head = body.catch_blocks[0].label if body.catch_blocks else handler
            _branch(cfg, block.label, body.try_blocks, nxt, PLAIN)
            _region(cfg, body.try_blocks, nxt, catch_head)
            _region(cfg, body.catch_blocks, nxt, handler)
        elif isinstance(body, src.Throw):
            _link(cfg, block.label, handler, PLAIN)
        else:
            _link(cfg, block.label, nxt, PLAIN)
            if isinstance(body, src.MethodCall):
                _link(cfg, block.label, handler, PLAIN)


def _branch(cfg, label, region, fallback, tag):
    _link(cfg, label, region[0].label if region else fallback, tag)


def _link(cfg, a, b, tag):
    if b is None:
        return
    cfg.add_node(b, src.label_number(b) if src.label_number(b) >= 0 else b)
    cfg.add_edge(a, b, tag)


# --- Measurements ---


def count_simple_cycles(cfg):
    return sum(1 for _ in nx.simple_cycles(cfg.graph))


class BudgetExceeded(FjobfError):
    pass


class _BudgetedMatcher(DiGraphMatcher):
    """VF2 matcher that gives up after ``budget`` candidate pairs."""

    def __init__(self, host, pattern, budget):
        super().__init__(host, pattern)
        self.budget = budget
        self.explored = 0

    def syntactic_feasibility(self, host_node, pattern_node):
        self.explored += 1
        if self.explored > self.budget:
            raise BudgetExceeded(f'subgraph search exceeded {self.budget} states')
        return super().syntactic_feasibility(host_node, pattern_node)


@dataclass
class IsoOutcome:
    verdict: str  # 'yes', 'no' or 'budget-exceeded'
    explored: int
    mapping: dict | None = None


def subgraph_isomorphic(pattern, host, budget):
    """Does ``host`` contain a copy of ``pattern`` (edges preserved, extra edges allowed)?"""
    p, h = pattern.graph, host.graph
    if p.number_of_nodes() > h.number_of_nodes() or p.number_of_edges() > h.number_of_edges():
        return IsoOutcome('no', 0)
    matcher = _BudgetedMatcher(h, p, budget)
    try:
        mapping = next(matcher.subgraph_monomorphisms_iter(), None)
    except BudgetExceeded:
        logger.info(f'subgraph search gave up after {matcher.explored - 1} states')
        return IsoOutcome('budget-exceeded', matcher.explored - 1)
    if mapping is None:
        return IsoOutcome('no', matcher.explored)
    return IsoOutcome('yes', matcher.explored, {pn: hn for hn, pn in mapping.items()})


# --- DOT ---


def _quote(text):
    return '"' + str(text).replace('\\', '\\\\').replace('"', '\\"') + '"'


def to_dot(cfg):
    """Graphviz text; nodes carry display names, branch edges a t/f label."""
    ids = {node: f'n{i}' for i, node in enumerate(sorted(cfg.graph.nodes, key=str))}
    lines = [f'digraph {_quote(cfg.name)} {{']
    for node, node_id in ids.items():
        attrs = f'label={_quote(cfg.label(node))}'
        if node == cfg.entry:
            attrs += ', shape=box'
        lines.append(f'  {node_id} [{attrs}];')
    for a, b, tag in sorted(cfg.edges, key=lambda e: (ids[e[0]], ids[e[1]], e[2])):
        suffix = f' [label={_quote(tag)}]' if tag != PLAIN else ''
        lines.append(f'  {ids[a]} -> {ids[b]}{suffix};')
    lines.append('}')
    return '\n'.join(lines) + '\n'
