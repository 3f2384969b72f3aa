"""How much an obfuscated method costs an attacker who reconstructs its control flow."""

import logging

from cfa import FlowAnalysis
from cfg import build_cfg, count_simple_cycles, source_cfg, subgraph_isomorphic
from logging_config import phase
from reports import GraphCounts, PotencyReport, SubgraphCheck

logger = logging.getLogger(__name__)


def _counts(cfg):
    nodes, edges = cfg.counts()
    return GraphCounts(nodes=nodes, edges=edges, simple_cycles=count_simple_cycles(cfg))


def measure_potency(source, target, class_name, method_name, iso_budget, depths=(0, 1)):
    """Compare the source CFG of one method with the graphs recovered from its translation.

    ``source`` is the prepared source program and ``target`` its translation.
    """
    md = source.cls(class_name).method(method_name)
    wrapper = target.cls(class_name).method(method_name)
    with phase('cfg'):
        original = source_cfg(md)
    reconstructed, ambiguous, graphs = {}, {}, {}
    for k in depths:
        with phase('analyze'):
            result = FlowAnalysis(target, k).solve()
        with phase('cfg'):
            graphs[k] = build_cfg(result, wrapper.lid)
        reconstructed[f'k{k}'] = _counts(graphs[k])
        ambiguous[f'k{k}'] = sum(1 for codes in result.variables().values() if len(codes) > 1)
    with phase('cfg'):
        outcome = subgraph_isomorphic(original, graphs[depths[0]], iso_budget)
    logger.info(f'{class_name}.{method_name}: subgraph check {outcome.verdict} after {outcome.explored} states')
    return PotencyReport(
        method=f'{class_name}.{method_name}',
        source=_counts(original),
        reconstructed=reconstructed,
        ambiguous_variables=ambiguous,
        subgraph=SubgraphCheck(verdict=outcome.verdict, explored=outcome.explored, budget=iso_budget),
    )
