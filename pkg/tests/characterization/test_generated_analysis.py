"""Flow analysis of FibGen as the obfuscator itself emits it.

The generated ``get`` composes its blocks with more ``seq`` calls than the hand-written
listing, so the merged sets are larger; the shape is the same. Without context every
call's arguments meet in ``seq``'s formals, and one call site of context gives each
call its own argument back.
"""

import pytest

from cfa import solve_0cfa, solve_kcfa
from cfg import build_cfg, count_simple_cycles
from tests.support.factories import load_target

pytestmark = [pytest.mark.analysis, pytest.mark.p0]

FORMALS = ('first', 'second')


@pytest.fixture(scope='module')
def generated():
    return load_target('fib')


@pytest.fixture(scope='module')
def zero_cfa(generated):
    return solve_0cfa(generated)


@pytest.fixture(scope='module')
def one_cfa(generated):
    return solve_kcfa(generated, 1)


def _seq_scope(result):
    (scope,) = {key.scope for key in result.variables() if key.name == 'first'}
    return scope


def _by_context(result, name):
    scope = _seq_scope(result)
    return {ctx: codes for (key, ctx), codes in result.contextual().items() if key == (scope, name)}


@pytest.mark.parametrize('name', FORMALS)
def test_formals_merge_every_call_without_context(zero_cfa, name):
    assert len(zero_cfa.points_to(name, _seq_scope(zero_cfa))) >= 2


@pytest.mark.parametrize('name', FORMALS)
def test_one_call_site_of_context_separates_the_calls(one_cfa, name):
    contexts = _by_context(one_cfa, name)
    assert len(contexts) >= 2
    for ctx, codes in contexts.items():
        assert len(codes) == 1, (name, [str(site) for site in ctx], one_cfa.display(codes))


@pytest.mark.parametrize('name', FORMALS)
def test_contexts_stay_within_the_merged_answer(zero_cfa, one_cfa, name):
    merged = zero_cfa.points_to(name, _seq_scope(zero_cfa))
    per_call = set().union(*_by_context(one_cfa, name).values())
    assert len(per_call) >= 2
    assert per_call <= merged


def test_reconstructed_graph_has_spurious_cycles(generated, zero_cfa):
    cfg = build_cfg(zero_cfa, generated.cls('FibGen').method('get').lid)
    assert cfg.name == 'FibGen.get'
    assert count_simple_cycles(cfg) >= 2
