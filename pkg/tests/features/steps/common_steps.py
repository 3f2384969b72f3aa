"""Steps and scenario state shared across the capability specs.

Programs come from the corpus through tests/support/factories.py; steps keep what they
load or produce in ``ctx`` under a fixed set of keys: ``program`` (parsed source or
target), ``reports``, ``diff``, ``result``, ``cfg``, ``error``.
"""
import pytest
from pytest_bdd import given, parsers

from tests.support.factories import STEP_BUDGET, load_fixture, load_source, single_method


@pytest.fixture
def ctx():
    """Mutable per-scenario state, with the knobs a Given may turn preset."""
    return {'budget': STEP_BUDGET, 'flatten': True, 'mutate': False}


def parse_args(text):
    return [int(part) for part in text.split(',')]


# ── shared givens ─────────────────────────────────────────────────────────────


@given(parsers.parse('the corpus program "{name}"'))
def _corpus_program(ctx, name):
    ctx['name'] = name
    ctx['program'] = load_source(name)


@given('the flattened FibGen listing')
def _fixture_listing(ctx):
    ctx['program'] = load_fixture('fib_flat')


@given(parsers.parse('a program whose method has a local called "{name}"'))
def _reserved_local(ctx, name):
    from source_syntax import parse_source

    text = single_method(f'    L1: {name} = x + 1;\n    L2: return {name};\n', locals_=f'        int {name};\n')
    ctx['program'] = parse_source(text)


@given(parsers.parse('a step budget of {budget:d}'))
def _budget(ctx, budget):
    ctx['budget'] = budget


@given('flattening is off')
def _no_flatten(ctx):
    ctx['flatten'] = False


@given('a fault is planted in the translation')
def _mutate(ctx):
    ctx['mutate'] = True
