"""Shared scaffolding for the characterization tests.

These pin down behaviour of the whole pipeline on the corpus and on the hand-written
flattened FibGen listing: golden values, the analysis tables and graph shapes. Solving
the analyses takes a moment, so results are shared per module.
"""
import pytest

from cfa import solve_0cfa, solve_kcfa
from tests.support.factories import load_fixture


@pytest.fixture(scope='module')
def fixture_program():
    return load_fixture('fib_flat')


@pytest.fixture(scope='module')
def zero_cfa(fixture_program):
    return solve_0cfa(fixture_program)


@pytest.fixture(scope='module')
def one_cfa(fixture_program):
    return solve_kcfa(fixture_program, 1)


@pytest.fixture(scope='module')
def get_lid(fixture_program):
    return fixture_program.cls('FibGen').method('get').lid
