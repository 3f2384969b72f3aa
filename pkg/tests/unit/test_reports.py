"""Tests for shared/reports.py and the checked-in schemas that describe it."""

import json
from pathlib import Path

import pytest

from reports import (
    AnalysisReport,
    CheckReport,
    DiffReport,
    DiffRow,
    PotencyReport,
    RunReport,
    compare_runs,
)

SCHEMA_DIR = Path(__file__).resolve().parents[2] / 'schemas'

MODELS = {
    'check_report': CheckReport,
    'run_report': RunReport,
    'diff_report': DiffReport,
    'analysis_report': AnalysisReport,
    'potency_report': PotencyReport,
}


def _shape(schema):
    """Property names, required names and nested model names of a schema."""
    nested = {
        name: (sorted(sub.get('properties', {})), sorted(sub.get('required', [])))
        for name, sub in schema.get('$defs', {}).items()
    }
    return sorted(schema['properties']), sorted(schema.get('required', [])), nested


@pytest.mark.parametrize('name', sorted(MODELS))
def test_checked_in_schema_matches_model(name):
    checked_in = json.loads((SCHEMA_DIR / f'{name}.schema.json').read_text(encoding='utf-8'))
    assert _shape(checked_in) == _shape(MODELS[name].model_json_schema())
    assert checked_in['title'] == MODELS[name].__name__


def _run(outcome='normal', value='1', printed=()):
    return RunReport(call='T.m(1)', outcome=outcome, value=value, printed=list(printed))


def test_compare_runs_names_differing_fields():
    assert compare_runs(_run(), _run()) == []
    assert compare_runs(_run(), _run(value='2')) == ['value']
    assert compare_runs(_run(), _run(outcome='exception', printed=['x'])) == ['outcome', 'printed']


def test_reachable_heap_is_observable():
    a, b = _run(), _run()
    a.heap = [{'class': 'T', 'fields': {'n': '1'}}]
    b.heap = [{'class': 'T', 'fields': {'n': '2'}}]
    assert compare_runs(a, b) == ['heap']


def test_step_counts_are_not_observable():
    a, b = _run(), _run()
    b.steps = 99
    assert compare_runs(a, b) == []
    assert a.observable() == ('normal', '1', (), [])


def test_diff_report_agrees_only_when_every_row_does():
    row = DiffRow(sequence=0, position=0, input='T.m(1)', source=_run(), target=_run(), verdict='agree')
    report = DiffReport(flatten=True, rows=[row])
    assert report.agree
    report.rows.append(row.model_copy(update={'verdict': 'disagree', 'fields': ['value']}))
    assert not report.agree


def test_outcome_is_constrained():
    with pytest.raises(ValueError):
        RunReport(call='T.m(1)', outcome='crashed', value='')


def test_reports_round_trip_through_json():
    report = DiffReport(flatten=False, mutated=True, rows=[
        DiffRow(sequence=0, position=0, input='T.m(1)', source=_run(), target=_run(value='null'),
                verdict='disagree', fields=['value']),
    ])
    assert DiffReport.model_validate_json(report.model_dump_json()) == report
