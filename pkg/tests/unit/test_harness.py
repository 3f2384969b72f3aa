"""Tests for shared/harness.py: loading, inputs, both engines and the differential check."""

import pytest

from ast_source import SourceProgram
from ast_target import TargetProgram
from harness import (
    CallSequence,
    InputsError,
    InvalidProgram,
    WrongFileKind,
    diff,
    parse_inputs,
    prepare_source,
    read_program,
    run_source,
)
from source_syntax import parse_source
from tests.support.factories import (
    RECURSION_LIMIT,
    STEP_BUDGET,
    corpus_path,
    load_prepared,
    load_source,
    sequence,
    single_method,
    source_runs,
)

pytestmark = pytest.mark.obfuscation


class TestReadProgram:
    def test_source_by_suffix(self):
        assert isinstance(read_program(corpus_path('fib')), SourceProgram)

    def test_target_by_suffix(self):
        assert isinstance(read_program(corpus_path('fib_flat', '.fjl')), TargetProgram)

    def test_other_suffix_is_rejected(self):
        with pytest.raises(WrongFileKind):
            read_program(corpus_path('fib', '.inputs'))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            read_program(tmp_path / 'absent.ssafj')


class TestParseInputs:
    def test_lines_comments_and_literals(self):
        text = '# header\n\nA.m: 1, -2, true\nB.n: null  # trailing\nC.o:\n'
        assert parse_inputs(text) == [
            CallSequence('A', 'm', (1, -2, True)),
            CallSequence('B', 'n', (None,)),
            CallSequence('C', 'o', ()),
        ]

    @pytest.mark.parametrize('line', ['A.m 1, 2', 'Am: 1', '.m: 1', 'A.: 1'])
    def test_malformed_entry(self, line):
        with pytest.raises(InputsError, match='line 1'):
            parse_inputs(line)

    def test_bad_literal_names_the_line(self):
        with pytest.raises(InputsError, match='line 2'):
            parse_inputs('A.m: 1\nA.m: 1.5\n')

    def test_corpus_inputs_parse(self):
        sequences = parse_inputs(corpus_path('fib', '.inputs').read_text())
        assert sequences[0] == CallSequence('FibGen', 'get', (3, 2, 5))
        assert len(sequences) == 4


class TestPrepareSource:
    def test_invalid_program_lists_violations(self):
        with pytest.raises(InvalidProgram) as excinfo:
            prepare_source(load_source('invalid/reassigned'))
        assert [v.rule for v in excinfo.value.violations] == ['single-assignment']

    def test_valid_program_is_preprocessed(self):
        prepared = load_prepared('multi_entry')
        assert prepared.cls('Retry').method('run') is not None

    def test_preprocessing_keeps_results_when_raise_phis_are_partial(self):
        calls = sequence('Split.run', 5, 50, -3, 10)
        raw = run_source(load_source('partial_raise'), calls, STEP_BUDGET, RECURSION_LIMIT)
        prepared = run_source(load_prepared('partial_raise'), calls, STEP_BUDGET, RECURSION_LIMIT)
        assert [(r.outcome, r.value) for r in raw] == [('normal', '6'), ('normal', '9'), ('normal', '-2'), ('normal', '6')]
        assert [(r.outcome, r.value) for r in prepared] == [(r.outcome, r.value) for r in raw]


class TestRunSource:
    def test_state_carries_between_calls(self):
        reports = source_runs(load_source('counter'), 'Counter.next', 1, 2, 3)
        assert [r.value for r in reports] == ['20', '60', '120']
        assert [r.printed for r in reports] == [['counter at 2'], ['counter at 6'], ['counter at 12']]

    def test_receiver_fields_are_recorded(self):
        reports = source_runs(load_source('counter'), 'Counter.next', 1, 2)
        assert [r.heap for r in reports] == [
            [{'class': 'Counter', 'fields': {'n': '2', 'step': '2'}}],
            [{'class': 'Counter', 'fields': {'n': '6', 'step': '2'}}],
        ]

    def test_exception_outcome(self):
        reports = source_runs(load_source('guard'), 'Guard.check', -1)
        assert (reports[0].outcome, reports[0].value) == ('exception', 'Exception')
        assert [obj['class'] for obj in reports[0].heap] == ['Guard', 'Exception']

    def test_resource_limit_outcome(self):
        reports = source_runs(load_source('sum'), 'Sum.upto', 1000, budget=50)
        assert reports[0].outcome == 'resource-limit'

    def test_evaluation_error_outcome(self):
        text = single_method('    L1: y_1 = x / 0;\n    L2: return y_1;\n', locals_='        int y_1;\n')
        reports = source_runs(parse_source(text), 'T.m', 1)
        assert reports[0].outcome == 'error'

    def test_trace_is_recorded_on_request(self):
        program = load_prepared('abs')
        reports = run_source(program, sequence('Abs.abs', -2), STEP_BUDGET, RECURSION_LIMIT, trace=True)
        assert reports[0].trace
        assert reports[0].steps > 0


class TestDiff:
    def test_corpus_program_agrees(self):
        report = diff(load_source('fib'), [sequence('FibGen.get', 3, 2, 5)], STEP_BUDGET, RECURSION_LIMIT)
        assert report.agree
        assert [row.verdict for row in report.rows] == ['agree'] * 3
        assert report.flatten is True

    def test_without_flattening(self):
        report = diff(load_source('nested_try'), [sequence('Nested.run', 1, 7)], STEP_BUDGET, RECURSION_LIMIT,
                      flatten=False)
        assert report.agree
        assert report.flatten is False

    def test_planted_fault_is_caught(self):
        report = diff(load_source('abs'), [sequence('Abs.abs', -7, 3)], STEP_BUDGET, RECURSION_LIMIT, mutate=True)
        assert not report.agree
        assert report.mutated
        assert report.rows[0].fields == ['value']

    def test_rows_are_numbered_per_sequence(self):
        sequences = [sequence('Abs.abs', 1, 2), sequence('Abs.abs', 3)]
        report = diff(load_source('abs'), sequences, STEP_BUDGET, RECURSION_LIMIT)
        assert [(row.sequence, row.position) for row in report.rows] == [(0, 0), (0, 1), (1, 0)]
        assert report.rows[2].input == 'Abs.abs(3)'

    def test_no_sequences(self):
        report = diff(load_source('abs'), [], STEP_BUDGET, RECURSION_LIMIT)
        assert report.rows == []
        assert report.agree
