"""Running programs on both engines and comparing them.

A call sequence names a class, a method and a list of arguments; every call of the
sequence goes to the same freshly allocated receiver, so state left in fields by one
call is visible to the next. The differential check runs each sequence through the
source interpreter and through the interpreter of the obfuscated program and compares
outcome, rendered value and printed lines call by call.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

from ast_source import preprocess_while_entries, validate
from cps_translate import ID_RAISE, plant_fault, translate_program
from interp_source import BlockTracer, GEnvS, Raised, SourceInterpreter
from interp_target import Observer, TargetInterpreter
from logging_config import phase, set_method_context
from reports import DiffReport, DiffRow, RunReport, compare_runs
from runtime import (
    Effects,
    EvalError,
    FjobfError,
    Loc,
    ResourceLimitExceeded,
    StepBudget,
    Store,
    deep_recursion,
    parse_literal,
    render_value,
)
from source_syntax import parse_source
from target_syntax import parse_target

logger = logging.getLogger(__name__)

SOURCE_SUFFIX = '.ssafj'
TARGET_SUFFIX = '.fjl'


class WrongFileKind(FjobfError):
    pass


class InvalidProgram(FjobfError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(f'{len(self.violations)} violation(s): {self.violations[0]}')


class InputsError(FjobfError):
    pass


# --- Loading ---


def read_program(path):
    """Parse a source or target file, chosen by suffix."""
    path = Path(path)
    text = path.read_text(encoding='utf-8')
    with phase('parse'):
        if path.suffix == SOURCE_SUFFIX:
            return parse_source(text)
        if path.suffix == TARGET_SUFFIX:
            return parse_target(text)
    raise WrongFileKind(f'{path}: expected a {SOURCE_SUFFIX} or {TARGET_SUFFIX} file')


def prepare_source(program):
    """Validated and while-normalized copy of a source program."""
    with phase('validate'):
        violations = validate(program)
    if violations:
        raise InvalidProgram(violations)
    return preprocess_while_entries(program)


def obfuscate(program, flatten=True):
    with phase('translate'):
        return translate_program(prepare_source(program), flatten=flatten)


# --- Inputs ---


@dataclass(frozen=True)
class CallSequence:
    class_name: str
    method: str
    args: tuple

    def describe(self, arg):
        return f'{self.class_name}.{self.method}({render_value(arg)})'


def parse_inputs(text):
    """``Class.method: a, b, c`` per line; blank lines and ``#`` comments are skipped."""
    sequences = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        head, sep, tail = line.partition(':')
        class_name, dot, method = head.strip().partition('.')
        if not sep or not dot or not class_name or not method:
            raise InputsError(f'line {lineno}: expected "Class.method: arg, ...", got {raw.strip()!r}')
        try:
            args = tuple(parse_literal(a) for a in tail.split(',') if a.strip())
        except ValueError as exc:
            raise InputsError(f'line {lineno}: {exc}') from None
        sequences.append(CallSequence(class_name.strip(), method.strip(), args))
    return sequences


def _render(value, store):
    # Heap addresses differ between engines; objects compare by class.
    if isinstance(value, Loc):
        return store.get(value).class_name if value.address in store.cells else 'null'
    return render_value(value, store)


# --- Source engine ---


def run_source(program, sequence, step_budget, recursion_limit, trace=False):
    """Reports for each call of ``sequence`` on a prepared source program."""
    genv = GEnvS.from_program(program)
    store = Store()
    receiver = genv.instantiate(store, sequence.class_name)
    md = genv.method(sequence.class_name, sequence.method)
    set_method_context(f'{sequence.class_name}.{sequence.method}')
    reports = []
    for arg in sequence.args:
        budget, effects = StepBudget(step_budget), Effects()
        tracer = BlockTracer(store) if trace else None
        interpreter = SourceInterpreter(genv, budget, effects, tracer)
        result = None
        with phase('interpret'):
            try:
                with deep_recursion(recursion_limit):
                    outcome = interpreter.eval_method(md, receiver, arg, store)
            except ResourceLimitExceeded as exc:
                report = RunReport(call=sequence.describe(arg), outcome='resource-limit', value=str(exc))
            except EvalError as exc:
                report = RunReport(call=sequence.describe(arg), outcome='error', value=str(exc))
            else:
                raised = isinstance(outcome, Raised)
                result = outcome.payload if raised else outcome.value
                report = RunReport(call=sequence.describe(arg), outcome='exception' if raised else 'normal',
                                   value=_render(result, store))
        report.printed = list(effects.printed)
        report.heap = store.snapshot([receiver, result])
        report.steps = budget.used
        if tracer is not None:
            report.trace = tracer.records
        reports.append(report)
    set_method_context()
    return reports


# --- Target engine ---


class _RaiseWatcher(Observer):
    """Notices the exception continuation of the outermost call being invoked."""

    def __init__(self, id_raise_lid):
        self.id_raise_lid = id_raise_lid
        self.payload = None
        self.raised = False

    def on_call(self, caller_lid, callee_lid, args):
        if callee_lid == self.id_raise_lid and not self.raised:
            self.raised = True
            self.payload = args[0] if args else None


def run_target(program, sequence, step_budget, recursion_limit, observer=None):
    """Reports for each call of ``sequence`` on an obfuscated program."""
    cls = program.cls(sequence.class_name)
    if cls is None:
        raise EvalError(f'unknown class {sequence.class_name!r}')
    md = cls.method(sequence.method)
    if md is None:
        raise EvalError(f'{sequence.class_name} has no method {sequence.method!r}')
    id_raise = program.function(ID_RAISE)
    store = Store()
    receiver = TargetInterpreter(program).instantiate(store, sequence.class_name)
    set_method_context(f'{sequence.class_name}.{sequence.method}')
    reports = []
    for arg in sequence.args:
        budget, effects = StepBudget(step_budget), Effects()
        watcher = _RaiseWatcher(id_raise.lid if id_raise is not None else None)
        interpreter = TargetInterpreter(program, budget, effects, _Fanout(watcher, observer))
        result = None
        with phase('interpret'):
            try:
                with deep_recursion(recursion_limit):
                    value, _ = interpreter.eval_t_method(md, receiver, arg, store)
            except ResourceLimitExceeded as exc:
                report = RunReport(call=sequence.describe(arg), outcome='resource-limit', value=str(exc))
            except EvalError as exc:
                report = RunReport(call=sequence.describe(arg), outcome='error', value=str(exc))
            else:
                result = watcher.payload if watcher.raised else value
                report = RunReport(call=sequence.describe(arg), outcome='exception' if watcher.raised else 'normal',
                                   value=_render(result, store))
        report.printed = list(effects.printed)
        report.heap = store.snapshot([receiver, result])
        report.steps = budget.used
        reports.append(report)
    set_method_context()
    return reports


class _Fanout(Observer):
    def __init__(self, *observers):
        self.observers = [o for o in observers if o is not None]

    def on_bind(self, scope_lid, name, value):
        for o in self.observers:
            o.on_bind(scope_lid, name, value)

    def on_call(self, caller_lid, callee_lid, args):
        for o in self.observers:
            o.on_call(caller_lid, callee_lid, args)


# --- Differential check ---


def diff(program, sequences, step_budget, recursion_limit, flatten=True, mutate=False):
    """Run every sequence on the source program and on its translation."""
    prepared = prepare_source(program)
    with phase('translate'):
        target = translate_program(prepared, flatten=flatten)
        if mutate:
            target = plant_fault(target)
    report = DiffReport(flatten=flatten, mutated=mutate)
    for index, sequence in enumerate(sequences):
        source_runs = run_source(prepared, sequence, step_budget, recursion_limit)
        target_runs = run_target(target, sequence, step_budget, recursion_limit)
        for position, (s, t) in enumerate(zip(source_runs, target_runs)):
            differing = compare_runs(s, t)
            report.rows.append(DiffRow(
                sequence=index,
                position=position,
                input=s.call,
                source=s,
                target=t,
                verdict='disagree' if differing else 'agree',
                fields=differing,
            ))
            if differing:
                logger.warning(f'{s.call}: engines disagree on {", ".join(differing)}')
    logger.info(f'compared {len(report.rows)} calls over {len(sequences)} sequences')
    return report
