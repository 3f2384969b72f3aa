"""Steps for tests/features/capabilities/obfuscation/."""
from pytest_bdd import parsers, then, when

from ast_target import Apply, Lambda, MethodCall, walk
from cps_translate import TranslationError, check_cps_shapes
from harness import diff, obfuscate
from tests.support.factories import RECURSION_LIMIT, load_sequences


@when('I compare both engines on its recorded inputs')
def _compare(ctx):
    ctx['diff'] = diff(ctx['program'], load_sequences(ctx['name']), ctx['budget'], RECURSION_LIMIT,
                       flatten=ctx['flatten'], mutate=ctx['mutate'])


@when('I obfuscate it')
def _obfuscate(ctx):
    try:
        ctx['target'] = obfuscate(ctx['program'], flatten=ctx['flatten'])
    except TranslationError as exc:
        ctx['error'] = exc


@then('every call agrees')
def _agrees(ctx):
    assert ctx['diff'].rows
    assert ctx['diff'].agree, [row.input for row in ctx['diff'].rows if row.verdict != 'agree']


@then(parsers.parse('some call disagrees on its {field}'))
def _disagrees(ctx, field):
    assert any(field in row.fields for row in ctx['diff'].rows)


@then('no application in a method has an application as its function or argument')
def _flat(ctx):
    for cls in ctx['target'].classes:
        for md in cls.methods:
            roots = [d.init for d in md.locals if d.init is not None] + list(md.body)
            for node in (n for root in roots for n in walk(root)):
                if isinstance(node, Apply):
                    parts = (node.fn, *node.args)
                elif isinstance(node, MethodCall):
                    parts = (node.receiver, node.arg)
                else:
                    continue
                assert not any(isinstance(p, (Apply, MethodCall, Lambda)) for p in parts)


@then('every block function has the raise-then-continuation shape')
def _shapes(ctx):
    assert check_cps_shapes(ctx['target']) == []


@then(parsers.parse('obfuscation fails mentioning "{name}"'))
def _fails(ctx, name):
    assert 'target' not in ctx
    assert name in str(ctx['error'])
