#!/usr/bin/env python3
"""Regenerate schemas/*.schema.json from the report models in shared/reports.py.

Usage:
    python scripts/export_schemas.py           # rewrite every schema file
    python scripts/export_schemas.py --check   # exit 1 if a checked-in file is stale

The CLI writes these reports; tests/unit/test_reports.py fails when a model grows or
loses a field the checked-in schema does not know about.
"""
import argparse
import json
import pathlib
import sys

REPO_ROOT = pathlib.Path(__file__).resolve().parents[1]
SCHEMA_DIR = REPO_ROOT / 'schemas'
sys.path.insert(0, str(REPO_ROOT / 'shared'))

from reports import AnalysisReport, CheckReport, DiffReport, PotencyReport, RunReport  # noqa: E402

SCHEMAS = {
    'check_report': CheckReport,
    'run_report': RunReport,
    'diff_report': DiffReport,
    'analysis_report': AnalysisReport,
    'potency_report': PotencyReport,
}


def render(model):
    return json.dumps(model.model_json_schema(), indent=2, ensure_ascii=False) + '\n'


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('--check', action='store_true', help='report stale files instead of writing them')
    args = parser.parse_args(argv)

    stale = []
    for name, model in SCHEMAS.items():
        path = SCHEMA_DIR / f'{name}.schema.json'
        text = render(model)
        if args.check:
            if not path.exists() or json.loads(path.read_text(encoding='utf-8')) != json.loads(text):
                stale.append(path.name)
            continue
        path.write_text(text, encoding='utf-8')
        print(f'wrote {path.relative_to(REPO_ROOT)}')
    if stale:
        print(f'stale schemas: {", ".join(stale)}; run scripts/export_schemas.py', file=sys.stderr)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
