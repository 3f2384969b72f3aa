"""Command-line front end of the fjobf toolchain.

The library modules under ``shared/`` import each other flat, the way the test suite
and ``pytest.ini`` put them on the path; the CLI does the same when it is started.
"""

import sys
from pathlib import Path

_ROOT = Path(__file__).resolve().parents[1]
for _path in (_ROOT, _ROOT / 'shared'):
    if str(_path) not in sys.path:
        sys.path.insert(0, str(_path))
