import logging

import pytest


@pytest.fixture(autouse=True)
def isolated_cli(tmp_path, monkeypatch):
    """Run every CLI test from an empty directory with a fresh log handler.

    ``main()`` installs its handler once per process on whatever stderr is current;
    capsys swaps stderr per test, so the handler is dropped again afterwards.
    """
    monkeypatch.chdir(tmp_path)
    yield
    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, '_fjobf_json', False)]:
        root.removeHandler(handler)
