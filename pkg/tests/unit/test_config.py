import pytest
from pydantic import ValidationError

from config import Settings


@pytest.fixture(autouse=True)
def clear_env(monkeypatch):
    for key in ('FJOBF_STEP_BUDGET', 'FJOBF_RECURSION_LIMIT', 'FJOBF_FLATTEN', 'FJOBF_DEFAULT_K',
                'FJOBF_ISO_BUDGET', 'FJOBF_LOG_LEVEL', 'FJOBF_LOG_JSON'):
        monkeypatch.delenv(key, raising=False)


def test_default_settings(settings):
    """Settings load with their documented defaults when no env vars are set."""
    s = settings
    assert s.step_budget == 1_000_000
    assert s.recursion_limit == 200_000
    assert s.flatten is True
    assert s.default_k == 0
    assert s.iso_budget == 100_000
    assert s.log_level == 'INFO'
    assert s.log_json is True


def test_settings_from_env_vars(monkeypatch):
    monkeypatch.setenv('FJOBF_STEP_BUDGET', '500')
    monkeypatch.setenv('FJOBF_FLATTEN', 'false')
    monkeypatch.setenv('FJOBF_DEFAULT_K', '2')
    monkeypatch.setenv('FJOBF_LOG_LEVEL', 'debug')
    monkeypatch.setenv('FJOBF_LOG_JSON', '0')

    s = Settings(_env_file=None)
    assert s.step_budget == 500
    assert s.flatten is False
    assert s.default_k == 2
    assert s.log_level == 'DEBUG'
    assert s.log_json is False


def test_settings_from_env_file(tmp_path):
    env_file = tmp_path / '.env'
    env_file.write_text('FJOBF_ISO_BUDGET=42\nUNRELATED=ignored\n')

    s = Settings(_env_file=env_file)
    assert s.iso_budget == 42


@pytest.mark.parametrize('name, value', [
    ('FJOBF_STEP_BUDGET', '0'),
    ('FJOBF_STEP_BUDGET', 'lots'),
    ('FJOBF_RECURSION_LIMIT', '10'),
    ('FJOBF_DEFAULT_K', '-1'),
    ('FJOBF_LOG_LEVEL', 'TRACE'),
])
def test_invalid_values_fail_fast(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValidationError):
        Settings(_env_file=None)
