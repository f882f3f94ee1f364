import logging

import pytest

from emdapprox.core.config import Settings
from emdapprox.core.defaults import BUILTIN_DEFAULTS, SolverDefaultsManager
from emdapprox.core.exceptions import (
    DomainError,
    EmdApproxError,
    InputError,
    RetryExhaustedError,
    RunError,
    SamplerStallError,
    SelfTestError,
)
from emdapprox.core.logging_utils import ProgressLogger, setup_logging


def test_missing_file_uses_builtin(defaults):
    assert defaults.source == "builtin"
    for section, values in BUILTIN_DEFAULTS.items():
        assert defaults.section(section) == values


def test_shipped_yaml_matches_builtin_table():
    shipped = SolverDefaultsManager()
    assert shipped.source != "builtin"
    for section, values in BUILTIN_DEFAULTS.items():
        assert shipped.section(section) == values, section


def test_file_values_win_over_builtin(tmp_path):
    path = tmp_path / "defaults.yaml"
    path.write_text("practical:\n  max_rounds: 12\nbogus:\n  x: 1\nmwu:\n  nope: 3\n")
    manager = SolverDefaultsManager(path)
    assert manager.get('practical', 'max_rounds') == 12
    assert manager.get('practical', 'explicit_limit') == BUILTIN_DEFAULTS['practical']['explicit_limit']
    assert manager.source == str(path)


def test_overrides_win_over_file(tmp_path):
    path = tmp_path / "defaults.yaml"
    path.write_text("practical:\n  max_rounds: 12\n")
    manager = SolverDefaultsManager(path)
    manager.set_user_overrides({'practical': {'max_rounds': 7}, 'unknown': {'a': 1}})
    assert manager.get('practical', 'max_rounds') == 7
    info = manager.get_configuration_info()
    assert info['user_overrides'] == {'practical': {'max_rounds': 7}}
    assert 'sampler' in info['sections']


def test_broken_yaml_falls_back(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("mwu: [unclosed\n")
    assert SolverDefaultsManager(path).source == "builtin"
    path.write_text("- a list\n")
    assert SolverDefaultsManager(path).source == "builtin"


def test_unknown_lookups(defaults):
    with pytest.raises(KeyError):
        defaults.get('mwu', 'missing')
    with pytest.raises(KeyError, match="Available"):
        defaults.section('missing')


def test_settings_read_prefixed_environment(monkeypatch):
    monkeypatch.setenv("EMDAPPROX_EPS", "0.1")
    monkeypatch.setenv("EMDAPPROX_MODE", "faithful")
    settings = Settings()
    assert settings.eps == 0.1
    assert settings.mode == "faithful"
    assert settings.seed == 0


def test_exit_codes_and_payloads():
    assert InputError("x").exit_code == 2
    assert DomainError("x").exit_code == 2
    assert RetryExhaustedError("x").exit_code == 3
    assert SelfTestError("x").exit_code == 4
    assert isinstance(InputError("x"), ValueError)
    assert isinstance(RunError("x"), RuntimeError)
    payload = SamplerStallError("stuck", attempts=5, budget=4).to_dict()
    assert payload == {"type": "SamplerStallError", "message": "stuck", "exit_code": 3, "attempts": 5, "budget": 4}
    assert issubclass(SamplerStallError, EmdApproxError)


def test_setup_logging_writes_the_file(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    logger = setup_logging("debug", log_file)
    logging.getLogger("emdapprox.test").debug("hello file")
    for handler in logger.handlers:
        handler.flush()
    assert "emdapprox.test - DEBUG - hello file" in log_file.read_text()
    assert len(logger.handlers) == 2
    setup_logging()
    assert len(logger.handlers) == 1


def test_progress_logger_counts():
    progress = ProgressLogger(logging.getLogger("tests.progress"), round_every=0)
    assert progress.round_every == 1
    progress.start_search(1.0, 2.0, 3)
    progress.start_run(0, 1.0)
    progress.log_round(1, 2, None, 0.0)
    progress.log_round(2, 2, 3, 0.5)
    progress.end_run(0, "certified", 2)
    progress.end_search(1.0)
    assert progress.total_runs == 1
    assert progress.total_rounds == 2
