import pytest
from pydantic import ValidationError

from config import FtcSettings, LoggingSettings, LogLevel, SolverSettings, limits_from, load_settings, setup_logging
from ftc_core import ExplorationLimits


def test_defaults():
    config = FtcSettings()
    assert config.exploration.max_types == 256
    assert config.exploration.max_level == 32
    assert config.solver.tol == 1e-12
    assert config.logging.level == LogLevel.WARNING
    assert config.worker_threads == 1


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("FTC_DIM_THREADS", "4")
    monkeypatch.setenv("FTC_DIM_SOLVER__TOL", "1e-8")
    monkeypatch.setenv("FTC_DIM_EXPLORATION__MAX_TYPES", "12")
    config = FtcSettings()
    assert config.worker_threads == 4
    assert config.solver.tol == 1e-8
    assert config.solver.power_rtol == 1e-14
    assert config.exploration.max_types == 12
    assert config.exploration.max_level == 32


def test_empty_thread_variable_means_unset(monkeypatch):
    monkeypatch.setenv("FTC_DIM_THREADS", "")
    assert FtcSettings().threads is None


def test_solver_tolerances_are_ordered():
    with pytest.raises(ValidationError):
        SolverSettings(tol=1e-15)
    with pytest.raises(ValidationError):
        SolverSettings(tol=0.0)


def test_load_settings_reports_invalid_values(capsys):
    with pytest.raises(ValidationError):
        load_settings(threads=0)
    err = capsys.readouterr().err
    assert "💡 해결 방법" in err


def test_limits_from_settings_and_overrides():
    config = FtcSettings()
    assert limits_from(config) == ExplorationLimits(256, 32, 1_000_000)
    limits = limits_from(config, max_types=8, max_level=None, verify_depth=5)
    assert limits == ExplorationLimits(8, 32, 1_000_000)


def test_summary_mentions_limits():
    summary = FtcSettings().get_summary()
    assert summary["project"] == "ftc-dim v1.0.0"
    assert "max_types=256" in summary["limits"]
    assert summary["threads"] == 1


def test_file_logging(tmp_path):
    config = FtcSettings().model_copy(update={
        "logging": LoggingSettings(log_to_file=True, log_file_path=tmp_path / "logs"),
    })
    setup_logging(config, "DEBUG")
    assert (tmp_path / "logs").is_dir()
    setup_logging(FtcSettings())
