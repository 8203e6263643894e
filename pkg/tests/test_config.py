from pathlib import Path

import pytest

from refleqt import config


def test_defaults(monkeypatch):
    for name in ("REFLEQT_MAX_CODE", "REFLEQT_TAUTOLOGY_ATOMS", "REFLEQT_SEED", "REFLEQT_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    assert config.max_code() == 2**14
    assert config.tautology_atom_limit() == 18
    assert config.default_seed() == 0
    assert config.log_level() == "INFO"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("REFLEQT_MAX_CODE", "4096")
    monkeypatch.setenv("REFLEQT_SEED", "11")
    monkeypatch.setenv("REFLEQT_LOG_LEVEL", "debug")
    assert config.max_code() == 4096
    assert config.default_seed() == 11
    assert config.log_level() == "DEBUG"


def test_non_integer_settings_are_rejected(monkeypatch):
    monkeypatch.setenv("REFLEQT_TAUTOLOGY_ATOMS", "many")
    with pytest.raises(ValueError, match="REFLEQT_TAUTOLOGY_ATOMS"):
        config.tautology_atom_limit()


def test_required_variables(monkeypatch):
    monkeypatch.delenv("REFLEQT_UNSET_FOR_TEST", raising=False)
    assert config.get_env_var("REFLEQT_UNSET_FOR_TEST", default="x") == "x"
    with pytest.raises(ValueError):
        config.get_env_var("REFLEQT_UNSET_FOR_TEST", required=True)


def test_shipped_assets_exist():
    assert Path(config.STANDARD_THEORY_FILE).exists()
    for name in ("nat_domain.thy", "nat_domain.tr", "reflect_stage0.ics", "reflect_nat.ics"):
        assert (config.ASSETS_DIR / name).exists()
