import json

import pytest
from pydantic import ValidationError

from ratlimits.config import Settings, configure, get_settings, load_settings
from ratlimits.errors import (
    ContinuityFailure,
    HypothesisUnmet,
    NotCauchy,
    RatLimitsError,
    SchemaError,
)


def test_defaults():
    s = Settings()
    assert s.tau_pt == 1e-9
    assert s.harmonic_cutoff == 8
    assert s.burn_in == 10
    assert s.seed == 20240917
    assert s.run_log_enabled is False


def test_environment_variables(monkeypatch):
    monkeypatch.setenv("RATLIMITS_SEED", "42")
    monkeypatch.setenv("RATLIMITS_TAU_GLUE", "0.001")
    s = load_settings()
    assert s.seed == 42
    assert s.tau_glue == 0.001


def test_config_file_and_override_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("RATLIMITS_SEED", "1")
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"seed": 2, "burn_in": 3}), encoding="utf-8")
    from_file = load_settings(path)
    assert (from_file.seed, from_file.burn_in) == (2, 3)
    flagged = load_settings(path, seed=5, threads=None)
    assert flagged.seed == 5
    assert flagged.threads == 0


def test_unknown_key_is_a_schema_error(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"tau_typo": 1.0}), encoding="utf-8")
    with pytest.raises(SchemaError) as info:
        load_settings(path)
    assert info.value.exit_code == 2
    assert info.value.details["errors"]


@pytest.mark.parametrize("text", ["[1, 2]", "{not json", ""])
def test_unreadable_config_files(tmp_path, text):
    path = tmp_path / "cfg.json"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(SchemaError):
        load_settings(path)


def test_out_of_range_values_are_rejected():
    with pytest.raises(SchemaError):
        load_settings(tau_pt=-1.0)
    with pytest.raises(SchemaError):
        load_settings(harmonic_cutoff=0)


def test_settings_are_frozen():
    s = Settings()
    with pytest.raises(ValidationError):
        s.seed = 3


def test_configure_installs_and_restores():
    custom = Settings(seed=99, threads=1)
    configure(custom)
    assert get_settings() is custom
    configure(None)
    assert get_settings().seed == Settings().seed


def test_resolved_threads():
    assert Settings(threads=3).resolved_threads() == 3
    assert Settings(threads=0).resolved_threads() >= 1


def test_error_exit_codes_and_reports():
    assert SchemaError().exit_code == 2
    assert NotCauchy().exit_code == 3
    assert ContinuityFailure().exit_code == 3
    assert HypothesisUnmet().exit_code == 4
    err = NotCauchy("level 2 did not settle", level=2, rate=0.9)
    assert isinstance(err, RatLimitsError)
    assert err.to_report() == {
        "error": "NotCauchy",
        "message": "level 2 did not settle",
        "details": {"level": 2, "rate": 0.9},
    }
    assert str(HypothesisUnmet()) == "HypothesisUnmet"
