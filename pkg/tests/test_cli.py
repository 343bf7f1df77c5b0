"""Config layering, override naming, exit codes, and report artifacts."""

import json

import pytest

from cslab.cli import (
    ConfigError,
    DEFAULTS,
    apply_env_overrides,
    build_boundary,
    build_model,
    load_config,
    main,
)


def test_defaults_without_file():
    cfg = load_config(None, environ={})
    assert cfg["seed"] == DEFAULTS["seed"]
    assert cfg["model"] == DEFAULTS["model"]
    assert cfg["simulation"]["n"] == DEFAULTS["simulation"]["n"]
    assert cfg["model"] is not DEFAULTS["model"]  # defaults must stay pristine


def test_file_merge_and_types(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text(
        'seed = 7\n[model]\nalpha = 0.3\n[simulation]\nn = 500\nt_schedule = [2, 4]\n'
    )
    cfg = load_config(str(p), environ={})
    assert cfg["seed"] == 7
    assert cfg["model"]["alpha"] == 0.3
    assert cfg["model"]["c"] == DEFAULTS["model"]["c"]
    assert cfg["simulation"]["n"] == 500
    assert cfg["simulation"]["t_schedule"] == [2.0, 4.0]


def test_unknown_keys_rejected(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("[model]\nalpha_ = 0.3\n")
    with pytest.raises(ConfigError, match="model.alpha_"):
        load_config(str(p), environ={})
    p.write_text("nonsense = 1\n")
    with pytest.raises(ConfigError, match="nonsense"):
        load_config(str(p), environ={})
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "missing.toml"), environ={})


def test_type_errors_name_the_key(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('[simulation]\nn = "many"\n')
    with pytest.raises(ConfigError, match="simulation.n"):
        load_config(str(p), environ={})


def test_env_overrides_both_levels():
    cfg = load_config(None, environ={
        "CSL_SEED": "99",
        "CSL_MODEL_ALPHA": "0.7",
        "CSL_SIMULATION_T_SCHEDULE": "[5, 10]",
        "UNRELATED": "ignored",
    })
    assert cfg["seed"] == 99
    assert cfg["model"]["alpha"] == 0.7
    assert cfg["simulation"]["t_schedule"] == [5.0, 10.0]


def test_env_overrides_beat_file(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("seed = 7\n")
    cfg = load_config(str(p), environ={"CSL_SEED": "8"})
    assert cfg["seed"] == 8


def test_env_unknown_name_rejected():
    with pytest.raises(ConfigError, match="CSL_MODEL_NOPE"):
        apply_env_overrides(load_config(None, environ={}), {"CSL_MODEL_NOPE": "1"})


def test_build_model_and_boundary_dispatch():
    cfg = load_config(None, environ={})
    assert build_model(cfg).is_stable
    assert build_boundary(cfg).label == "monomial"
    cfg["boundary"]["kind"] = "monolog"
    cfg["boundary"]["gamma"] = 0.5
    assert build_boundary(cfg).label == "monolog"
    cfg["boundary"]["kind"] = "sine"
    with pytest.raises(ConfigError):
        build_boundary(cfg)
    cfg2 = load_config(None, environ={})
    cfg2["model"]["kind"] = "table"
    with pytest.raises(ConfigError, match="tail_file"):
        build_model(cfg2)


def test_main_selftest_exit_zero(tmp_path, capsys):
    code = main(["selftest", "--out", str(tmp_path), "--seed", "11"])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS" in out and "FAIL" not in out
    body = json.loads((tmp_path / "selftest" / "report.json").read_text())
    assert body["ok"] is True
    assert all(c["passed"] for c in body["checks"])


def test_main_classify_artifacts(tmp_path, capsys):
    code = main(["classify", "--out", str(tmp_path)])
    assert code == 0
    assert "Transient" in capsys.readouterr().out
    body = json.loads((tmp_path / "classify" / "report.json").read_text())
    assert body["schema_version"] == 1
    assert body["verdict"] == "Transient"  # report verdicts are display-cased
    assert (tmp_path / "classify" / "classify_integrand.svg").exists()


def test_main_exit_one_on_failed_verdict(tmp_path, monkeypatch, capsys):
    # a sloppy plateau tolerance declares convergence on a recurrent scenario,
    # contradicting the integral criterion: clean run, failing verdict
    monkeypatch.setenv("CSL_BOUNDARY_KIND", "monolog")
    monkeypatch.setenv("CSL_BOUNDARY_GAMMA", "0.5")
    monkeypatch.setenv("CSL_SIMULATION_N", "3000")
    monkeypatch.setenv("CSL_SIMULATION_PLATEAU_TOL", "0.2")
    code = main(["explosion", "--out", str(tmp_path)])
    assert code == 1
    assert "diagnostic failure" in capsys.readouterr().out.lower()


def test_main_exit_two_on_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[simulation]\nunknown_thing = 3\n")
    assert main(["classify", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_main_exit_two_on_numeric_error(tmp_path, monkeypatch, capsys):
    # envelope criterion refuses transient scenarios; surfaced as exit 2
    monkeypatch.setenv("CSL_SIMULATION_EMPIRICAL", "false")
    assert main(["envelope", "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err
