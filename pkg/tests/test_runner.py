import json
import subprocess
import sys

import numpy as np
import pytest

from tubemass.cli import main
from tubemass.runner import EXPECTED_VIOLATION, emit_plot, run_scenario
from tubemass.scenario import SCHEMA, ScenarioError, bundled, bundled_dir, content_hash, load, validate

FORMS = bundled_dir() / "forms_mixed.json"


def _tube_config(**region):
    return {
        "schema_version": 1, "name": "tiny_tube", "task": "tube-mass", "seed": 1, "n": 2,
        "manifold": {"kind": "real_space"},
        "current": {"type": "divisor", "f": [{"exponents": [1, 0, 0, 0], "coeff_re": 1.0},
                                             {"exponents": [0, 0, 1, 0], "coeff_im": 1.0}]},
        "region": {"r": 0.9, "t_grid": [0.05, 0.1, 0.2], **region},
        "sampling": {"samples": 20000, "batches": 8},
        "expect": {"reference": "hyperplane_r2", "rtol": 0.1},
    }


def _write(tmp_path, config, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return path


@pytest.mark.parametrize("path", bundled(), ids=lambda p: p.stem)
def test_bundled_scenarios_validate(path):
    sc = load(path)
    assert sc.name == path.stem
    if "manifold" in sc.config:
        assert sc.manifold().n == sc.n


def test_every_schema_field_is_exercised():
    used = set()
    for path in bundled():
        cfg = json.loads(path.read_text())
        for key, value in cfg.items():
            used.add(key)
            if isinstance(value, dict):
                used.update(f"{key}.{k}" for k in value)
    declared = set()
    for key, spec in SCHEMA["properties"].items():
        declared.add(key)
        if spec.get("type") == "object":
            declared.update(f"{key}.{k}" for k in spec.get("properties", {}))
    assert declared <= used


def test_schema_rejections():
    cfg = _tube_config()
    for mutate in (lambda c: c.pop("seed"), lambda c: c.update(schema_version=2),
                   lambda c: c.update(task="nope"), lambda c: c.update(extra=1),
                   lambda c: c["region"].update(r=-1)):
        bad = json.loads(json.dumps(cfg))
        mutate(bad)
        with pytest.raises(ScenarioError):
            validate(bad)


def test_content_hash_is_git_blob_hash():
    assert content_hash(b"") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391"
    assert content_hash(b"hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"


def test_dimension_mismatches_raise(tmp_path):
    cfg = _tube_config()
    cfg["m"] = 1
    with pytest.raises(ScenarioError):
        load(_write(tmp_path, cfg)).manifold()
    cfg = _tube_config()
    cfg["current"]["f"][0]["exponents"] = [1, 0]
    with pytest.raises(ScenarioError):
        load(_write(tmp_path, cfg)).current()


def test_forms_scenario_report(tmp_path):
    rep = run_scenario(FORMS, tmp_path)
    assert rep.verdict == "pass"
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["metadata"]["config_hash"] == content_hash(FORMS.read_bytes())
    assert report["metadata"]["seed"] == 24
    assert (tmp_path / "forms.csv").read_text().startswith("quantity,value,reference\n")


def test_tube_scenario_with_plot(tmp_path):
    rep = run_scenario(_write(tmp_path, _tube_config()), tmp_path / "out", plot=True)
    assert rep.verdict == "pass"
    assert (tmp_path / "out" / "profile.csv").exists()
    assert all((tmp_path / "out" / f).exists() for f in rep.figures)


def test_emit_plot_is_deterministic(tmp_path):
    x = np.geomspace(0.01, 1, 6)
    a = emit_plot(x, x ** 2, tmp_path / "a.svg", yerr=0.1 * x, slope=2.0, title="t")
    b = emit_plot(x, x ** 2, tmp_path / "b.svg", yerr=0.1 * x, slope=2.0, title="t")
    assert a.read_bytes() == b.read_bytes()
    with pytest.raises(ValueError):
        emit_plot([], [], tmp_path / "c.svg")


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["schema"]) == 0
    assert json.loads(capsys.readouterr().out)["title"] == "tubemass scenario"

    cfg = _tube_config()
    cfg.pop("seed")
    assert main(["run", str(_write(tmp_path, cfg, "noseed.json"))]) == 2
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "broken.json").write_text("{not json")
    assert main(["run", str(tmp_path / "broken.json")]) == 2

    assert main(["run", str(_write(tmp_path, _tube_config(r=5.0), "big.json")),
                 "--out", str(tmp_path / "o")]) == 3

    assert main(["run", str(FORMS), "--out", str(tmp_path / "forms")]) == 0
    assert "forms_mixed: pass" in capsys.readouterr().out


def test_expected_violation_verdict(tmp_path, capsys):
    cfg = json.loads((bundled_dir() / "expint_divergent.json").read_text())
    assert main(["run", str(_write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == 0
    assert EXPECTED_VIOLATION in capsys.readouterr().out


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "tubemass.cli", "run", str(FORMS), "--out",
                          str(tmp_path)], capture_output=True, text=True, check=True)
    assert "pass" in out.stdout


def test_thread_cap_env(tmp_path, monkeypatch):
    cfg = _write(tmp_path, _tube_config())
    monkeypatch.setenv("TUBEMASS_THREADS", "1")
    one = run_scenario(cfg, tmp_path / "one")
    monkeypatch.setenv("TUBEMASS_THREADS", "3")
    three = run_scenario(cfg, tmp_path / "three")
    assert one.summary == three.summary
    assert (tmp_path / "one" / "profile.csv").read_bytes() == (tmp_path / "three" / "profile.csv").read_bytes()
