import csv
import json

import pytest

from zakharov_goursat.cli import EXPERIMENTS, ConfigError, main, resolve_parameters


def test_empty_invocation_prints_usage(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_parameter_rejected(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("parameters:\n  nonsense: 3\n")
    assert main(["growth-rate", "--config", str(cfg)]) == 2
    cfg.write_text("experiment: physics\nmystery: 1\n")
    assert main(["physics", "--config", str(cfg)]) == 2
    with pytest.raises(ConfigError):
        resolve_parameters("growth-rate", {"k": 400}, {"bogus": 1})


def test_parameter_precedence(tmp_path):
    p = resolve_parameters("growth-rate", {"k": 100, "samples": 9}, {"k": "200"})
    assert p["k"] == 200.0 and p["samples"] == 9 and p["Ebar"] == EXPERIMENTS["growth-rate"].defaults["Ebar"]


def test_growth_rate_check_and_artifacts(tmp_path):
    out = tmp_path / "gr"
    assert main(["growth-rate", "--k", "400", "--rho-min", "4", "--rho-max", "12", "--check", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["parameters"]["k"] == 400.0 and manifest["passed"]
    assert "package" in manifest["code_version"]
    with open(out / "growth_rate.csv") as fh:
        header = next(csv.reader(fh))
    assert all(h.endswith("]") and "[" in h for h in header)
    assert (out / "plot_growth_rate.py").exists()


def test_failed_check_exit_status(tmp_path):
    assert main(["growth-rate", "--slope-tol", "1e-9", "--check", "--out", str(tmp_path)]) == 1
    # without --check a failed check does not change the status
    assert main(["growth-rate", "--slope-tol", "1e-9", "--out", str(tmp_path)]) == 0


def test_config_file_run(tmp_path):
    cfg = tmp_path / "c.yaml"
    out = tmp_path / "o"
    cfg.write_text(f"experiment: growth-rate\noutput_dir: {out}\nseed: 5\nparameters:\n  samples: 9\n")
    assert main(["growth-rate", "--config", str(cfg)]) == 0
    m = json.loads((out / "manifest.json").read_text())
    assert m["seed"] == 5 and m["parameters"]["samples"] == 9


def test_deterministic_outputs(tmp_path):
    for d in ("a", "b"):
        assert main(["physics", "--reference", "--out", str(tmp_path / d)]) == 0
        assert main(["kernel-validate", "--ks", "16", "--nt", "3", "--nz", "3", "--random-points", "4",
                     "--seed", "7", "--out", str(tmp_path / d)]) == 0
    for name in ("physics.csv", "kernel_envelopes.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_physics_reference_table(tmp_path, capsys):
    assert main(["physics", "--reference", "--check", "--out", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "A_bar" in text and "gamma_max" in text
    with open(tmp_path / "physics.csv") as fh:
        rows = {r[0]: r for r in csv.reader(fh)}
    assert float(rows["A_bar"][1]) == pytest.approx(2.53e3, rel=1e-2)
    assert rows["A_bar"][2] == "V"
