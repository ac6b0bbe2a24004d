import json
import subprocess
import sys

import pytest
import yaml

from chirpeit.cli import main
from chirpeit.scenario import preset


def write(tmp_path, cfg, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def small():
    cfg = preset("fig2")
    cfg["name"] = "small"
    cfg["grid"] = {"n_omega": 128, "ladder": 14}
    cfg["z_samples"] = [0.0, 1e10]
    cfg["z_end"] = 1e10
    cfg["outputs"] = {"spectrum": True}
    return cfg


def test_validate_preset_ok(capsys):
    assert main(["validate", "--scenario", "fig2"]) == 0
    assert capsys.readouterr().out.strip() == "ok"


def test_validate_failure_exit_code(tmp_path, capsys):
    cfg = small()
    cfg["control"]["omega2"] = 0.0
    cfg["probe"]["tau"] = 1e5
    assert main(["validate", "--config", write(tmp_path, cfg)]) == 1
    err = capsys.readouterr().err
    assert "undefined mixing angle" in err and "under-resolved spectrum" in err


def test_custom_needs_config(capsys):
    assert main(["run", "--scenario", "custom", "--out", "x"]) == 1


def test_run_custom_writes_tables(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--scenario", "custom", "--config", write(tmp_path, small()), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert "summary.json" in names and "spectrum_z1.0000e+10.csv" in names


def test_preset_with_override(tmp_path):
    over = {"grid": {"n_omega": 128, "ladder": 14}, "z_samples": [0.0], "outputs": {"spectrum": False}}
    out = tmp_path / "o"
    assert main(["run", "--scenario", "fig2", "--config", write(tmp_path, over), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["scenario"] == "fig2" and summary["config"]["grid"]["n_omega"] == 128


def test_numerical_failure_exit_code(tmp_path, capsys):
    cfg = small()
    cfg["medium"]["gamma_cb"] = 0.0
    assert main(["run", "--config", write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 2
    assert "two-photon pole" in capsys.readouterr().err


def test_converge(tmp_path, capsys):
    cfg = small()
    code = main(["converge", "--scenario", "fig2", "--config", write(tmp_path, cfg), "--truncations", "10,14",
                 "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "ladder" in out and "converged" in out
    rows = json.loads((tmp_path / "convergence.json").read_text())
    assert rows[0]["coarse"] == 10 and rows[0]["fine"] == 14


def test_bad_truncation_list():
    with pytest.raises(SystemExit) as exc:
        main(["converge", "--scenario", "fig2", "--truncations", "a,b"])
    assert exc.value.code == 2


def test_report(tmp_path, capsys):
    assert main(["report", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["sin2theta_fig2"] == pytest.approx(0.9992, abs=1e-4)
    assert rep["z0_fig8"] == pytest.approx(3.06e9, rel=0.01)
    assert rep["overlap"]["g5_vs_gaussian"]["closed_form"] == pytest.approx(0.1776, abs=1e-3)
    assert len(rep["fig2_peaks"]) == 9


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "chirpeit", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "converge" in res.stdout
