"""Command-line front end: config round-trip, outputs, determinism and exit codes."""
import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from genkp import compare_tables
from genkp.cli import RunConfig, main
from conftest import kp_table

FREE = ["--phi-e", "0", "--phi-o", "1.5707963267948966", "--scattlen", "static"]


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_config_round_trip():
    cfg = RunConfig(model="kp", d=12.5, phi_e=-0.3, N_L=51, scattlen="static", step=1e-4,
                    q=0.1, spins=["a:-0.7:0.7", "b:-1.0:1.0"], sweep=True, c4=5.607e-57)
    assert RunConfig.from_ini(cfg.to_ini()) == cfg
    assert RunConfig.from_ini(RunConfig().to_ini()) == RunConfig()


def test_flags_override_config_file(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text(RunConfig(d=20.0, N_L=51).to_ini())
    assert main(["bands", "--config", str(ini), "--d", "9", "--dump-config"]) == 0
    cfg = RunConfig.from_ini(capsys.readouterr().out)
    assert (cfg.d, cfg.N_L) == (9.0, 51)


def test_free_bands_csv(tmp_path):
    out = tmp_path / "free.csv"
    assert main(["bands", "--model", "kp", "--bands", "3", "--out", str(out)] + FREE) == 0
    header, rows = read_csv(out)
    assert header == ["q", "E_1", "E_2", "E_3"]
    data = np.array(rows, float)
    assert np.all(np.diff(data[:, 0]) > 0)
    G = 2 * np.pi / 15.0
    q = data[:, 0]
    folded = np.sort(np.array([(q + m * G) ** 2 for m in range(-3, 4)]), axis=0)[:3].T
    assert np.max(np.abs(data[:, 1:] - folded)) < 1e-10


def test_csv_carries_full_precision(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bands", "--model", "kp", "--scattlen", "static", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    t = kp_table(15.0, "static", 3)
    for i in (0, 37, 100):
        assert [float(v) for v in rows[i][1:]] == list(t.bands[:, i])
        assert all(len(v.lstrip("-").replace(".", "").split("e")[0].lstrip("0")) <= 17 for v in rows[i])


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["bands", "--model", "kp", "--d", "10", "--nl", "31", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_model_both_writes_two_tables(tmp_path):
    out = tmp_path / "overlay.csv"
    assert main(["bands", "--model", "both", "--nl", "21", "--bands", "2", "--out", str(out)]) == 0
    h1, r1 = read_csv(tmp_path / "overlay_kp.csv")
    h2, r2 = read_csv(tmp_path / "overlay_qdt.csv")
    assert h1 == h2 and len(r1) == len(r2) == 21
    assert np.max(np.abs(np.array(r1, float) - np.array(r2, float))) < 1e-3


def test_compare_report(tmp_path):
    out = tmp_path / "cmp.json"
    assert main(["compare", "--nl", "11", "--bands", "2", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["schema_version"] == "1.0"
    assert set(rep) >= {"static", "energy", "params", "n_bands"}
    assert all(e >= 0 for e in rep["energy"]["epsilon"] + rep["static"]["epsilon"])
    assert rep["energy"]["epsilon"][1] < rep["static"]["epsilon"][1]


def test_compare_identical_tables_is_zero(kp15_static):
    assert np.all(compare_tables(kp15_static, kp15_static).epsilon == 0.0)


def test_off_grid_q_suggests_nearest(tmp_path, capsys):
    code = main(["bloch", "--model", "kp", "--nl", "21", "--q", "0.05", "--out", str(tmp_path / "b.csv")])
    err = capsys.readouterr().err
    assert code == 2
    assert "GridError" in err and "nearest" in err


def test_bloch_outputs(tmp_path):
    q = 2 * np.pi * 3 / (15.0 * 21)
    out = tmp_path / "bloch.csv"
    assert main(["bloch", "--model", "kp", "--nl", "21", "--q", repr(q), "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["x", "re", "im", "abs"]
    side = json.loads(out.with_suffix(".json").read_text())
    assert side["site_positions"] == [15.0 * j for j in range(-10, 11)]
    assert side["norm"] == pytest.approx(1.0, abs=1e-12)


def test_wannier_outputs(tmp_path):
    spreads = {}
    for kohn in ("kohn", "kohn_halfshift"):
        out = tmp_path / f"w_{kohn}.csv"
        assert main(["wannier", "--model", "kp", "--nl", "31", "--kohn", kohn, "--out", str(out)]) == 0
        side = json.loads(out.with_suffix(".json").read_text())
        assert side["norm"] == pytest.approx(1.0, abs=1e-10)
        spreads[kohn] = side["spread"]
    assert spreads["kohn_halfshift"] < spreads["kohn"]


def test_hubbard_outputs(tmp_path):
    out = tmp_path / "h.json"
    assert main(["hubbard", "--model", "kp", "--scattlen", "static", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert "spin_resolved" not in rep["kp"] and "sweep" not in rep["kp"]
    assert abs(rep["kp"]["J_wannier_1"]) == pytest.approx(5.8e-3, rel=0.03)

    out2 = tmp_path / "h2.json"
    assert main(["hubbard", "--model", "kp", "--scattlen", "static", "--nl", "51", "--sweep",
                 "--spin", "down:-0.7853981633974483:0.7853981633974483",
                 "--spin", "up:-1.0471975511965976:1.0471975511965976",
                 "--atom-mass", "86.909", "--c4", "5.607e-57", "--out", str(out2)]) == 0
    rep = json.loads(out2.read_text())
    assert set(rep["kp"]["spin_resolved"]["channels"]) == {"down", "up"}
    j1 = [abs(row["1"]) for _, row in sorted(rep["kp"]["sweep"].items(), key=lambda kv: float(kv[0]))]
    assert np.all(np.diff(j1) < 0)
    assert rep["si"]["Estar_hz"] == pytest.approx(411.0, rel=0.05)


def test_scales_and_errors(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["scales", "--atom-mass", "6.015", "--alpha", "164.1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["Estar_hz"] == pytest.approx(167e3, rel=0.05)
    assert main(["scales"]) == 2
    assert "DomainError" in capsys.readouterr().err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "genkp", "scales", "--atom-mass", "86.909", "--c4", "5.607e-57"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    assert json.loads(r.stdout)["schema_version"] == "1.0"
    r = subprocess.run([sys.executable, "-m", "genkp", "--help"], capture_output=True, text=True, check=False)
    assert r.returncode == 0 and "bands" in r.stdout
