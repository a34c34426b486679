import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from regspec import spectral
from regspec.cli import main
from regspec.graph import read_graphs
from regspec.spectral import full_spectrum, q_param
from regspec.harness import verify_digests


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_and_spectrum_roundtrip(tmp_path, capsys):
    path = tmp_path / "g.txt"
    assert run(capsys, "sample", "--n", "10", "--d", "4", "--seed", "3", "--out", str(path))[0] == 0
    code, out, _ = run(capsys, "spectrum", "--in", str(path))
    eigs = json.loads(out)["eigenvalues"]
    assert code == 0 and len(eigs) == 10 and eigs[0] == pytest.approx(4.0)
    code, out, _ = run(capsys, "spectrum", "--in", str(path), "--method", "householder-ql")
    np.testing.assert_allclose(json.loads(out)["eigenvalues"], eigs, atol=1e-10)


def test_spectrum_extremes(capsys):
    code, out, _ = run(capsys, "spectrum", "--n", "30", "--d", "10", "--k", "2")
    res = json.loads(out)
    assert code == 0 and len(res["top"]) == 2 and len(res["bottom"]) == 2


def test_green(capsys):
    code, out, _ = run(capsys, "green", "--n", "40", "--d", "12", "--re", "0.3", "--im", "0.5",
                       "--entry", "0", "1")
    res = json.loads(out)
    assert code == 0 and res["entry"]["index"] == [0, 1]
    assert abs(complex(*res["gbar"]) - complex(*res["m"])) < 0.5


def test_green_needs_source(capsys):
    code, _, err = run(capsys, "green", "--re", "0", "--im", "1")
    assert code == 2 and "--in" in err


def test_goe(tmp_path, capsys):
    code, out, _ = run(capsys, "goe", "--n", "20", "--trials", "3", "--seed", "1")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][:3] == ["sample", "seed", "top_1"] and len(rows) == 4
    path = tmp_path / "goe.csv"
    assert run(capsys, "goe", "--n", "20", "--trials", "3", "--seed", "1", "--out", str(path))[0] == 0
    assert path.read_text() == out


def test_experiment_outputs_deterministic(tmp_path, capsys):
    args = ["rigidity", "--config", "configs/smoke.json"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "b"), "--threads", "2")[0] == 0
    for name in ("trials.csv",):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert verify_digests(tmp_path / "a")


def test_flags_override_config(tmp_path, capsys):
    out = tmp_path / "o"
    assert run(capsys, "rigidity", "--config", "configs/smoke.json", "--trials", "3", "--out", str(out))[0] == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["trials"] == 3


def test_config_error_exit_2(tmp_path, capsys):
    code, _, err = run(capsys, "rigidity", "--N", "9", "--d", "3", "--trials", "1", "--out", str(tmp_path))
    assert code == 2 and "config error" in err
    code, _, err = run(capsys, "rigidity", "--N", "100", "--d", "70", "--trials", "1", "--out", str(tmp_path))
    assert code == 2


def test_regime_warning_printed(tmp_path, capsys):
    code, _, err = run(capsys, "rigidity", "--N", "60", "--d", "6", "--trials", "1", "--out", str(tmp_path))
    assert code == 0 and "warning:" in err


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["rigidity", "--bogus", "1"])
    assert exc.value.code == 2


def test_resource_guard_exit_4(tmp_path, capsys):
    code, _, err = run(capsys, "verify-switching", "--N", "10", "--d", "3", "--out", str(tmp_path))
    assert code == 4 and "error" in err


def test_numerical_failure_exit_3(monkeypatch, capsys):
    def broken(*a, **k):
        raise np.linalg.LinAlgError("did not converge")

    monkeypatch.setattr(spectral, "full_spectrum", broken)
    code, _, err = run(capsys, "spectrum", "--n", "10", "--d", "4")
    assert code == 3 and "numerical" in err


def test_dbm_path_mode(tmp_path, capsys):
    path = tmp_path / "g.txt"
    run(capsys, "sample", "--n", "40", "--d", "12", "--out", str(path))
    out = tmp_path / "path.csv"
    code, _, _ = run(capsys, "dbm", "--in", str(path), "--times", "0,0.05,0.1", "--mu", "0.1",
                     "--seed", "2", "--out", str(out))
    rows = list(csv.DictReader(out.open()))
    assert code == 0 and list(rows[0]) == ["t", "xi2", "x_t_re", "x_t_im"]
    assert [float(r["t"]) for r in rows] == [0.0, 0.05, 0.1]
    spec = full_spectrum(read_graphs(path)[0])
    assert float(rows[0]["xi2"]) == pytest.approx(spec[1] / q_param(40, 12), abs=1e-8)


def test_dbm_path_bad_times(tmp_path):
    with pytest.raises(SystemExit):
        main(["dbm", "--in", str(tmp_path / "g.txt"), "--times", "0,abc"])


def test_calibrate_rejects_unknown_part(capsys):
    code, _, err = run(capsys, "calibrate", "--parts", "nope")
    assert code == 2 and "unknown" in err


def test_tw_table(tmp_path, capsys):
    code, out, _ = run(capsys, "tw-table", "--out", str(tmp_path))
    assert code == 0 and (tmp_path / "tw1_table.csv").is_file()


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "regspec.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "regspec" in res.stdout
