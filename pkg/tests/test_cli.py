import json
import subprocess
import sys

import pytest

from multihilbert import cli


def _write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def _run(tmp_path, task, obj, *extra):
    out = tmp_path / f"out_{task}"
    code = cli.run([task, "--config", _write(tmp_path, obj), "--out", str(out), *extra])
    return code, out


def test_validate_ok(tmp_path):
    code, out = _run(tmp_path, "validate", {"J": [[0, 1]], "E": [[1, 2]]})
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["configuration"] == {"J": [[0.0, 1.0]], "E": [[1.0, 2.0]]}
    assert rep["meta"]["seed"] == 0 and "numpy" in rep["meta"]
    assert rep["n_double"] == 1 and rep["merged_at"] == []


def test_validate_reports_merge(tmp_path):
    code, out = _run(tmp_path, "validate", {"J": [[0, 1], [1, 2]], "E": [[2, "inf"]]})
    rep = json.loads((out / "report.json").read_text())
    assert code == 0 and rep["merged_at"] == [1.0]
    assert ["inf", "simple"] in rep["endpoints"]


def test_validate_overlap_exit_2(tmp_path, capsys):
    code, _ = _run(tmp_path, "validate", {"J": [[0, 2]], "E": [[1, 3]]})
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "OverlapError"


def test_unreadable_config_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert cli.run(["validate", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert cli.run(["--config", _write(tmp_path, {"J": [[0, 1]], "E": [[2, 3]]}),
                    "--out", str(tmp_path)]) == 2
    capsys.readouterr()


def test_task_from_config(tmp_path):
    cfg = {"task": "validate", "J": [[0, 1]], "E": [[2, 3]]}
    assert cli.run(["--config", _write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 0


def test_spectrum_disjoint(tmp_path):
    code, out = _run(tmp_path, "spectrum", {"J": [[0, 1]], "E": [[2, 3]]})
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["decay"]["rate"] < 0
    assert rep["all_pass"] is True
    for chk in rep["checks"].values():
        assert set(chk) == {"value", "tolerance", "pass"}
    assert (out / "svals.csv").read_text().startswith("index,value\n")
    assert len((out / "eigs.csv").read_text().splitlines()) == rep["grid"]["nodes"] + 1


def test_spectrum_unbounded_is_compactified(tmp_path):
    code, out = _run(tmp_path, "spectrum", {"J": [[0, 1]], "E": [[2, "inf"]]})
    assert code == 0
    assert json.loads((out / "report.json").read_text())["mobius"] is not None


def test_spectrum_deterministic(tmp_path):
    cfg = {"J": [[-1, 0]], "E": [[0, 1]], "grid": {"panels": 8}}
    _, a = _run(tmp_path, "spectrum", cfg)
    b = tmp_path / "again"
    cli.run(["spectrum", "--config", _write(tmp_path, cfg, "c2.json"), "--out", str(b)])
    for name in ("svals.csv", "eigs.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_diagonalize_n1(tmp_path):
    code, out = _run(tmp_path, "diagonalize", {"b": [-1, 1]})
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["rho"] == [pytest.approx(2.0)]
    for name in ("bezout.csv", "orthogonality.csv", "comparison.csv"):
        assert (out / name).exists()


def test_diagonalize_bad_b(tmp_path, capsys):
    code, _ = _run(tmp_path, "diagonalize", {"b": [0, 1, 2]})
    assert code == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigError"


def test_rhp_check(tmp_path):
    cfg = {"J": [[0, 1]], "E": [[2, 3]], "lambda": [0, 2], "probes": 4,
           "paths": [[[-1, 0.5], [4, 0.5], 11]]}
    code, out = _run(tmp_path, "rhp-check", cfg)
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["all_pass"]
    assert len((out / "gamma_path.csv").read_text().splitlines()) == 12


def test_rhp_check_at_eigenvalue_exit_3(tmp_path, capsys):
    from multihilbert import discretize as dz, spectral as sp
    from multihilbert.geometry import validate_configuration

    c = validate_configuration([[0, 1]], [[2, 3]])
    top = sp.eigenvalues_K(dz.assemble_K(c, dz.build_grid(c, 16)))[0][-1]
    code, _ = _run(tmp_path, "rhp-check", {"J": [[0, 1]], "E": [[2, 3]], "lambda": [top, 0]})
    assert code == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "NearSpectrumIllConditioned" and "cond" in err


def test_sweep(tmp_path):
    cfg = {"J": [[-1, 0]], "E": [[0, 1]], "lambdas": [[0, 2], [3, 0]], "refine": [8, 16]}
    code, out = _run(tmp_path, "sweep", cfg, "--threads", "2")
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    a, b = rep["refinement"]["band_counts"]
    assert b > a
    assert len((out / "sweep.csv").read_text().splitlines()) == 3


def test_tolerance_violation_exit_1(tmp_path, monkeypatch):
    monkeypatch.setitem(cli.TOL, "pairing", -1.0)
    code, _ = _run(tmp_path, "spectrum", {"J": [[0, 1]], "E": [[2, 3]], "grid": {"panels": 4}})
    assert code == 1


def test_module_entry_point(tmp_path):
    p = _write(tmp_path, {"J": [[0, 1]], "E": [[1, 2]]})
    r = subprocess.run([sys.executable, "-m", "multihilbert", "validate", "--config", p,
                        "--out", str(tmp_path / "m")], capture_output=True)
    assert r.returncode == 0
