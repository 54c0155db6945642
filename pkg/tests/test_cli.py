import csv
import io
import json

import numpy as np
import pytest

from multibubble.cli import EXIT_OK, EXIT_REGIME, EXIT_USAGE, main


def _model_file(tmp_path, H, dK=1.0, name="model.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"n": 5, "K_z": 1.0, "dK_dnu": dK, "hessK1": np.asarray(H, float).tolist()}))
    return str(path)


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants_command(capsys):
    code, out, _ = _run(["constants", "--n", "5"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["max_rel_diff"] < 1e-8
    assert _run(["constants", "--n", "4"], capsys)[0] == EXIT_USAGE


def test_missing_or_bad_model(tmp_path, capsys):
    assert _run(["critical-points", "--model", str(tmp_path / "nope.json")], capsys)[0] == EXIT_USAGE
    bad = _model_file(tmp_path, [[1, 2, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert _run(["critical-points", "--model", bad], capsys)[0] == EXIT_USAGE


def test_critical_points_negative_definite(tmp_path, capsys):
    path = _model_file(tmp_path, -np.eye(4))
    code, out, _ = _run(["critical-points", "--model", path, "--seeds", "20"], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["critical_points"] == [] and doc["notes"]


def test_configure_and_regime_exit(tmp_path, capsys):
    good = _model_file(tmp_path, np.diag([2.0, 1, 1, 1]))
    code, out, _ = _run(["configure", "--model", good, "--eps", "1e-3"], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and doc["M_eps"]["ok"]
    assert doc["lambda_inv_over_eps"][0] == pytest.approx(doc["kappa"], rel=1e-12)
    wrong_sign = _model_file(tmp_path, np.diag([2.0, 1, 1, 1]), dK=-1.0, name="neg.json")
    assert _run(["configure", "--model", wrong_sign, "--eps", "1e-3"], capsys)[0] == EXIT_REGIME
    code, _, err = _run(["configure", "--model", good, "--eps", "0.5"], capsys)
    assert code == EXIT_REGIME and "M_eps" in err


def test_verify_expansion_csv_and_figure(tmp_path, capsys):
    path = _model_file(tmp_path, np.diag([2.0, 1, 1, 1]))
    fig = tmp_path / "v.png"
    code, out, _ = _run(["verify-expansion", "--model", path, "--eps", "1e-2,1e-3", "--samples", "20000",
                         "--kinds", "alpha,lambda", "--figure", str(fig)], capsys)
    assert code == EXIT_OK and fig.stat().st_size > 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["eps"] for r in rows].count("fit") == 2
    assert {r["kind"] for r in rows} == {"alpha", "lambda"}
    assert _run(["verify-expansion", "--model", path, "--eps", ","], capsys)[0] == EXIT_USAGE
    assert _run(["verify-expansion", "--model", path, "--eps", "1e-3", "--kinds", "mu"], capsys)[0] == EXIT_USAGE


def test_landscape_saddle_signature(tmp_path, capsys):
    # the two smallest |eigenvalues| of the F-Hessian here have opposite signs
    path = _model_file(tmp_path, np.diag([2.0, 1.8, 0.25, 1.5]))
    code, out, err = _run(["landscape", "--model", path, "--grid", "21", "--span", "0.05"], capsys)
    assert code == EXIT_OK and "eigenvalues" in err
    rows = list(csv.DictReader(io.StringIO(out)))
    F = {(float(r["s"]), float(r["t"])): float(r["F"]) for r in rows}
    s_axis = sorted({k[0] for k in F})
    centre = F[(s_axis[10], s_axis[10])]
    along_s = [F[(s, s_axis[10])] - centre for s in (s_axis[0], s_axis[-1])]
    along_t = [F[(s_axis[10], t)] - centre for t in (s_axis[0], s_axis[-1])]
    assert all(v < 0 for v in along_s) and all(v > 0 for v in along_t)


def test_landscape_plane_file_with_singular_rows(tmp_path, capsys):
    path = _model_file(tmp_path, np.diag([2.0, 1, 1, 1]))
    plane = tmp_path / "plane.json"
    plane.write_text(json.dumps({"base": [[0, 0, 0, 0], [0, 0, 0, 0]], "u": [[1, 0, 0, 0], [-1, 0, 0, 0]],
                                 "v": [[0, 1, 0, 0], [0, -1, 0, 0]], "s": [-1, 1], "t": [-1, 1]}))
    code, out, _ = _run(["landscape", "--model", path, "--plane", str(plane), "--grid", "3"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 9
    centre = [r for r in rows if float(r["s"]) == 0 and float(r["t"]) == 0][0]
    assert centre["singular"] == "1" and centre["F"] == ""
    assert _run(["landscape", "--model", path, "--plane", str(plane), "--grid", "1"], capsys)[0] == EXIT_USAGE


def test_convention_without_monte_carlo(tmp_path, capsys):
    path = _model_file(tmp_path, np.diag([2.0, 1, 1, 1]))
    code, out, _ = _run(["convention", "--model", path, "--samples", "0"], capsys)
    doc = json.loads(out)["conventions"]
    assert code == EXIT_OK and doc["normal_scale"] == -2.0 and doc["tangential_scale"] == 2.0


def test_repeat_runs_are_byte_identical(tmp_path, capsys):
    path = _model_file(tmp_path, np.diag([3.0, 1.5, 0.7, 0.4]))
    outs = []
    for w in ("1", "2", "1"):
        out = tmp_path / f"cp{w}{len(outs)}.json"
        assert main(["critical-points", "--model", path, "--m", "3", "--seeds", "20", "--workers", w,
                     "--output", str(out)]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
