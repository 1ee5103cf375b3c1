import json
import subprocess
import sys

import pytest

from neumann_sharp.cli import main


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_compute_mu_square(capsys, tmp_path):
    out_json, field = tmp_path / "mu.json", tmp_path / "field.csv"
    code, out, _ = run(capsys, "compute", "mu", "--shape", "square", "--p", "2", "--q", "2",
                       "--h", "0.02", "--out", str(out_json), "--field", str(field))
    assert code == 0
    assert float(out) == pytest.approx(9.87, abs=0.01)
    rec = json.loads(out_json.read_text())
    assert rec["kind"] == "neumann" and rec["value"] == float(out)
    assert field.read_text().startswith("vertex,value\n")


def test_compute_pip_and_ball(capsys, tmp_path):
    assert run(capsys, "compute", "pip", "--p", "2")[1].strip() == "3.14159265359"
    code, out, _ = run(capsys, "compute", "ball", "--p", "2", "--dim", "2", "--radius", "1",
                       "--field", str(tmp_path / "prof.csv"))
    assert code == 0 and float(out) == pytest.approx(5.78319, abs=1e-5)
    assert (tmp_path / "prof.csv").read_text().startswith("r,h\n")


def test_compute_weighted(capsys):
    code, out, _ = run(capsys, "compute", "weighted", "--p", "2", "--dim", "1", "--d", "1",
                       "--grid", "256")
    assert code == 0 and float(out) == pytest.approx(9.8696, rel=1e-4)


@pytest.mark.parametrize("args", [
    ("verify", "main", "--shape", "square", "--p", "2"),
    ("verify", "pw", "--shape", "rhombus", "--d", "2", "--k", "8", "--p", "2"),
    ("verify", "debole", "--shape", "hex", "--p", "2", "--q", "2"),
    ("verify", "comparison", "--shape", "square", "--p", "2", "--s", "2", "--q", "3", "--h", "0.05"),
    ("verify", "pq_lower", "--shape", "square", "--p", "3", "--q", "2"),
])
def test_verify_passes(capsys, args):
    code, out, _ = run(capsys, *args)
    assert code == 0
    lines = [json.loads(x) for x in out.splitlines()]
    assert lines and all(x["pass"] for x in lines)


def test_verify_debole_nodal_summary(capsys):
    _, out, _ = run(capsys, "verify", "debole", "--shape", "hex", "--p", "2", "--q", "2")
    ctx = json.loads(out)["context"]
    assert ctx["all_touch_boundary"] and len(ctx["nodal_components"]) == 2


def test_sweeps(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "sharpness", "--p", "2", "--d", "2", "--ks", "1,2,4,8",
                       "--csv", str(tmp_path / "s.csv"))
    assert code == 0
    vals = [float(line.split(",")[1]) for line in out.splitlines()[1:]]
    assert vals == sorted(vals) and vals[-1] < 5.7832
    assert (tmp_path / "s.csv").read_text() == out
    for p, q, sign in (("2", "3", -1), ("3", "2", 1)):
        code, out, _ = run(capsys, "sweep", "collapse", "--p", p, "--q", q,
                           "--widths", "0.2,0.1,0.05")
        vals = [float(line.split(",")[1]) for line in out.splitlines()[1:]]
        assert code == 0
        assert all(sign * (b - a) > 0 for a, b in zip(vals, vals[1:]))
    code, out, _ = run(capsys, "sweep", "shape", "--p", "2", "--q", "2.5", "--budget", "4")
    assert code == 0 and out.startswith("# best regular")


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "verify", "nonsense")[0] == 1
    assert run(capsys, "compute", "mu", "--h", "5")[0] == 1
    assert run(capsys, "compute", "mu", "--p", "0.5")[0] == 1
    assert run(capsys, "sweep", "sharpness", "--ks", "1,8", "--h", "0.1")[0] == 1
    assert run(capsys, "compute", "mu", "--config", str(tmp_path / "missing.json"))[0] == 1
    code, out, _ = run(capsys, "compute", "mu", "--h", "0.1", "--p", "1.5", "--q", "2",
                       "--restarts", "2", "--eps-schedule", "0.01")
    assert code == 0


def test_stagnation_exit_code(capsys, monkeypatch):
    from neumann_sharp import fem2d
    original = fem2d._lbfgs

    def stalled(fun, x0, apply_h0, gtol, maxiter, **kw):
        return original(fun, x0, apply_h0, gtol, 1, **kw)

    monkeypatch.setattr(fem2d, "_lbfgs", stalled)
    code, out, _ = run(capsys, "compute", "mu", "--h", "0.1", "--p", "1.5", "--q", "2")
    assert code == 2
    diag = json.loads(out)
    assert diag["error"] == "StagnationError" and "best_value" in diag


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"shape": "rectangle", "length": 2.0, "width": 1.0, "p": 3.0}))
    code, out, _ = run(capsys, "compute", "pip", "--config", str(cfg))
    assert float(out) == pytest.approx(3.04699, abs=1e-5)
    code, out, _ = run(capsys, "compute", "pip", "--config", str(cfg), "--p", "2")
    assert out.strip() == "3.14159265359"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "compute", "pip", "--config", str(cfg))[0] == 1


def test_polygon_file_input(capsys, tmp_path):
    poly = tmp_path / "tri.txt"
    poly.write_text("0 0\n1 0\n0 1\n")
    code, out, _ = run(capsys, "verify", "main", "--polygon", str(poly), "--p", "2")
    assert code == 0 and json.loads(out)["pass"]


def test_jobs_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("NEUMANN_SHARP_JOBS", "notanumber")
    assert run(capsys, "compute", "pip")[0] == 1


def test_repeated_runs_are_byte_identical(tmp_path):
    outputs = []
    for i in range(2):
        d = tmp_path / str(i)
        d.mkdir()
        cmd = [sys.executable, "-m", "neumann_sharp.cli", "compute", "mu", "--shape", "rhombus",
               "--k", "2", "--p", "1.5", "--q", "2", "--h", "0.1", "--seed", "7",
               "--out", str(d / "e.json"), "--field", str(d / "f.csv")]
        res = subprocess.run(cmd, capture_output=True, check=True)
        outputs.append((res.stdout, (d / "e.json").read_bytes(), (d / "f.csv").read_bytes()))
    assert outputs[0] == outputs[1]
