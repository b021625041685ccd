import json

import numpy as np

from robinopt.cli import main


def run(args):
    return main(args)


def test_oracle_command(capsys):
    assert run(["oracle", "interval-robin-p2", "1", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["value"] - 1.7070529755509227) < 1e-9


def test_dirichlet_command(capsys):
    assert run(["dirichlet", "--domain", "builtin:interval:100"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["lambda"] - np.pi**2) / np.pi**2 < 0.01
    assert out["weak_residual_check"]["ok"]


def test_robin_command_with_dirac(capsys):
    assert run(["robin", "--domain", "builtin:interval:100", "--sigma", "dirac:0:1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["lambda"] - 0.740173884394967) < 0.005


def test_minimize_refused_exit_code(capsys):
    code = run(["minimize", "--domain", "builtin:square:0.25", "--p", "2", "--m", "1"])
    assert code == 3
    assert "exactly 0" in capsys.readouterr().err


def test_bad_domain_exit_code(capsys):
    assert run(["dirichlet", "--domain", "builtin:torus:3"]) == 2


def test_unknown_oracle_exit_code(capsys):
    assert run(["oracle", "nope"]) == 2


def test_maximize_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code = run([
        "maximize", "--domain", "builtin:interval:100", "--m", "2", "--out", str(out),
    ])
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert abs(rep["xi_m"] - 1.70705) < 0.01
    assert rep["crosscheck_ok"]
    assert (out / "sigma_m.bw").exists()
    from robinopt import build_interval, read_weight

    w = read_weight(build_interval(100), out / "sigma_m.bw")
    assert abs(w.total_mass - 2.0) < 1e-9
    csv = (out / "sigma_m.csv").read_text().splitlines()
    assert csv[0] == "node,x,arclength,mass,density"
    assert len(csv) == 3  # header + two endpoints


def test_minimize_csv_columns(tmp_path):
    out = tmp_path / "run"
    code = run([
        "minimize", "--domain", "builtin:interval:50", "--p", "2", "--m", "1",
        "--out", str(out), "--serial",
    ])
    assert code == 0
    lines = (out / "minimize.csv").read_text().splitlines()
    assert lines[0] == "node,x,y,lambda1_x,ell1_dirac"
    assert len(lines) == 3


def test_sweep_lambda_column_nondecreasing(tmp_path):
    out = tmp_path / "run"
    code = run([
        "sweep", "--domain", "builtin:interval:100", "--m-list", "log:0.01:100:9",
        "--out", str(out), "--serial",
    ])
    assert code == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 10
    lam = [float(ln.split(",")[1]) for ln in lines[1:]]
    assert all(b >= a for a, b in zip(lam, lam[1:]))


def test_bounds_command(tmp_path):
    out = tmp_path / "run"
    code = run([
        "bounds", "--domain", "builtin:interval:100", "--m-list", "0.1,1,10",
        "--out", str(out),
    ])
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["all_pass"]
    assert (out / "bounds.csv").read_text().startswith("m,belsup,Lambda,upper")


def test_concentrate_command(tmp_path):
    out = tmp_path / "run"
    code = run(["concentrate", "--p", "1.5", "--j-list", "100,10000", "--out", str(out)])
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["monotone_tail"]
    lines = (out / "concentrate.csv").read_text().splitlines()
    assert lines[0] == "j,alpha,Q,bound"


def test_scan_command(capsys):
    assert run(["scan-lambda1", "--domain", "builtin:interval:50", "--p", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["tie_set"] == [0, 50]


def test_mesh_export_round_trip(tmp_path, capsys):
    out = tmp_path / "run"
    assert run(["mesh", "--domain", "builtin:disk:0.2", "--out", str(out)]) == 0
    assert run(["dirichlet", "--domain", f"file:{out/'mesh.pmesh'}"]) == 0


def test_serial_reruns_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = run([
            "maximize", "--domain", "builtin:interval:100", "--m", "2",
            "--out", str(out), "--serial", "--seed", "0",
        ])
        assert code == 0
        outs.append((out / "report.json").read_bytes())
    assert outs[0] == outs[1]
