import io
import json
import subprocess
import sys

import numpy as np
import pytest

from l2moduli.cli import EXIT_ACCURACY, EXIT_FAIL, EXIT_OK, EXIT_USAGE, GridSpec, UsageError, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    return np.genfromtxt(io.StringIO(body), delimiter=",", names=True)


def test_grid_spec():
    g = GridSpec.parse("1,100,3,log")
    assert np.allclose(g.values(), [1, 10, 100])
    for bad in ("", "0,1,0", "0,1", "a,b,c", "0,1,5,cubic", "0,1,3,log"):
        with pytest.raises(UsageError):
            GridSpec.parse(bad)


def test_tabulate_fs(capsys):
    code, out, _ = run(capsys, "tabulate", "--profile", "fs", "--grid", "0,10,101")
    assert code == EXIT_OK
    data = table(out)
    assert data.size == 101
    assert np.max(np.abs(data["Hol_e1"] - 4)) < 1e-9 and np.max(np.abs(data["Hol_e3"] - 4)) < 1e-9
    assert np.max(np.abs(data["kappa"] - 48)) < 1e-8
    for key in ("# l2moduli 0.1.0", "# profile: fs", "# seed: 0"):
        assert key in out


def test_tabulate_l2_log_grid(capsys):
    code, out, _ = run(capsys, "tabulate", "--grid", "1,1e4,9,log")
    assert code == EXIT_OK
    data = table(out)
    scaled = data["lambda"] ** 2 * data["Abar"]
    assert np.all(np.diff(np.abs(scaled[2:] - 4)) < 0) and abs(scaled[-1] - 4) < 0.06


@pytest.mark.parametrize(
    "argv",
    [
        ["tabulate", "--grid", "0,1,0"],
        ["tabulate", "--profile", "nope"],
        ["verify", "--suite", "nope"],
        ["frobnicate"],
        ["tabulate", "--order", "-3"],
        ["rp2", "--n", "4"],
        ["geodesic", "--init", "{not json"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE and "error" in err


def test_verify_suites_pass(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "characters,fs", "--suite", "limits")
    report = json.loads(out)
    assert code == EXIT_OK and report["passed"]
    assert report["suites"] == ["characters", "fs", "limits"]
    values = {c["name"]: json.loads(c["detail"].split("=")[1]) for c in report["checks"] if c["suite"] == "characters"}
    assert [round(v) for v in values.values()] == [7, 5, 3, 1]


def test_sabotaged_kaehler_fails(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "kaehler", "--step", "1")
    report = json.loads(out)
    assert code == EXIT_FAIL and not report["passed"]
    failed = [c for c in report["checks"] if not c["passed"]]
    assert failed and all(c["value"] > c["tol"] for c in failed)


def test_tabulate_is_deterministic(capsys, tmp_path):
    outs = []
    path = tmp_path / "table.csv"  # the output path is part of the echoed config
    for _ in range(2):
        assert run(capsys, "tabulate", "--grid", "0.1,5,20,log", "--seed", "3", "--out", str(path))[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and outs[0].startswith(b"#") and b"# seed: 3" in outs[0]


def test_geodesic_is_deterministic_and_radial(capsys):
    args = ["geodesic", "--profile", "fs", "--T", "0.05", "--seed", "11"]
    assert run(capsys, *args)[1] == run(capsys, *args)[1]
    init = json.dumps({"lam": [0, 0, 1], "frame_velocity": [0, 0, 0.5, 0, 0, 0]})
    code, out, _ = run(capsys, "geodesic", "--init", init, "--T", "0.2")
    assert code == EXIT_OK and "# T: 0.2" in out
    data = table(out)
    assert np.max(np.abs(data["lam1"])) < 1e-6 and np.max(np.abs(data["lam2"])) < 1e-6
    assert data["lam3"][-1] > 1.05


def test_hamiltonian_command(capsys):
    code, out, _ = run(capsys, "hamiltonian", "--T", "2", "--samples", "5")
    assert code == EXIT_OK and "power" in out
    assert len([line for line in out.splitlines() if not line.startswith("#")]) == 6


def test_volume_command(capsys):
    code, out, _ = run(capsys, "volume", "--profile", "l2", "--samples", "200")
    report = json.loads(out)
    assert code == EXIT_OK and report["converged"]
    assert np.isfinite(report["total_volume"]) and report["total_volume"] > 0
    assert report["metadata"]["gl_orders"] and report["metadata"]["panels"] > 0


def test_rp2_commands(capsys):
    code, out, _ = run(capsys, "rp2", "--n", "3", "--rho-grid", "k:2,4")
    assert code == EXIT_OK
    data = table(out)
    assert data.size == 3 and np.all(data["ratio"] < 2)
    code, out, _ = run(capsys, "rp2", "--length", "--kmax", "5")
    assert code == EXIT_OK and "partial_length" in out


def test_rp2_refinement_failure_exits_3(capsys, monkeypatch):
    monkeypatch.setattr("l2moduli.rp2.MAX_ORDER", 64)
    code, _, err = run(capsys, "rp2", "--rho-grid", "k:2,3", "--order", "64")
    assert code == EXIT_ACCURACY and "accuracy" in err


def test_order_environment_variable(capsys, monkeypatch):
    monkeypatch.setenv("L2MODULI_QUAD_ORDER", "48")
    code, out, _ = run(capsys, "verify", "--suite", "characters")
    assert code == EXIT_OK and json.loads(out)["quadrature_order"] == 48
    monkeypatch.setenv("L2MODULI_QUAD_ORDER", "zero")
    assert run(capsys, "verify", "--suite", "characters")[0] == EXIT_USAGE


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "l2moduli.cli", "--version"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and "0.1.0" in proc.stdout


def test_escaping_geodesic_exits_3(capsys):
    init = json.dumps({"lam": [0, 0, 1], "frame_velocity": [0, 0, 3.0, 0, 0, 0]})
    code, _, err = run(capsys, "geodesic", "--init", init, "--T", "5")
    assert code == EXIT_ACCURACY and "compact" in err
