import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

LAZY_LAW = json.dumps({
    "variant": "definetti_mixture", "q": 2, "d": 2,
    "components": [{"weight": 0.5, "pmf": [0.7, 0.3]},
                   {"weight": 0.5, "pmf": [0.3, 0.7]}],
})
SWAP_LAW = json.dumps({"variant": "definetti_mixture", "q": 2, "d": 1,
                       "components": [{"weight": 1.0, "pmf": [0.0, 1.0]}]})


def run_cli(*argv):
    proc = subprocess.run([sys.executable, "-m", "qfield", *argv],
                          capture_output=True, text=True)
    return proc


def run_json(*argv):
    proc = run_cli(*argv)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


def test_eigen_output():
    doc = run_json("eigen", "--law", '{"variant":"uniform","q":3,"d":2}')
    rho = np.array([complex(re, im) for re, im in doc["result"]["rho"]])
    assert abs(rho[0] - 1.0) < 1e-14
    assert np.max(np.abs(rho[1:])) < 1e-14
    assert doc["result"]["is_real"]
    assert doc["manifest"]["version"]


def test_green_row_json():
    doc = run_json("green", "--law", SWAP_LAW, "--alpha", "0.5", "--row", "0")
    assert np.allclose(doc["result"]["row"], [2 / 3, 1 / 3])
    assert abs(doc["result"]["row_sum"] - 1.0) < 1e-12


def test_green_matrix_csv(tmp_path):
    out = tmp_path / "g.csv"
    proc = run_cli("green", "--law", LAZY_LAW, "--alpha", "0.5",
                   "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 1 + 4  # header plus q^d rows
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    real = data[:, 0::2]
    assert np.max(np.abs(real.sum(axis=1) - 1.0)) < 1e-10
    assert np.max(np.abs(data[:, 1::2])) < 1e-12


def test_partition_worked_value():
    doc = run_json("partition", "--law", SWAP_LAW, "--alpha", "0.5",
                   "--beta", "6.2831853")
    assert abs(doc["result"]["log_z"] - math.log(0.5773503)) < 1e-6
    assert doc["result"]["checks"]["grouping_identity_residual"] < 1e-10


def test_mc_green_reproducible_and_accurate():
    argv = ("mc-green", "--law", LAZY_LAW, "--alpha", "0.6", "--x0", "0,0",
            "--n", "20000", "--seed", "5", "--threads", "2")
    a = run_json(*argv)
    b = run_json(*argv)
    assert a["result"] == b["result"]  # byte-identical modulo wall time
    assert a["result"]["tv_to_exact"] < 0.02


def test_sample_field_csv_and_manifest(tmp_path):
    out = tmp_path / "fields.csv"
    proc = run_cli("sample-field", "--law", LAZY_LAW, "--alpha", "0.5",
                   "-n", "7", "--seed", "3", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    doc = json.loads(proc.stdout)
    assert doc["result"]["spectrum_hash"]
    assert doc["manifest"]["seed"] == 3
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 8
    assert rows[0][:2] == ["g0_re", "g0_im"]
    assert len(rows[1]) == 8  # q^d complex values as re/im pairs


def test_sample_field_deterministic_output(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (out1, out2):
        run_cli("sample-field", "--law", LAZY_LAW, "--alpha", "0.5",
                "-n", "4", "--seed", "11", "--threads", "2", "--out", str(out))
    assert out1.read_bytes() == out2.read_bytes()


def test_krawtchouk_value_and_checks():
    doc = run_json("krawtchouk", "--q", "2", "--d", "3", "--l", "1",
                   "--m", "2,1")
    assert doc["result"]["value"][0] == 1.0
    assert doc["result"]["h_inv"] == 3
    ortho = run_json("krawtchouk", "--q", "3", "--d", "4",
                     "--check", "orthogonality")
    assert ortho["result"]["max_residual"] < 1e-9
    dual = run_json("krawtchouk", "--q", "2", "--d", "4", "--check", "duality")
    assert dual["result"]["max_residual"] < 1e-9


def test_kappa_routes():
    doc = run_json("kappa", "--law", LAZY_LAW, "--l", "1", "--route", "both")
    assert doc["result"]["route_gap"] < 1e-10


def test_pointproc_subcommand(tmp_path):
    spec = {"alpha": 0.5, "phi": 1.0,
            "atoms": [{"pmf": [0.75, 0.25], "weight": 1.0}]}
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    doc = run_json("pointproc", "--spec", str(path), "--l", "2",
                   "--mc", "50000", "--seed", "2")
    assert abs(doc["result"]["closed_form"][0] - 4 / 7) < 1e-12
    est = doc["result"]["mc_estimate"][0]
    assert abs(est - 4 / 7) <= 4 * doc["result"]["mc_stderr"]
    assert doc["result"]["half_process_residual"] < 1e-12


def test_hamiltonian_subcommand():
    doc = run_json("hamiltonian", "--law", LAZY_LAW, "--alpha", "0.5",
                   "--seed", "0", "--n-vectors", "10")
    assert doc["result"]["worst_identity"]["residual"] < 1e-10
    assert doc["result"]["max_diagonalization_gap"] < 1e-10


def test_potts_subcommand():
    doc = run_json("potts", "--law", LAZY_LAW, "--alpha", "0.5",
                   "--beta", "0.3", "--n", "20000", "--seed", "4")
    ez = doc["result"]["expected_partition"]
    assert abs(math.log(ez)
               - doc["result"]["log_expected_partition_delta"]) < 1e-9
    assert abs(doc["result"]["mc_partition"] - ez) \
        <= 4 * doc["result"]["mc_stderr"]


def test_limit_checks():
    doc = run_json("limit", "--check", "hermite", "--q", "3")
    assert doc["result"]["max_residual"] < 1e-10
    doc = run_json("limit", "--check", "field-transform", "--q", "2",
                   "--alpha", "0.6")
    assert doc["result"]["route_gap"] < 1e-6
    doc = run_json("limit", "--check", "limit-kraw", "--q", "3", "--seed", "1")
    assert doc["result"]["max_route_gap"] < 1e-9
    doc = run_json("limit", "--check", "transform", "--q", "2", "--seed", "3",
                   "--mc", "50000")
    assert all(row["pass"] for row in doc["result"]["rows"])
    doc = run_json("limit", "--check", "green-limit", "--alpha", "0.5")
    assert abs(doc["result"]["rows"][-1]["ratio"] - 1.0) < 0.05


def test_verify_suite_passes():
    proc = run_cli("verify", "--q", "2", "--d", "3")
    assert proc.returncode == 0
    report = json.loads(proc.stdout)["result"]
    assert report["all_pass"]
    assert any(c["name"] == "kernel_row_sums" for c in report["checks"])


def test_config_file_merging(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 0.5, "row": "0"}))
    doc = run_json("green", "--law", SWAP_LAW, "--alpha", "0.5",
                   "--config", str(cfg))
    assert np.allclose(doc["result"]["row"], [2 / 3, 1 / 3])


def test_threads_default_from_environment(tmp_path):
    import os

    env = dict(os.environ, QFIELD_THREADS="3")
    proc = subprocess.run(
        [sys.executable, "-m", "qfield", "mc-green", "--law", LAZY_LAW,
         "--alpha", "0.5", "--x0", "0,0", "--n", "3000", "--seed", "2"],
        capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["manifest"]["threads"] == 3


def test_tol_override_judges_statistics():
    doc = run_json("mc-green", "--law", LAZY_LAW, "--alpha", "0.5",
                   "--x0", "0,0", "--n", "5000", "--seed", "1",
                   "--tol", "0.05")
    assert doc["result"]["within_tol"] is True
    assert doc["result"]["tol"] == 0.05
    doc = run_json("kappa", "--law", LAZY_LAW, "--l", "2", "--tol", "1e-9")
    assert doc["result"]["within_tol"] is True


def test_bad_config_exits_2():
    proc = run_cli("eigen", "--law", '{"variant": "nope", "q": 2, "d": 1}')
    assert proc.returncode == 2
    assert "variant" in proc.stderr
    proc = run_cli("green", "--law", '{"variant":"uniform","q":2,"d":1}',
                   "--alpha", "1.5", "--row", "0")
    assert proc.returncode == 2


def test_numerical_contract_exits_3():
    # complex-spectrum law cannot drive a Gaussian field
    law = json.dumps({"variant": "deterministic", "q": 3, "d": 1,
                      "shift": [1]})
    proc = run_cli("sample-field", "--law", law, "--alpha", "0.5",
                   "-n", "2", "--seed", "0", "--out", "/dev/null")
    assert proc.returncode == 3
    assert "reversib" in proc.stderr.lower() or "real" in proc.stderr.lower()
