import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from cvqnet import qfi
from cvqnet.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_VALIDATION, HAAR_COLUMNS, main
from cvqnet.io import format_matrix

from conftest import dft_matrix


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


@pytest.fixture
def matrix_file(tmp_path):
    def write(U, name="U.txt"):
        p = tmp_path / name
        p.write_text(format_matrix(U))
        return str(p)
    return write


@pytest.mark.parametrize("U,expected", [(np.eye(4), 19.2993), (dft_matrix(4), 53.1970)])
def test_single_reference_networks(capsys, matrix_file, U, expected):
    code, out, _ = run(capsys, "single", "--matrix", matrix_file(U), "--nbar", "0.3", "--no-timestamp")
    assert code == EXIT_OK
    b = json.loads(out)["breakdown"]
    assert b["h_lo"] == pytest.approx(expected, abs=1e-4)
    assert b["h_lo"] <= b["h_mlo"] <= b["h_max"]
    assert len(b["optimal_phases"]) == 4


def test_single_haar_sample_is_reproducible(capsys):
    a = run(capsys, "single", "--M", "5", "--seed", "4", "--nbar", "0.3", "--no-timestamp")[1]
    b = run(capsys, "single", "--M", "5", "--seed", "4", "--nbar", "0.3", "--no-timestamp")[1]
    assert a == b
    assert json.loads(a)["source"]["haar_sample"]["seed"] == 4


def test_single_needs_matrix_or_seed(capsys):
    code, _, err = run(capsys, "single", "--M", "5", "--nbar", "0.3")
    assert code == EXIT_CONFIG and "--seed" in err


def test_malformed_matrix_reports_line(capsys, tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("2\n# comment\n1,0 0,0\n0,0 oops\n")
    code, _, err = run(capsys, "single", "--matrix", str(p), "--nbar", "0.3")
    assert code == EXIT_CONFIG
    assert "line 4" in err


def test_non_unitary_matrix_rejected(capsys, matrix_file):
    code, _, err = run(capsys, "single", "--matrix", matrix_file(1.01 * np.eye(3)), "--nbar", "0.3")
    assert code == EXIT_CONFIG
    assert "1e-10" in err


def test_missing_matrix_file(capsys, tmp_path):
    code, _, err = run(capsys, "single", "--matrix", str(tmp_path / "nope.txt"), "--nbar", "0.3")
    assert code == EXIT_CONFIG and "nope.txt" in err


def test_missing_seed_is_config_error(capsys):
    code, _, err = run(capsys, "haar-average", "--M", "4", "--nbar", "0.3")
    assert code == EXIT_CONFIG and "seed" in err


def test_invalid_values_are_config_errors(capsys):
    assert run(capsys, "haar-average", "--M", "4", "--nbar", "-1", "--seed", "1")[0] == EXIT_CONFIG
    assert run(capsys, "haar-average", "--M", "4", "--nbar", "0.3", "--eta", "1.5", "--seed", "1")[0] == EXIT_CONFIG
    assert run(capsys, "haar-average", "--M", "0", "--nbar", "0.3", "--seed", "1")[0] == EXIT_CONFIG
    assert run(capsys, "haar-average", "--M-list", "2,x", "--nbar", "0.3", "--seed", "1")[0] == EXIT_CONFIG


def test_haar_average_columns_and_metadata(capsys):
    code, out, _ = run(capsys, "haar-average", "--M-list", "3,5", "--nbar", "0.3", "--samples", "50", "--seed", "8")
    assert code == EXIT_OK
    comments = [ln for ln in out.splitlines() if ln.startswith("#")]
    assert comments[0] == "# cvqnet 0.1.0 haar-average"
    assert comments[1].startswith("# generated: ")
    rows = csv_rows(out)
    assert [r["M"] for r in rows] == ["3", "5"]
    assert list(rows[0])[: len(HAAR_COLUMNS)] == HAAR_COLUMNS
    assert {"tail_fraction_k0.25", "tail_fraction_k0.5", "tail_fraction_k0.75", "seed", "version"} <= set(rows[0])
    assert all(r["seed"] == "8" and r["version"] == "0.1.0" for r in rows)
    assert float(rows[0]["lemma1_closed_form"]) == pytest.approx(
        2 * 3 + 4 * (np.pi / 4 * 2 + 1) * qfi.f_plus(0.9), rel=1e-11)


def test_byte_identical_reruns(capsys, tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        args = ["local-depth", "--M", "4", "--nbar", "0.3", "--configs", "4", "--depths", "0,2,5",
                "--seed", "3", "--no-timestamp", "--out", str(path)]
        assert run(capsys, *args)[0] == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert b"generated" not in outs[0]


def test_threads_do_not_change_output(capsys, monkeypatch):
    base = ["haar-average", "--M", "4", "--nbar", "0.3", "--samples", "30", "--seed", "5", "--no-timestamp"]
    one = run(capsys, *base, "--threads", "1")[1]
    monkeypatch.setenv("QNET_THREADS", "2")
    two = run(capsys, *base)[1]
    assert one == two


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_config_round_trip(capsys, tmp_path, fmt):
    first = tmp_path / f"first.{fmt}"
    args = ["loss-sweep", "--M", "4", "--nbar", "0.2", "--eta-list", "1,0.5", "--samples", "20",
            "--seed", "6", "--no-timestamp", "--format", fmt]
    assert run(capsys, *args, "--out", str(first))[0] == EXIT_OK
    second = tmp_path / f"second.{fmt}"
    code, _, _ = run(capsys, "loss-sweep", "--config", str(first), "--format", fmt,
                     "--no-timestamp", "--out", str(second))
    assert code == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_config_plain_json_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"M": 3, "nbar": 0.3, "samples": 20, "seed": 2}))
    code, out, _ = run(capsys, "haar-average", "--config", str(cfg), "--seed", "9", "--format", "json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["config"]["seed"] == 9 and data["rows"][0]["samples"] == 20
    cfg.write_text(json.dumps({"M": 3, "bogus": 1}))
    assert run(capsys, "haar-average", "--config", str(cfg), "--nbar", "0.3", "--seed", "1")[0] == EXIT_CONFIG
    cfg.write_text("{not json")
    code, _, err = run(capsys, "haar-average", "--config", str(cfg))
    assert code == EXIT_CONFIG and "line 1" in err


def test_loss_sweep_unit_eta_matches_haar_average(capsys):
    common = ["--M", "5", "--nbar", "0.3", "--samples", "40", "--seed", "12", "--format", "json"]
    haar = json.loads(run(capsys, "haar-average", *common)[1])["rows"][0]
    loss = json.loads(run(capsys, "loss-sweep", *common, "--eta-list", "1,0.5")[1])["rows"]
    assert loss[0]["mean_h_lo_lossy"] == haar["mean_h_lo"]
    assert loss[1]["mean_h_lo_lossy"] < loss[0]["mean_h_lo_lossy"]
    assert all(r["closed_vs_covariance_max_rel_err"] <= 1e-8 for r in loss)


def test_unwritable_output_is_io_error(capsys, tmp_path):
    target = tmp_path / "missing_dir" / "out.csv"
    code, _, err = run(capsys, "haar-average", "--M", "2", "--nbar", "0.3", "--samples", "5",
                       "--seed", "1", "--out", str(target))
    assert code == EXIT_IO and "I/O" in err
    assert not target.exists()


def test_validate_passes(capsys):
    code, out, _ = run(capsys, "validate")
    assert code == EXIT_OK
    assert "FAIL" not in out and "unitarity" in out


def test_validate_json(capsys):
    code, out, _ = run(capsys, "validate", "--json")
    data = json.loads(out)
    assert code == EXIT_OK and data["passed"]
    assert {c["name"] for c in data["checks"]} >= {"bsn_symplectic", "cross_path_h_lo", "homodyne_equals_qfi"}


def test_validate_detects_broken_map(capsys):
    code, out, err = run(capsys, "validate", "--break-symplectic")
    assert code == EXIT_VALIDATION
    assert "bsn_symplectic" in err


def test_console_entry_point(tmp_path):
    env = dict(os.environ, QNET_THREADS="1")
    proc = subprocess.run([sys.executable, "-m", "cvqnet.cli", "--version"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout


def test_explicit_M_beats_config_M_list(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"M_list": [3, 4], "nbar": 0.3, "samples": 10, "seed": 2}))
    code, out, _ = run(capsys, "haar-average", "--config", str(cfg), "--M", "5", "--format", "json")
    assert code == EXIT_OK
    assert [r["M"] for r in json.loads(out)["rows"]] == [5]
