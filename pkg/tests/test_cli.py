import csv
import math
from pathlib import Path

import pytest

from ocucb.cli import CSV_HEADER, main
from ocucb.sim import default_checkpoints

MINIMAL = """[experiment]
horizon = 100
replications = 10
arms = 2
gap = 0.3
seed = 4

[policy oc]
kind = ocucb
eta = 2
rho = 0.5
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def rows(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


def test_run_minimal_row_count(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(write(tmp_path, MINIMAL)), "--out", str(out)]) == 0
    data = rows(out / "oc.csv")
    assert data[0] == CSV_HEADER
    assert len(data) - 1 == 10 * len(default_checkpoints(100))
    summary = rows(out / "summary.csv")
    assert all(r[1] == "AGG" for r in summary[1:])
    assert len(summary) - 1 == len(default_checkpoints(100))
    manifest = (out / "manifest.txt").read_text()
    assert "config_hash = sha256:" in manifest and "policy.oc = oc.csv" in manifest
    assert "numpy_version" in manifest
    assert "config_hash" in capsys.readouterr().out


def test_floats_use_17_significant_digits(tmp_path):
    out = tmp_path / "out"
    main(["run", str(write(tmp_path, MINIMAL)), "--out", str(out)])
    for row in rows(out / "summary.csv")[1:]:
        assert float(repr(float(row[3]))) == float(row[3])
        assert row[3] == f"{float(row[3]):.17g}"


def test_run_twice_byte_identical(tmp_path):
    cfg = write(tmp_path, MINIMAL.replace("replications = 10", "replications = 300"))
    main(["run", str(cfg), "--out", str(tmp_path / "a"), "--threads", "1"])
    main(["run", str(cfg), "--out", str(tmp_path / "b"), "--threads", "2"])
    for name in ("oc.csv", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_override_changes_output(tmp_path):
    cfg = write(tmp_path, MINIMAL)
    main(["run", str(cfg), "--out", str(tmp_path / "a")])
    main(["run", str(cfg), "--out", str(tmp_path / "b"), "--seed", "5"])
    assert (tmp_path / "a" / "oc.csv").read_bytes() != (tmp_path / "b" / "oc.csv").read_bytes()


def test_threads_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("OCUCB_THREADS", "2")
    main(["run", str(write(tmp_path, MINIMAL)), "--out", str(tmp_path / "o")])
    assert "workers = 2" in (tmp_path / "o" / "manifest.txt").read_text()


def test_eta_one_rejected(tmp_path, capsys):
    cfg = write(tmp_path, MINIMAL.replace("eta = 2", "eta = 1"))
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "eta must exceed 1" in err and "run.ini:10" in err
    assert not (tmp_path / "o").exists()


def test_missing_config(tmp_path):
    assert main(["run", str(tmp_path / "none.ini"), "--out", str(tmp_path / "o")]) == 2


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", str(write(tmp_path, MINIMAL)), "--out", str(blocker / "sub")]) == 2


def test_conc_verdicts_set_exit_code(tmp_path):
    passing = "[check l]\nkind = lil\netas = 2, 4\nhorizon = 500\nwalks = 500\n"
    assert main(["run", str(write(tmp_path, passing)), "--out", str(tmp_path / "p")]) == 0
    conc_rows = rows(tmp_path / "p" / "conc.csv")
    assert conc_rows[0][-1] == "verdict" and all(r[-1] == "pass" for r in conc_rows[1:])
    failing = passing + "floor = 1.0\n"
    assert main(["run", str(write(tmp_path, failing)), "--out", str(tmp_path / "f")]) == 1
    assert "conc_passed = false" in (tmp_path / "f" / "manifest.txt").read_text()


def test_plot_command(tmp_path):
    main(["run", str(write(tmp_path, MINIMAL)), "--out", str(tmp_path / "o")])
    svg = tmp_path / "fig.svg"
    code = main(["plot", str(tmp_path / "o" / "summary.csv"), "--out", str(svg), "--envelopes", "0,-0.3"])
    assert code == 0
    assert svg.read_text().startswith("<svg")


def test_plot_missing_input(tmp_path):
    assert main(["plot", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x.svg")]) == 2
    assert not (tmp_path / "x.svg").exists()
