import json
import subprocess
import sys

import numpy as np
import pytest

from seclossless.cli import RunConfig, main, parse_budgets, run
from seclossless.fileio import fixture_path, read_csv

DSBS = str(fixture_path("dsbs"))


def test_parse_budgets():
    assert parse_budgets("0:1:3", 0, 0) == [0.0, 0.5, 1.0]
    assert parse_budgets("0.2,0.4", 0, 0) == [0.2, 0.4]
    assert parse_budgets("auto", 0.0, 1.0, 5) == [0.0, 0.25, 0.5, 0.75, 1.0]
    with pytest.raises(ValueError):
        parse_budgets("1:2", 0, 0)


def test_info(tmp_path):
    out = tmp_path / "info.csv"
    assert main(["info", DSBS, "--out", str(out)]) == 0
    table = {r["quantity"]: float(r["bits"]) for r in read_csv(out)}
    assert table["H(X)"] == pytest.approx(1.0)


def test_region_thm1_monotone(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["region", DSBS, "--mode", "THM1", "--out", str(out), "--jobs", "1"]) == 0
    rows = read_csv(out)
    assert len(rows) == 25 and list(rows[0]) == ["mode", "r_a", "r_c", "delta_raw", "delta_clamped"]
    pts = {(float(r["r_a"]), float(r["r_c"])): float(r["delta_clamped"]) if r["delta_clamped"] else -np.inf
           for r in rows}
    for (a, c), d in pts.items():
        for (a2, c2), d2 in pts.items():
            if a2 >= a and c2 >= c:
                assert d2 >= d


def test_region_witness_dump(tmp_path):
    w = tmp_path / "w.json"
    code = main(["region", DSBS, "--mode", "COR1", "--ra", "1", "--rc", "0,1", "--witness-out", str(w),
                 "--cross-check", "10", "--out", str(tmp_path / "r.csv")])
    assert code == 0
    doc = json.loads(w.read_text())
    assert len(doc["points"]) == 2 and doc["points"][1]["v_channel"]["from"] == {"Z": 2}
    assert doc["random_restart_u"]["value"] == pytest.approx(doc["points"][0]["u_value"], abs=1e-3)


def test_verify_passes(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["verify", "--n", "2", "--j", "1,2", "--seeds", "5", "--tol", "1e-9", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert {r["identity"] for r in rows} == {"lemma1", "identity3"}
    assert all(r["ok"] == "true" for r in rows)


def test_verify_tolerance_failure(tmp_path):
    assert main(["verify", "--n", "2", "--seeds", "2", "--tol", "0", "--out", str(tmp_path / "v.csv")]) == 2


def test_simulate(tmp_path):
    out, cb = tmp_path / "s.csv", tmp_path / "cb.json"
    code = main(["simulate", DSBS, "--n", "4,5", "--eps", "0.15", "--seed", "1,2", "--trials", "20",
                 "--exact-equivocation", "--dump-codebook", str(cb), "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert [(r["seed"], r["n"]) for r in rows] == [("1", "4"), ("1", "5"), ("2", "4"), ("2", "5")]
    assert all(r["equivocation_per_symbol"] for r in rows)
    assert len(json.loads(cb.read_text())["runs"]) == 4


def test_simulate_with_u_channel(tmp_path):
    ch = tmp_path / "u.json"
    ch.write_text(json.dumps({"from": {"Y": 2}, "to": {"U": 2}, "rows": [[0.9, 0.1], [0.1, 0.9]]}))
    out = tmp_path / "s.csv"
    assert main(["simulate", DSBS, "--u-channel", str(ch), "--n", "6", "--trials", "10", "--out", str(out)]) == 0
    assert int(read_csv(out)[0]["codebook_size"]) > 1


def test_validation_failures(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"alphabets": {"x": 2, "y": 2, "z": 2}, "pmf": [0.1] * 8}))
    assert main(["info", str(bad)]) == 1
    assert main(["info", str(tmp_path / "nope.json")]) == 1
    assert main(["region", DSBS, "--mode", "NOPE"]) == 1
    assert main(["simulate", DSBS, "--n", "0"]) == 1
    assert main([]) == 1


def test_unknown_subcommand_usage(capsys):
    assert main(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err
    assert run(RunConfig("frobnicate")) == 1


def test_console_script_exit_code():
    res = subprocess.run([sys.executable, "-m", "seclossless.cli", "bogus"], capture_output=True, text=True)
    assert res.returncode == 1 and "usage" in res.stderr
