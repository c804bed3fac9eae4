import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from specshift.cli import curve_rows, identities_main, main, moi_main, parse_grid, ssf_main
from specshift.ssf import eta_n

SCALAR = '{"dim":1,"H":{"re":[[0]]},"V":{"re":[[%s]]},"n":%d,"functions":[{"family":"polynomial","coeffs":[0,0,1]}]}'


def run(fn, argv, capsys):
    code = fn(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compute_scalar_krein(capsys):
    code, out, _ = run(ssf_main, ["compute", "--input", SCALAR % (2, 1)], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["pass"]
    assert rec["eta"]["breakpoints"] == [0.0, 2.0] and rec["eta"]["coefficients"] == [[1.0]]
    assert rec["integral"]["integral"] == 2.0
    assert rec["traceFormula"][0]["residual"] <= 1e-12
    assert "timingSeconds" not in rec


def test_compute_scalar_order_two_with_curves(capsys):
    code, out, _ = run(ssf_main, ["compute", "--input", SCALAR % (1, 2), "--samples=-0.5:1.5:9"], capsys)
    text = out[out.index("t,eta,cumulative"):]
    rows = list(csv.reader(io.StringIO(text)))[1:]
    ts = [float(r[0]) for r in rows]
    vals = [float(r[1]) for r in rows]
    assert code == 0
    assert ts.count(0.0) == 2  # left and right limits at the jump
    for t, v in zip(ts[ts.index(0.0) + 1:], vals[ts.index(0.0) + 1:]):
        assert v == pytest.approx(max(0.0, 1 - t) if t <= 1 else 0.0)
    assert all(v == 0 for t, v in zip(ts, vals) if t < 0)


def test_curves_breakpoints_only_and_step_duplicates():
    eta = eta_n(np.diag([0.0, 1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]), 1)
    rows = curve_rows(eta, parse_grid(""))
    ts = [r[0] for r in rows]
    assert len(ts) == len(eta.eta.breakpoints) + len(eta.jumps)
    for x, _ in eta.jumps:
        assert ts.count(x) == 2


def test_parse_grid():
    assert np.allclose(parse_grid("0:1:3"), [0, 0.5, 1])
    assert np.allclose(parse_grid("1,2.5"), [1, 2.5])
    assert parse_grid("").size == 0
    with pytest.raises(ValueError):
        parse_grid("a:b")


def test_compute_zero_tolerance_breaches(tmp_path, capsys):
    tol = tmp_path / "tol.json"
    tol.write_text('{"traceFormula": 0, "moment": 0}')
    code, out, _ = run(ssf_main, ["compute", "--input", SCALAR % (2, 2), "--tol-file", str(tol)], capsys)
    assert code == 3 and not json.loads(out)["pass"]


def test_compute_input_errors(capsys):
    bad = '{"dim":2,"H":{"re":[[0,1],[2,0]]},"V":{"re":[[0,0],[0,0]]},"n":1}'
    code, _, err = run(ssf_main, ["compute", "--input", bad], capsys)
    diag = json.loads(err)
    assert code == 2 and diag["error"] == "validation" and diag["entry"] == [0, 1]
    code, _, err = run(ssf_main, ["compute", "--input", "{oops"], capsys)
    assert code == 2 and json.loads(err)["error"] == "parse"
    code, _, err = run(ssf_main, ["compute", "--input", "/no/such/file.json"], capsys)
    assert code == 2 and json.loads(err)["error"] == "io"


def test_compute_out_writes_csv_sibling(tmp_path, capsys):
    out = tmp_path / "rec.json"
    code, stdout, _ = run(ssf_main, ["compute", "--input", SCALAR % (1, 2), "--out", str(out), "--samples", "0:1:3",
                                     "--timing"], capsys)
    assert code == 0 and stdout == ""
    assert "timingSeconds" in json.loads(out.read_text())
    assert (tmp_path / "rec.csv").read_text().startswith("t,eta,cumulative\n")


def test_gen_then_compute(tmp_path, capsys):
    code, out, _ = run(ssf_main, ["gen", "--dim", "3", "--seed", "4", "--n", "3"], capsys)
    assert code == 0
    code2, out2, _ = run(ssf_main, ["gen", "--dim", "3", "--seed", "4", "--n", "3"], capsys)
    assert out == out2
    p = tmp_path / "i.json"
    p.write_text(out)
    code, rec, _ = run(ssf_main, ["compute", "--input", str(p)], capsys)
    assert code == 0 and json.loads(rec)["order"] == 3


def test_gen_rejects_bad_dim(capsys):
    code, _, err = run(ssf_main, ["gen", "--dim", "0"], capsys)
    assert code == 2 and json.loads(err)["error"] == "usage"


def test_verify_small(capsys):
    code, out, _ = run(ssf_main, ["verify", "--count", "6", "--seed", "3"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and doc["seed"] == 3


def test_thread_determinism(capsys):
    outs = [run(ssf_main, ["verify", "--count", "8", "--seed", "1", "--threads", t], capsys)[1] for t in ("1", "4")]
    assert outs[0] == outs[1]


def test_moi_check_csv(tmp_path, capsys):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    c1, o1, _ = run(moi_main, ["check", "--count", "30", "--seed", "2", "--csv", str(p1)], capsys)
    c2, o2, _ = run(moi_main, ["check", "--count", "30", "--seed", "2", "--csv", str(p2)], capsys)
    assert c1 == 0 and o1 == o2 and p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().splitlines()[0] == "draw,symbol,m,error,bound"


def test_identities_check(capsys):
    code, out, _ = run(identities_main, ["check", "--count", "5"], capsys)
    assert code == 0 and json.loads(out)["pass"]


def test_bad_tolerance_file(tmp_path, capsys):
    p = tmp_path / "t.json"
    p.write_text('{"nope": 1}')
    code, _, err = run(moi_main, ["check", "--count", "3", "--tol-file", str(p)], capsys)
    assert code == 2 and json.loads(err)["error"] == "usage"


def test_env_threads(monkeypatch, capsys):
    monkeypatch.setenv("SPECSHIFT_THREADS", "x")
    code, _, err = run(ssf_main, ["verify", "--count", "2"], capsys)
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "specshift", "ssf", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
    assert main(["bogus"]) == 2
