"""The twelve acceptance criteria, each reported as one pass/fail line."""
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from specshift.config import DEFAULT_TOLERANCES
from specshift.functions import Gaussian, Polynomial
from specshift.instance import generate_instance, instance_to_dict, parse_instance, serialize_instance
from specshift.spectral import HermitianOperator
from specshift.ssf import continuity_in_v, eta_n, l1_norm_and_ratios, remainder_ratio
from specshift.suites import (discretization_summary, discretization_table, identities_suite, kernel_suite,
                              moi_algebra_suite, random_instances, taylor_suite, trace_formula_suite)
from specshift.taylor import PerturbationLine, trace_ratio

from conftest import record_criterion

SEED = 20240611
SCALINGS = (0.25, 0.5, 1.0, 2.0)


def prop(suite, name):
    return next(p for p in suite["properties"] if p["property"] == name)


@pytest.fixture(scope="module")
def trace_suite():
    start = time.perf_counter()
    suite = trace_formula_suite(SEED, 50)
    return suite, time.perf_counter() - start


def test_criterion_01_trace_formula(trace_suite):
    suite, elapsed = trace_suite
    p = prop(suite, "traceFormula")
    dims = {i["dim"] for i in suite["instances"]}
    orders = {i["n"] for i in suite["instances"]}
    ok = (p["pass"] and p["worstResidual"] <= 1e-8 and elapsed < 60 and len(suite["instances"]) == 50
          and dims == {2, 3, 4, 5, 6} and orders == {1, 2, 3, 4} and p["draws"] == 200)
    assert record_criterion("1 trace formula", ok, f"worst relative residual {p['worstResidual']:.2e} over "
                            f"{p['draws']} checks (tol 1e-8), {elapsed:.1f}s")


def test_criterion_02_moment_identity(trace_suite):
    p = prop(trace_suite[0], "moment")
    ok = p["pass"] and p["worstResidual"] <= 1e-9 and p["draws"] == 50
    assert record_criterion("2 moment identity", ok, f"worst relative error {p['worstResidual']:.2e} (tol 1e-9)")


def test_criterion_03_scalar_closed_forms():
    worst = 0.0
    for v in (0.5, 1.0, 3.0):
        closed = {1: lambda t: np.where((t >= 0) & (t < v), 1.0, 0.0),
                  2: lambda t: np.maximum(v - t, 0.0) * (t >= 0),
                  3: lambda t: np.maximum(v - t, 0.0) ** 2 / 2 * (t >= 0)}
        for n, fn in closed.items():
            eta = eta_n(np.array([[0.0]]), np.array([[v]]), n)
            b = eta.eta.breakpoints
            ts = np.concatenate([b, (b[:-1] + b[1:]) / 2])
            worst = max(worst, float(np.max(np.abs(eta(ts) - fn(ts)))))
    assert record_criterion("3 scalar closed forms", worst <= 1e-12, f"worst pointwise error {worst:.2e} (tol 1e-12)")


def test_criterion_04_derivative_identity():
    suite = taylor_suite(SEED, 12)
    fd, order = prop(suite, "finiteDifference"), prop(suite, "richardsonOrder")
    obs = suite["observedOrders"]
    ok = fd["pass"] and fd["worstResidual"] <= 1e-5 and order["pass"]
    assert record_criterion("4 derivative identity", ok, f"worst |FD - MOI| {fd['worstResidual']:.2e} at h=1e-3 "
                            f"(tol 1e-5), observed orders {min(obs):.3f}..{max(obs):.3f}")


def test_criterion_05_remainder_routes():
    p = prop(taylor_suite(SEED + 1, 12), "remainderRoutes")
    ok = p["pass"] and p["worstResidual"] <= 1e-8
    assert record_criterion("5 remainder routes", ok, f"worst trace-norm difference {p['worstResidual']:.2e} "
                            f"relative to 1+scale (tol 1e-8)")


def test_criterion_06_moi_algebra():
    suite = moi_algebra_suite(SEED, 100)
    worst = max(p["worstResidual"] for p in suite["properties"])
    names = {p["property"] for p in suite["properties"]}
    ok = all(p["pass"] for p in suite["properties"]) and worst <= 1e-10
    ok = ok and {"adjoint", "duality", "product", "composition"} <= names
    assert record_criterion("6 MOI algebra", ok, f"worst scaled residual {worst:.2e} over {sorted(names)} (tol 1e-10)")


def test_criterion_07_discretization():
    rows = discretization_table(SEED, 4)
    s = discretization_summary(rows)
    final = [r for r in rows if r["m"] == 16]
    slack = min(r["bound"] - r["error"] for r in final)
    assert record_criterion("7 discretization", s["pass"], f"{s['draws']} symbol draws, non-increasing "
                            f"{sum(s['monotone'])}/{s['draws']}, final bound slack {slack:.2e}")


def test_criterion_08_scalar_identities():
    suite = identities_suite(SEED, 100, degree=12)
    worst = {p["property"]: p["worstResidual"] for p in suite["properties"]}
    ok = all(p["pass"] and p["draws"] == 100 for p in suite["properties"]) and max(worst.values()) <= 1e-7
    assert record_criterion("8 scalar identities", ok,
                            ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + " (tol 1e-7)")


def test_criterion_09_kernel_oracle():
    p = kernel_suite(SEED, 200)["properties"][0]
    ok = p["pass"] and p["draws"] == 200 and p["worstResidual"] <= 1e-8
    assert record_criterion("9 kernel oracle", ok, f"worst triple disagreement {p['worstResidual']:.2e} (tol 1e-8)")


def _spread(values) -> float:
    v = np.asarray(values, dtype=float)
    return float((v.max() - v.min()) / np.abs(v).max())


def test_criterion_10_estimate_shadows_exact_regimes():
    """Ratios constant in s wherever homogeneity is exact.

    The derivative trace ratio is homogeneous for every f; the remainder ratio
    for f = t^n; ||eta_n||_1 whenever eta_n keeps one sign (order 2 always,
    any order for positive semidefinite V or scalar H).
    """
    worst = 0.0
    report = []
    for i, inst in enumerate(random_instances(SEED, 8, dims=(2, 3, 4))):
        H, V = inst.H, inst.V.matrix
        f = inst.functions[0]
        for n in (1, 2, 3, 4):
            worst = max(worst, _spread([trace_ratio(PerturbationLine(H, s * V), f, n) for s in SCALINGS]))
            power = Polynomial((0.0,) * n + (1.0,))
            worst = max(worst, _spread([remainder_ratio(H, s * V, n, power) for s in SCALINGS]))
        worst = max(worst, _spread([r for _, _, r in l1_norm_and_ratios(H, V, 2, SCALINGS).scalings]))
        psd = V @ V.conj().T
        scalar_h = HermitianOperator(np.eye(inst.dim) * (0.3 * i - 1))
        for n in (1, 2, 3, 4):
            worst = max(worst, _spread([r for _, _, r in l1_norm_and_ratios(H, psd, n, SCALINGS).scalings]))
            worst = max(worst, _spread([r for _, _, r in l1_norm_and_ratios(scalar_h, V, n, SCALINGS).scalings]))
        rep = l1_norm_and_ratios(H, V, inst.n, SCALINGS)
        report.append(f"n={inst.n}:" + "/".join(f"{r:.4g}" for _, _, r in rep.scalings))
    ok = worst <= DEFAULT_TOLERANCES["homogeneity"]
    assert record_criterion("10 estimate shadows (exact regimes)", ok,
                            f"worst relative spread {worst:.2e} (tol 1e-6); reported l1 ratios {' '.join(report)}")


@pytest.mark.xfail(strict=True, reason="the remainder ratio for non-polynomial f and ||eta_n||_1 for sign-changing "
                                       "eta_n are not homogeneous in s")
def test_criterion_10_estimate_shadows_general():
    inst = generate_instance(4, 1.0, 0.6, seed=0, n=3)
    H, V = inst.H, inst.V.matrix
    f = Gaussian(0.1, 0.9)
    rem = {n: _spread([remainder_ratio(H, s * V, n, f) for s in SCALINGS]) for n in (1, 2, 3, 4)}
    l1 = {n: _spread([r for _, _, r in l1_norm_and_ratios(H, V, n, SCALINGS).scalings]) for n in (1, 2, 3, 4)}
    worst = max(max(rem.values()), max(l1.values()))
    ok = worst <= DEFAULT_TOLERANCES["homogeneity"]
    record_criterion("10 estimate shadows (general f and V, as stated)", ok,
                     "relative spreads: remainder " + " ".join(f"n={n}:{v:.3f}" for n, v in rem.items())
                     + "; l1 " + " ".join(f"n={n}:{v:.3f}" for n, v in l1.items()) + " (tol 1e-6)")
    assert ok


def test_criterion_11_continuity():
    inst = generate_instance(4, 1.0, 0.6, seed=SEED, n=2)
    seq = [(1 - 2.0**-k) * inst.V.matrix for k in range(1, 25)]
    details, ok = [], True
    for n in (1, 2, 3):
        rep = continuity_in_v(inst.H, seq, n, limit=inst.V)
        d = rep.eta_distances
        good = all(b < a for a, b in zip(d, d[1:])) and d[-1] < 1e-6
        ok = ok and good
        details.append(f"n={n} first {d[0]:.2e} last {d[-1]:.2e}")
    assert record_criterion("11 continuity", ok, "strictly decreasing, " + ", ".join(details) + " (target < 1e-6)")


def _cli(*args) -> bytes:
    res = subprocess.run([sys.executable, "-m", "specshift", *args], capture_output=True, check=False)
    assert res.returncode == 0, res.stderr.decode()
    return res.stdout


def test_criterion_12_cli_determinism_and_round_trip(tmp_path):
    checks = {}
    v = [_cli("ssf", "verify", "--seed", "7", "--threads", t) for t in ("1", "1", "4")]
    checks["ssf verify"] = v[0] == v[1] == v[2]
    csvs = []
    for run, t in enumerate(("1", "1", "4")):
        p = tmp_path / f"disc{run}.csv"
        out = _cli("moi", "check", "--seed", "7", "--count", "60", "--threads", t, "--csv", str(p))
        csvs.append((out, p.read_bytes()))
    checks["moi check"] = csvs[0] == csvs[1] == csvs[2]
    inst = tmp_path / "inst.json"
    inst.write_bytes(_cli("ssf", "gen", "--dim", "4", "--seed", "7", "--n", "3"))
    batch = json.dumps({"instances": [json.loads(inst.read_text()),
                                      instance_to_dict(generate_instance(3, seed=8, n=2, id="second"))]})
    batch_path = tmp_path / "batch.json"
    batch_path.write_text(batch)
    runs = [_cli("ssf", "compute", "--input", str(batch_path), "--samples", "0:1:5", "--threads", t)
            for t in ("1", "1", "4")]
    checks["ssf compute"] = runs[0] == runs[1] == runs[2]
    exact = True
    for seed in range(5):
        a = generate_instance(1 + seed, 1.5, 0.4, seed=seed, n=1 + seed % 4)
        b = parse_instance(serialize_instance(a))
        exact = exact and instance_to_dict(a) == instance_to_dict(b) and b.functions == a.functions
        exact = exact and np.array_equal(a.H.matrix, b.H.matrix) and np.array_equal(a.V.matrix, b.V.matrix)
    checks["round trip"] = exact
    ok = all(checks.values())
    assert record_criterion("12 CLI determinism", ok, ", ".join(f"{k} {'identical' if v else 'DIFFERS'}"
                                                                 for k, v in checks.items()))
