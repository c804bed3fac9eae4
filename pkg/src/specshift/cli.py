"""Command line tools ``ssf``, ``moi`` and ``identities``.

Exit codes: 0 when every checked residual is within tolerance, 3 when any
residual breaches its tolerance, 2 on input or configuration errors (with a JSON
diagnostic on stderr).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load_tolerances, thread_count
from .instance import InstanceError, default_functions, generate_instance, parse_instances, serialize_instance, \
    _read_source
from .ssf import SpectralShiftFunction
from .suites import (check_instance, discretization_summary, discretization_table, identities_suite, kernel_suite,
                     moi_algebra_suite, run_parallel, taylor_suite, trace_formula_suite)

EXIT_OK, EXIT_INPUT, EXIT_BREACH = 0, 2, 3


class UsageError(ValueError):
    pass


def _fmt(x) -> str:
    return repr(float(x))


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _error(kind: str, message: str, **info) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **info}) + "\n")
    return EXIT_INPUT


# -- curves -----------------------------------------------------------------

def parse_grid(spec: str | None) -> np.ndarray:
    """``a:b:count`` (inclusive linspace), a comma list, or empty for breakpoints only."""
    if spec is None or spec.strip() in ("", "none"):
        return np.zeros(0)
    try:
        if ":" in spec:
            a, b, count = spec.split(":")
            return np.linspace(float(a), float(b), int(count))
        return np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise UsageError(f"bad grid spec {spec!r}; use a:b:count or a comma list") from None


def curve_rows(eta: SpectralShiftFunction, grid: np.ndarray) -> list[tuple[float, float, float]]:
    """``(t, eta(t), int_{-inf}^t eta)`` on the grid plus all breakpoints.

    At a jump the row carries the left limit and a duplicate row the right limit.
    """
    pp = eta.eta
    breaks = pp.breakpoints
    ts = np.union1d(np.asarray(grid, dtype=float), breaks)
    prim, tail = pp.antiderivative()

    def cumulative(t):
        if pp.num_pieces == 0 or t <= breaks[0]:
            return 0.0
        if t >= breaks[-1]:
            return float(np.real(tail))
        return float(np.real(prim(np.array([t]))[0]))

    jumps = {x for x, _ in eta.jumps}
    rows = []
    for t in ts:
        left = float(np.real(eta.left_limit(np.array([t]))[0]))
        rows.append((float(t), left, cumulative(t)))
        if t in jumps:
            rows.append((float(t), float(np.real(eta(np.array([t]))[0])), cumulative(t)))
    return rows


def curves_csv(items: list[tuple[str, SpectralShiftFunction]], grid: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    multi = len(items) > 1
    w.writerow((["instance"] if multi else []) + ["t", "eta", "cumulative"])
    for name, eta in items:
        for row in curve_rows(eta, grid):
            w.writerow(([name] if multi else []) + [_fmt(v) for v in row])
    return buf.getvalue()


# -- ssf ----------------------------------------------------------------------

def _load_instances(args) -> list:
    if not args.input:
        raise UsageError("--input is required")
    insts = parse_instances(_read_source(args.input))
    if args.n is not None:
        if args.n < 1:
            raise UsageError("--n must be >= 1")
        insts = [i.with_order(args.n) for i in insts]
    return insts


def _compute_record(inst, tol, timing: bool) -> tuple[dict, SpectralShiftFunction]:
    start = time.perf_counter()
    res = check_instance(inst, tol)
    rec = {
        "id": inst.id,
        "order": inst.n,
        "dim": inst.dim,
        "seed": inst.seed,
        "libraryVersion": __version__,
        "eta": res["eta"].to_dict(),
        "integral": res["moment"],
        "l1Norm": {"value": res["l1Norm"], "tolerance": None},
        "schattenPower": {"value": res["schattenPower"], "tolerance": None},
        "ratio": {"value": res["ratio"], "tolerance": None},
        "massDefect": {"value": res["massDefect"], "tolerance": tol["mass"]},
        "traceFormula": res["traceFormula"],
    }
    rec["pass"] = bool(res["moment"]["pass"] and all(r["pass"] for r in res["traceFormula"]))
    if timing:
        rec["timingSeconds"] = time.perf_counter() - start
    return rec, res["eta"]


def cmd_compute(args) -> int:
    tol = load_tolerances(args.tol_file)
    insts = _load_instances(args)
    grid = parse_grid(args.samples) if args.samples is not None else None
    results = run_parallel(lambda inst: _compute_record(inst, tol, args.timing), insts, thread_count(args.threads))
    records = [r for r, _ in results]
    doc = records[0] if len(records) == 1 else {"records": records}
    _emit(_dump(doc), args.out)
    if grid is not None:
        text = curves_csv([(r["id"], eta) for r, eta in results], grid)
        if args.curves:
            Path(args.curves).write_text(text)
        elif args.out:
            Path(args.out).with_suffix(".csv").write_text(text)
        else:
            sys.stdout.write(text)
    return EXIT_OK if all(r["pass"] for r in records) else EXIT_BREACH


def _suite_result(parts: list[dict]) -> tuple[dict, int]:
    props = [p for part in parts for p in part["properties"]]
    ok = all(p["pass"] for p in props)
    return {"libraryVersion": __version__, "properties": props, "pass": ok}, (EXIT_OK if ok else EXIT_BREACH)


def cmd_verify(args) -> int:
    tol = load_tolerances(args.tol_file)
    seed = args.seed if args.seed is not None else 0
    parts = [trace_formula_suite(seed, args.count, tol, thread_count(args.threads)),
             taylor_suite(seed, max(1, args.count // 4), tol)]
    doc, code = _suite_result(parts)
    doc["seed"] = seed
    _emit(_dump(doc), args.out)
    return code


def cmd_gen(args) -> int:
    if args.dim < 1:
        raise UsageError("--dim must be >= 1")
    if args.spread < 0 or args.budget < 0:
        raise UsageError("--spread and --budget must be non-negative")
    n = args.n if args.n is not None else 2
    seed = args.seed if args.seed is not None else 0
    inst = generate_instance(args.dim, args.spread, args.budget, seed, n,
                             default_functions(n, np.random.default_rng([seed, 99])))
    _emit(serialize_instance(inst) + "\n", args.out)
    return EXIT_OK


# -- moi / identities -------------------------------------------------------

def cmd_moi_check(args) -> int:
    tol = load_tolerances(args.tol_file)
    seed = args.seed if args.seed is not None else 0
    rows = discretization_table(seed, max(1, args.count // 30))
    disc = discretization_summary(rows)
    doc, code = _suite_result([moi_algebra_suite(seed, args.count, tol), {"properties": [disc]}])
    doc["seed"] = seed
    _emit(_dump(doc), args.out)
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["draw", "symbol", "m", "error", "bound"])
        for r in rows:
            w.writerow([r["draw"], r["symbol"], r["m"], _fmt(r["error"]), _fmt(r["bound"])])
        Path(args.csv).write_text(buf.getvalue())
    return code


def cmd_identities_check(args) -> int:
    tol = load_tolerances(args.tol_file)
    seed = args.seed if args.seed is not None else 0
    doc, code = _suite_result([identities_suite(seed, args.count, 12, tol), kernel_suite(seed, 2 * args.count, tol)])
    doc["seed"] = seed
    _emit(_dump(doc), args.out)
    return code


# -- parsers ------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=None, help="random seed")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--tol-file", dest="tol_file", default=None, help="JSON tolerance overrides")
    p.add_argument("--threads", type=int, default=None, help="worker threads across instances")


def ssf_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssf", description="Higher-order spectral shift functions.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="compute eta_n and check the trace formula")
    p.add_argument("--input", required=False, help="instance JSON (path or inline text)")
    p.add_argument("--n", type=int, default=None, help="override the order")
    p.add_argument("--samples", default=None, help="curve grid a:b:count or comma list ('' for breakpoints only)")
    p.add_argument("--curves", default=None, help="CSV path for sampled curves")
    p.add_argument("--timing", action="store_true", help="include wall-clock timings in the record")
    _common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", help="seeded trace formula and Taylor route suite")
    p.add_argument("--count", type=int, default=50, help="number of random instances")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate a seeded random instance")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--spread", type=float, default=1.0, help="eigenvalues of H uniform in [-spread, spread]")
    p.add_argument("--budget", type=float, default=0.5, help="Schatten-n norm of V")
    p.add_argument("--n", type=int, default=None, help="order (also the Schatten index), default 2")
    _common(p)
    p.set_defaults(func=cmd_gen)
    return parser


def _check_parser(prog: str, func, count: int, help_: str, csv_flag: bool = False) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=prog, description=help_)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", help=help_)
    p.add_argument("--count", type=int, default=count, help="random draws per property")
    if csv_flag:
        p.add_argument("--csv", default=None, help="CSV path for the discretization table")
    _common(p)
    p.set_defaults(func=func)
    return parser


def _run(parser: argparse.ArgumentParser, argv) -> int:
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InstanceError as exc:
        sys.stderr.write(json.dumps(exc.info) + "\n")
        return EXIT_INPUT
    except (UsageError, ConfigError) as exc:
        return _error("usage", str(exc))


def ssf_main(argv=None) -> int:
    return _run(ssf_parser(), argv)


def moi_main(argv=None) -> int:
    return _run(_check_parser("moi", cmd_moi_check, 100, "multiple operator integral algebra and discretization",
                              csv_flag=True), argv)


def identities_main(argv=None) -> int:
    return _run(_check_parser("identities", cmd_identities_check, 100, "scalar momentum identities and kernels"), argv)


def main(argv=None) -> int:
    """``python -m specshift {ssf|moi|identities} ...``"""
    argv = list(sys.argv[1:] if argv is None else argv)
    tools = {"ssf": ssf_main, "moi": moi_main, "identities": identities_main}
    if not argv or argv[0] not in tools:
        sys.stderr.write("usage: python -m specshift {ssf|moi|identities} ...\n")
        return EXIT_INPUT
    return tools[argv[0]](argv[1:])
