"""Seeded verification suites shared by the command line and the acceptance tests.

Every suite returns plain dictionaries of floats so that results serialise
deterministically.  Random draws come from ``numpy.random.default_rng(seed)``
with per-draw child seeds, so a draw does not depend on which other draws run.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES
from .functions import Exponential, Gaussian, Polynomial
from .identities import check_decomp_ii, check_integral_rel, check_phi_mrep
from .instance import ProblemInstance, generate_instance
from .kernels import divided_difference, hermite_genocchi, peano_kernel
from .moi import (MoiSymbol, adjoint_property, composition_property, divided_difference_symbol, duality_trace,
                  frobenius_bound, grid_modulus, moi_discretized, moi_exact, product_property)
from .polynomials import MultivariatePolynomial
from .quadrature import simplex_rule
from .spectral import decompose, schatten_norm
from .ssf import eta_sequence, moment_target, verify_trace_formula
from .taylor import PerturbationLine, derivative_finite_difference, derivative_order_k, remainder_direct, \
    remainder_integral


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([seed, *keys])


def run_parallel(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; results keep input order."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _summary(name: str, residuals: list[float], tol: float) -> dict:
    worst = max(residuals) if residuals else 0.0
    return {"property": name, "draws": len(residuals), "worstResidual": worst, "tolerance": tol,
            "pass": bool(all(r < tol for r in residuals))}


# -- trace formula and Taylor routes ---------------------------------------

def check_instance(inst: ProblemInstance, tolerances: dict | None = None) -> dict:
    """Trace formula per function and the moment identity for one instance.

    Residuals are reported relative: the trace residual is divided by
    ``1 + |lhs|`` and the moment residual by ``max(|Tr V^n| / n!, tiny)``.
    """
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {}), **inst.tolerances}
    etas = eta_sequence(inst.H, inst.V, inst.n)
    eta = etas[-1]
    target = moment_target(inst.V, inst.n)
    integral = eta.integral()
    moment_scale = max(abs(target), 1e-300)
    moment_res = abs(integral - target) / moment_scale if target != 0 else abs(integral)
    rows = []
    for f in inst.functions:
        chk = verify_trace_formula(inst.H, inst.V, inst.n, f, eta)
        rel = chk.residual / (1.0 + abs(chk.lhs))
        rows.append({"function": f.to_dict(), "lhs": _cx(chk.lhs), "rhs": _cx(chk.rhs), "residual": chk.residual,
                     "relativeResidual": rel, "tolerance": tol["traceFormula"], "pass": rel < tol["traceFormula"]})
    vn = schatten_norm(inst.V.matrix, inst.n) ** inst.n
    l1 = eta.l1_norm()
    return {
        "eta": eta,
        "traceFormula": rows,
        "moment": {"integral": integral, "target": target, "relativeResidual": moment_res,
                   "tolerance": tol["moment"], "pass": moment_res < tol["moment"]},
        "l1Norm": l1,
        "schattenPower": vn,
        "ratio": l1 / vn if vn > 0 else None,
        "massDefect": eta.meta.get("massDefect", 0.0),
    }


def _cx(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def random_instances(seed: int, count: int, dims: Sequence[int] = (2, 3, 4, 5, 6),
                     orders: Sequence[int] = (1, 2, 3, 4)) -> list[ProblemInstance]:
    out = []
    for i in range(count):
        rng = _rng(seed, 1, i)
        d = int(dims[i % len(dims)])
        n = int(orders[(i // len(dims)) % len(orders)])
        spread = float(rng.uniform(0.5, 2.0))
        budget = float(rng.uniform(0.1, 1.0))
        g = (Gaussian(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.5, 1.5))),
             Gaussian(float(rng.uniform(-1, 1)), float(rng.uniform(0.3, 0.8)), float(rng.uniform(0.5, 2))),
             Gaussian(float(rng.uniform(-2, 2)), float(rng.uniform(1.5, 3.0)), float(rng.uniform(-1, 1))))
        p = Polynomial(tuple(float(c) for c in rng.uniform(-1, 1, n + 3)))
        inst = generate_instance(d, spread, budget, int(rng.integers(2**31)), n, g + (p,), id=f"draw-{seed}-{i}")
        out.append(inst)
    return out


def trace_formula_suite(seed: int = 0, count: int = 50, tolerances: dict | None = None, threads: int = 1) -> dict:
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    insts = random_instances(seed, count)
    results = run_parallel(lambda inst: check_instance(inst, tol), insts, threads)
    trace = [r["relativeResidual"] for res in results for r in res["traceFormula"]]
    moment = [res["moment"]["relativeResidual"] for res in results]
    return {"instances": [{"id": i.id, "dim": i.dim, "n": i.n} for i in insts],
            "properties": [_summary("traceFormula", trace, tol["traceFormula"]),
                           _summary("moment", moment, tol["moment"])]}


def taylor_suite(seed: int = 0, count: int = 12, tolerances: dict | None = None) -> dict:
    """Remainder routes (trace-norm) and MOI vs finite differences with Richardson orders."""
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    routes, fd, orders = [], [], []
    for i in range(count):
        rng = _rng(seed, 2, i)
        d = int(rng.integers(2, 5))
        inst = generate_instance(d, float(rng.uniform(0.5, 2)), float(rng.uniform(0.2, 1)), int(rng.integers(2**31)), 2)
        line = PerturbationLine(inst.H, inst.V)
        f = Gaussian(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.6, 1.5)))
        for n in range(1, 5):
            a = remainder_direct(line, f, n)
            b = remainder_integral(line, f, n)
            routes.append(schatten_norm(a - b, 1) / (1.0 + schatten_norm(a, 1)))
        t0 = float(rng.uniform(0, 1))
        for k in range(1, 4):
            exact = derivative_order_k(line, f, k, t0)
            fd.append(float(np.max(np.abs(derivative_finite_difference(line, f, k, t0, 1e-3) - exact))))
            errs = [np.max(np.abs(derivative_finite_difference(line, f, k, t0, h) - exact)) for h in (0.08, 0.04)]
            orders.append(math.log2(errs[0] / errs[1]))
    order_res = [abs(o - 2.0) for o in orders]
    return {"properties": [_summary("remainderRoutes", routes, tol["remainderRoutes"]),
                           _summary("finiteDifference", fd, tol["finiteDifference"]),
                           _summary("richardsonOrder", order_res, tol["richardsonOrder"])],
            "observedOrders": orders}


# -- multiple operator integrals -------------------------------------------

def random_symbol(rng: np.random.Generator, n: int, terms: int = 3) -> MoiSymbol:
    """``sum_k a_k exp(i <b_k, lambda>)`` with complex ``a_k`` and real ``b_k``."""
    a = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
    b = rng.uniform(-1.5, 1.5, (terms, n + 1))

    def evaluate(p):
        return np.exp(1j * (p @ b.T)) @ a

    return MoiSymbol(n, evaluate, ("trigonometric", terms))


def _random_hermitian(rng, d: int) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (z + z.conj().T) / 2


def _random_matrix(rng, d: int) -> np.ndarray:
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def _sup(D, phi) -> float:
    return float(np.max(np.abs(phi.on_grid(D.values))))


def _norms(args) -> float:
    return math.prod(float(np.linalg.norm(x)) for x in args)


def moi_algebra_suite(seed: int = 0, count: int = 100, tolerances: dict | None = None) -> dict:
    """Adjoint, duality, product, composition and linearity over random draws.

    Each residual is divided by its scale ``sup|phi| * prod ||x_j||_F`` (with the
    extra argument of the duality pairing included).
    """
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    res = {"adjoint": [], "duality": [], "product": [], "composition": [], "linearity": [], "frobenius": []}
    for i in range(count):
        rng = _rng(seed, 3, i)
        d = int(rng.integers(2, 5))
        n = int(rng.integers(1, 4))
        D = decompose(_random_hermitian(rng, d))
        phi = random_symbol(rng, n)
        args = [_random_matrix(rng, d) for _ in range(n)]
        scale = _sup(D, phi) * _norms(args)
        res["adjoint"].append(adjoint_property(D, phi, args) / scale)
        x0 = _random_matrix(rng, d)
        left, right = duality_trace(D, phi, x0, args)
        res["duality"].append(abs(left - right) / (scale * np.linalg.norm(x0)))
        # split n = k + (n - k) for the product, n = k + (n - k + 1) - 1 for the composition
        k = int(rng.integers(1, n + 1))
        phi1 = random_symbol(rng, k)
        if k < n:
            phi2 = random_symbol(rng, n - k)
            s = _sup(D, phi1) * _sup(D, phi2) * _norms(args)
            res["product"].append(product_property(D, phi1, phi2, args) / s)
        phi2c = random_symbol(rng, n - k + 1)
        s = _sup(D, phi1) * _sup(D, phi2c) * _norms(args)
        res["composition"].append(composition_property(D, phi1, phi2c, args) / s)
        # linearity in phi and in the first argument
        psi = random_symbol(rng, n)
        c = complex(rng.standard_normal(), rng.standard_normal())
        comb = MoiSymbol(n, lambda p: phi(p) + c * psi(p))
        lin = moi_exact(D, comb, args) - moi_exact(D, phi, args) - c * moi_exact(D, psi, args)
        y = _random_matrix(rng, d)
        lin2 = (moi_exact(D, phi, [args[0] + c * y] + args[1:]) - moi_exact(D, phi, args)
                - c * moi_exact(D, phi, [y] + args[1:]))
        res["linearity"].append(max(np.linalg.norm(lin) / ((_sup(D, phi) + abs(c) * _sup(D, psi)) * _norms(args)),
                                    np.linalg.norm(lin2) / (scale * (1 + abs(c) * np.linalg.norm(y)))))
        lhs, bound = frobenius_bound(D, phi, args)
        res["frobenius"].append(max(0.0, lhs - bound) / scale)
    return {"properties": [_summary(k, v, tol["algebra"]) for k, v in res.items()]}


def discretization_table(seed: int = 0, count: int = 3, ms: Sequence[int] = (1, 2, 4, 8, 16), dim: int = 4) -> list[dict]:
    """Rows ``(draw, m, error, bound)`` with ``bound = omega(m) * prod ||x_j||_F``.

    The symbols are ``f^[1]`` of ``exp`` (coordinatewise increasing, so the grid
    error is monotone in ``m = 2^j``) and of a gaussian.
    """
    rows = []
    for i in range(count):
        rng = _rng(seed, 4, i)
        D = decompose(_random_hermitian(rng, dim))
        x = _random_matrix(rng, dim)
        for name, phi in (("expDividedDifference", divided_difference_symbol(Exponential(1.0), 1)),
                          ("gaussianDividedDifference", divided_difference_symbol(Gaussian(0.0, 1.0), 1))):
            exact = moi_exact(D, phi, [x])
            for m in ms:
                err = float(np.linalg.norm(moi_discretized(D, phi, m, [x]) - exact))
                bound = grid_modulus(D, phi, m) * float(np.linalg.norm(x))
                rows.append({"draw": i, "symbol": name, "m": m, "error": err, "bound": bound})
    return rows


def discretization_summary(rows: list[dict]) -> dict:
    mono, within = [], []
    keys = sorted({(r["draw"], r["symbol"]) for r in rows})
    for key in keys:
        errs = [r for r in rows if (r["draw"], r["symbol"]) == key]
        e = [r["error"] for r in errs]
        mono.append(all(b <= a for a, b in zip(e, e[1:])))
        within.append(errs[-1]["error"] <= errs[-1]["bound"])
    return {"property": "discretization", "draws": len(keys), "monotone": mono, "finalWithinBound": within,
            "pass": bool(all(mono) and all(within))}


# -- scalar identities and kernels ------------------------------------------

def _ordered_triple(rng) -> tuple[float, float, float]:
    lam, mu = sorted(rng.uniform(-1, 1, 2))
    if mu - lam < 1e-3:
        mu = lam + 0.5
    return float(lam), float(rng.uniform(lam, mu)), float(mu)


def identities_suite(seed: int = 0, count: int = 100, degree: int = 12, tolerances: dict | None = None) -> dict:
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    phim, integ, decomp = [], [], []
    for i in range(count):
        rng = _rng(seed, 5, i)
        # the identities are exact; the residual is the error of degree-12 quadrature,
        # which is controlled by the interval length relative to the gaussian width
        h = Gaussian(float(rng.uniform(-1, 1)), float(rng.uniform(0.5, 2.0)))
        lam, xi, mu = _ordered_triple(rng)
        phim.append(check_phi_mrep(h, int(rng.integers(1, 6)), lam, xi, mu, degree))
        lam, xi, mu = _ordered_triple(rng)
        integ.append(check_integral_rel(h, int(rng.integers(0, 4)), int(rng.integers(0, 4)),
                                        float(rng.uniform(0.2, 1.0)), lam, xi, mu, degree))
        n = int(rng.integers(2, 5))
        p = _random_poly(rng, n)
        l0, l2, l1 = _ordered_triple(rng)
        rest = [float(v) for v in rng.uniform(-1, 1, n - 2)]
        decomp.append(check_decomp_ii(h, p, n, [l0, l1, l2] + rest, degree))
    t = tol["identities"]
    return {"properties": [_summary("phiMrep", phim, t), _summary("integralRel", integ, t),
                           _summary("decompII", decomp, t)]}


def _random_poly(rng, n: int, terms: int = 3, max_degree: int = 2) -> MultivariatePolynomial:
    out = []
    for _ in range(terms):
        e = [0] * n
        for _ in range(int(rng.integers(0, max_degree + 1))):
            e[int(rng.integers(n))] += 1
        out.append((tuple(e), float(rng.uniform(-1, 1))))
    return MultivariatePolynomial(n, tuple(out))


def kernel_suite(seed: int = 0, count: int = 200, tolerances: dict | None = None) -> dict:
    """Divided difference vs Hermite-Genocchi vs Peano kernel, including confluent nodes."""
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    res = []
    for i in range(count):
        rng = _rng(seed, 6, i)
        n = int(rng.integers(1, 5))
        nodes = list(rng.uniform(-1.5, 1.5, n + 1))
        if i % 3 == 0 and n >= 2:  # confluent: repeat some nodes
            j = int(rng.integers(n))
            nodes[j + 1] = nodes[j]
            if i % 2 == 0:
                nodes[0] = nodes[-1]
        f = Gaussian(float(rng.uniform(-0.5, 0.5)), float(rng.uniform(0.7, 1.5)))
        dd = divided_difference(f, nodes)
        hg = hermite_genocchi(f, nodes, simplex_rule(n, 30))
        if max(nodes) - min(nodes) > 0:
            pk = peano_kernel(nodes).integrate_against(lambda t: f.derivative(n, t), 24)
        else:
            pk = dd
        res.append(max(abs(dd - hg), abs(dd - pk), abs(hg - pk)))
    return {"properties": [_summary("kernelTriple", res, tol["kernel"])]}
