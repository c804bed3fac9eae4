"""Divided differences, B-spline (Peano) kernels and polynomial integral momenta."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .functions import DerivativeOrderError, Polynomial, SmoothTestFunction
from .piecewise import PiecewisePolynomial
from .polynomials import MultivariatePolynomial
from .quadrature import DEFAULT_DEGREE, SimplexQuadratureRule, simplex_rule
from .spectral import default_cluster_tol


class DegenerateKernelError(ValueError):
    """All nodes coincide: the kernel is a point mass, not a density."""


def cluster_nodes(nodes, tol: float | None = None) -> list[float]:
    """Sort nodes and replace each run of nodes closer than ``tol`` by its mean."""
    xs = sorted(float(x) for x in nodes)
    if tol is None:
        tol = default_cluster_tol(np.asarray(xs))
    out: list[float] = []
    run = [xs[0]]
    for x in xs[1:]:
        if x - run[-1] <= tol:
            run.append(x)
        else:
            out.extend([math.fsum(run) / len(run)] * len(run))
            run = [x]
    out.extend([math.fsum(run) / len(run)] * len(run))
    return out


def _max_multiplicity(xs) -> int:
    best = run = 1
    for a, b in zip(xs, xs[1:]):
        run = run + 1 if a == b else 1
        best = max(best, run)
    return best


def divided_difference(f: SmoothTestFunction, nodes, order: int | None = None, cluster_tol: float | None = None):
    """``f^[n](nodes)`` with confluent nodes handled by the derivative branch.

    Nodes are sorted and clustered first.  For polynomial ``f`` the tableau is
    run in exact rational arithmetic; otherwise in floating point.
    """
    n = len(nodes) - 1 if order is None else order
    if len(nodes) != n + 1:
        raise ValueError(f"order {n} needs {n + 1} nodes, got {len(nodes)}")
    xs = cluster_nodes(nodes, cluster_tol)
    need = _max_multiplicity(xs) - 1
    if need > f.max_order:
        raise DerivativeOrderError(f"confluent nodes need derivative order {need}, {f.family} supports {f.max_order}")
    if isinstance(f, Polynomial):
        fx = [Fraction(x) for x in xs]
        deriv = lambda k, i: f.derivative_exact(k, fx[i])
        return float(_tableau(fx, deriv, Fraction))
    deriv = lambda k, i: f.derivative(k, np.array([xs[i]]))[0]
    return _tableau(xs, deriv, float)


def _tableau(xs, deriv, num):
    n = len(xs) - 1
    col = [deriv(0, i) for i in range(n + 1)]
    for level in range(1, n + 1):
        nxt = []
        for i in range(n + 1 - level):
            j = i + level
            if xs[j] == xs[i]:
                nxt.append(deriv(level, i) / num(math.factorial(level)))
            else:
                nxt.append((col[i + 1] - col[i]) / (xs[j] - xs[i]))
        col = nxt
    return col[0]


def divided_difference_array(f: SmoothTestFunction, nodes: np.ndarray, cluster_tol: float | None = None) -> np.ndarray:
    """Vectorised ``f^[n]`` over node tuples stored along the last axis of ``nodes``."""
    x = np.sort(np.asarray(nodes, dtype=float), axis=-1)
    n = x.shape[-1] - 1
    tol = default_cluster_tol(x.ravel()) if cluster_tol is None else cluster_tol
    for j in range(1, n + 1):
        close = x[..., j] - x[..., j - 1] <= tol
        x[..., j] = np.where(close, x[..., j - 1], x[..., j])
    col = [f.derivative(0, x[..., i]) for i in range(n + 1)]
    derivs: dict[int, list] = {}
    for level in range(1, n + 1):
        nxt = []
        for i in range(n + 1 - level):
            dx = x[..., i + level] - x[..., i]
            equal = dx == 0
            quotient = (col[i + 1] - col[i]) / np.where(equal, 1.0, dx)
            if np.any(equal):
                if level not in derivs:
                    if level > f.max_order:
                        raise DerivativeOrderError(f"confluent nodes need derivative order {level}")
                    derivs[level] = [f.derivative(level, x[..., k]) / math.factorial(level) for k in range(n + 1 - level)]
                quotient = np.where(equal, derivs[level][i], quotient)
            nxt.append(quotient)
        col = nxt
    return col[0]


def derivative_of(f: SmoothTestFunction, k: int) -> Callable:
    """The callable ``t -> f^(k)(t)``."""
    return lambda t: f.derivative(k, t)


def hermite_genocchi(f: SmoothTestFunction, nodes, rule: SimplexQuadratureRule | None = None) -> float:
    """Simplex average ``int_{S_n} f^(n)(sum_j s_j lambda_j) dsigma_n``."""
    lam = np.asarray(nodes, dtype=float)
    n = len(lam) - 1
    rule = simplex_rule(n, DEFAULT_DEGREE) if rule is None else rule
    if rule.dim != n:
        raise ValueError(f"rule dimension {rule.dim} != {n}")
    return rule.integrate(f.derivative(n, rule.barycentric @ lam))


def peano_kernel(nodes, order: int | None = None, cluster_tol: float | None = None) -> PiecewisePolynomial:
    """B-spline kernel ``M`` with ``f^[n](nodes) = int f^(n)(t) M(t) dt``.

    Built with the Cox-de Boor recursion for the normalised B-spline on the
    sorted knots (repeated knots allowed) and scaled by ``1/n!``.
    """
    n = len(nodes) - 1 if order is None else order
    if n < 1 or len(nodes) != n + 1:
        raise ValueError(f"need n >= 1 and n + 1 nodes, got n={n} with {len(nodes)} nodes")
    x = cluster_nodes(nodes, cluster_tol)
    if x[0] == x[-1]:
        raise DegenerateKernelError("all nodes coincide; the kernel is a point mass")
    breaks = np.array(sorted(set(x)))
    coeffs = np.zeros((len(breaks) - 1, n))
    for i in range(len(breaks) - 1):
        coeffs[i, :] = _cox_de_boor_piece(x, breaks[i], breaks[i + 1], n) / math.factorial(n)
    return PiecewisePolynomial(breaks, coeffs, "right")


def _cox_de_boor_piece(x, a: float, b: float, n: int) -> np.ndarray:
    """Coefficients in ``u = t - a`` of the normalised B-spline on knots ``x`` over ``[a, b]``."""
    memo: dict[tuple[int, int], np.ndarray] = {}

    def M(j: int, k: int) -> np.ndarray:
        key = (j, k)
        if key in memo:
            return memo[key]
        lo, hi = x[j], x[j + k]
        if hi == lo:
            out = np.zeros(1)
        elif k == 1:
            out = np.array([1.0 / (hi - lo)]) if lo <= a and b <= hi else np.zeros(1)
        else:
            left = npoly.polymul([a - lo, 1.0], M(j, k - 1))
            right = npoly.polymul([hi - a, -1.0], M(j + 1, k - 1))
            out = npoly.polyadd(left, right) * (k / ((k - 1) * (hi - lo)))
        memo[key] = out
        return out

    c = M(0, n)
    out = np.zeros(n)
    out[: min(len(c), n)] = c[:n]
    return out


@dataclass(frozen=True)
class MomentumSpec:
    """Triple ``(n, h, p)`` of a polynomial integral momentum.

    ``h`` is a vectorised callable; ``p`` a polynomial in ``(s_1, ..., s_n)`` or
    ``None`` for the constant 1.
    """

    n: int
    h: Callable
    p: MultivariatePolynomial | None = None

    def __post_init__(self):
        if self.p is not None and self.p.nvars != self.n:
            raise ValueError(f"momentum polynomial must have {self.n} variables, has {self.p.nvars}")


def momentum_phi(spec: MomentumSpec, lambdas, rule: SimplexQuadratureRule | None = None) -> complex:
    """``int_{S_n} p(s_1..s_n) h(sum_j s_j lambda_j) dsigma_n`` by simplex quadrature."""
    lam = np.asarray(lambdas, dtype=float)
    if len(lam) != spec.n + 1:
        raise ValueError(f"momentum of order {spec.n} takes {spec.n + 1} points")
    rule = simplex_rule(spec.n, DEFAULT_DEGREE) if rule is None else rule
    if rule.dim != spec.n:
        raise ValueError(f"rule dimension {rule.dim} != {spec.n}")
    vals = np.asarray(spec.h(rule.barycentric @ lam))
    if spec.p is not None:
        vals = vals * spec.p(rule.nodes)
    return rule.integrate(vals)


def psi_momentum(h: Callable, q: MultivariatePolynomial, zeta: float, mus, rule: SimplexQuadratureRule | None = None):
    """``int_{S_n} q(zeta, s_1..s_n) h(sum_j s_j mu_j) dsigma_n`` (``q`` has ``n + 1`` variables)."""
    mu = np.asarray(mus, dtype=float)
    n = len(mu) - 1
    if q.nvars != n + 1:
        raise ValueError(f"psi of order {n} needs a polynomial in {n + 1} variables")
    rule = simplex_rule(n, DEFAULT_DEGREE) if rule is None else rule
    pts = np.hstack([np.full((rule.size, 1), float(zeta)), rule.nodes])
    return rule.integrate(np.asarray(h(rule.barycentric @ mu)) * q(pts))
