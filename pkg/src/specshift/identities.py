"""Residual checks for the momentum splitting identities.

Each ``check_*`` returns the absolute difference between the two sides of an
identity, both evaluated by quadrature.  The polynomials appearing on the right
hand sides are built exactly with sympy and cached per input polynomial.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy as sp

from .kernels import MomentumSpec, momentum_phi, psi_momentum
from .polynomials import MultivariatePolynomial
from .quadrature import DEFAULT_DEGREE, gauss01, simplex_rule


def phi_mh(h: Callable, m: int, lam: float, mu: float, degree: int = DEFAULT_DEGREE):
    """``int_0^1 t^(m-1) h(lam + (mu - lam) t) dt``."""
    t, w = gauss01(degree + m - 1)
    return np.dot(w, t ** (m - 1) * np.asarray(h(lam + (mu - lam) * t)))


def _check_interval(lam: float, xi: float, mu: float):
    if lam == mu:
        raise ValueError("the identity needs lambda != mu")
    if not (lam <= xi <= mu):
        raise ValueError(f"need lambda <= xi <= mu, got ({lam}, {xi}, {mu})")


def check_phi_mrep(h: Callable, m: int, lam: float, xi: float, mu: float, degree: int = DEFAULT_DEGREE) -> float:
    """Residual of splitting ``phi_{m,h}(lam, mu)`` at an intermediate point ``xi``."""
    _check_interval(lam, xi, mu)
    if m < 1:
        raise ValueError("m must be >= 1")
    zeta = (lam - xi) / (lam - mu)
    omega = (xi - mu) / (lam - mu)
    lhs = phi_mh(h, m, lam, mu, degree)
    rhs = zeta**m * phi_mh(h, m, lam, xi, degree) + omega**m * phi_mh(h, m, xi, mu, degree)
    for k in range(1, m):
        rhs += math.comb(m - 1, k - 1) * zeta ** (m - k) * omega**k * phi_mh(h, k, xi, mu, degree)
    return float(abs(lhs - rhs))


_Z, _K, _T = sp.symbols("zeta kappa theta")
_t1 = sp.Symbol("t1")


@lru_cache(maxsize=None)
def _integral_rel_sympy(m: int, k: int):
    q = _Z ** (k + 1) * sp.integrate((_t1 - _T) ** k * _t1**m, (_t1, _T, _K))
    r = (1 - _Z) * sp.integrate(((1 - _Z) * _T + _Z * _t1) ** k * _t1**m, (_t1, _T, _K))
    return sp.expand(q), sp.expand(r)


def integral_rel_polynomials(m: int, k: int) -> tuple[MultivariatePolynomial, MultivariatePolynomial]:
    """``q, r`` in the variables ``(zeta, kappa, theta)``:

    ``q = zeta^(k+1) int_theta^kappa (t - theta)^k t^m dt``,
    ``r = (1 - zeta) int_theta^kappa ((1 - zeta) theta + zeta t)^k t^m dt``.
    """
    q, r = _integral_rel_sympy(m, k)
    syms = (_Z, _K, _T)
    return MultivariatePolynomial.from_sympy(q, syms), MultivariatePolynomial.from_sympy(r, syms)


def check_integral_rel(h: Callable, m: int, k: int, kappa: float, lam: float, xi: float, mu: float,
                       degree: int = DEFAULT_DEGREE) -> float:
    """Residual of rewriting the triangle integral of ``t^m s^k h(...)`` as two line integrals."""
    _check_interval(lam, xi, mu)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    # left side: s = t v, t = kappa u on the unit square
    u, wu = gauss01(degree + m + k + 1)
    v, wv = gauss01(degree + k)
    U, Vv = np.meshgrid(u, v, indexing="ij")
    T = kappa * U
    arg = kappa * xi + (lam - xi) * T + (mu - lam) * T * Vv
    integrand = T ** (m + k + 1) * Vv**k * np.asarray(h(arg))
    lhs = kappa * np.einsum("i,j,ij->", wu, wv, integrand)

    zeta = (lam - xi) / (lam - mu)
    q, r = integral_rel_polynomials(m, k)
    x, w = gauss01(degree + m + k + 1)
    theta = kappa * x
    pts = np.column_stack([np.full_like(theta, zeta), np.full_like(theta, kappa), theta])
    rhs = kappa * np.dot(w, q(pts) * np.asarray(h(kappa * xi + (lam - xi) * theta)))
    rhs += kappa * np.dot(w, r(pts) * np.asarray(h(kappa * xi + (mu - xi) * theta)))
    return float(abs(lhs - rhs))


@lru_cache(maxsize=256)
def _decomp_polynomials_cached(n: int, terms: tuple):
    p = MultivariatePolynomial(n, terms)
    s = sp.symbols(f"s1:{n + 1}")
    t, sv = sp.symbols("t s")
    # p_2(t, s) = p(s_1 = s, s_2 = kappa - t, s_3..s_n)
    p2 = sp.expand(p.to_sympy(s).subs({s[0]: sv, s[1]: _K - t}, simultaneous=True))
    poly = sp.Poly(p2, t, sv)
    q1 = sp.Integer(0)
    r1 = sp.Integer(0)
    for (m, k), coeff in poly.terms():
        qmk, rmk = _integral_rel_sympy(m, k)
        q1 += coeff * qmk
        r1 += coeff * rmk
    # new variables (zeta, y_1..y_{n-1}); y_1 = s_2 = kappa - theta, y_j = s_{j+1} for j >= 2
    y = sp.symbols(f"y1:{n}")
    kappa = 1 - sum(y[1:], sp.Integer(0))
    subs = {s[j]: y[j - 1] for j in range(2, n)}
    subs.update({_K: kappa, _T: kappa - y[0]})
    q = sp.expand(q1.subs(subs, simultaneous=True))
    r = sp.expand(r1.subs(subs, simultaneous=True))
    syms = (_Z,) + tuple(y)
    return MultivariatePolynomial.from_sympy(q, syms), MultivariatePolynomial.from_sympy(r, syms)


def decomposition_polynomials(p: MultivariatePolynomial) -> tuple[MultivariatePolynomial, MultivariatePolynomial]:
    """Polynomials ``q, r`` (variables ``zeta, s_1..s_{n-1}``) depending only on ``p``."""
    if p.nvars < 2:
        raise ValueError("the decomposition needs n >= 2")
    return _decomp_polynomials_cached(p.nvars, p.terms)


def check_decomp_ii(h: Callable, p: MultivariatePolynomial | None, n: int, lambdas, degree: int = DEFAULT_DEGREE) -> float:
    """Residual of lowering ``phi_{n,h,p}(l0, l1, l2, ...)`` to two order ``n-1`` momenta."""
    if n < 2:
        raise ValueError("n must be >= 2")
    lam = np.asarray(lambdas, dtype=float)
    if len(lam) != n + 1:
        raise ValueError(f"need {n + 1} points")
    l0, l1, l2 = lam[:3]
    if l0 == l1:
        raise ValueError("the decomposition needs lambda_0 != lambda_1")
    if not (l0 <= l2 <= l1):
        raise ValueError("need lambda_0 <= lambda_2 <= lambda_1")
    p = MultivariatePolynomial.constant(n) if p is None else p
    q, r = decomposition_polynomials(p)
    zeta = (l0 - l2) / (l0 - l1)
    lhs = momentum_phi(MomentumSpec(n, h, p), lam, simplex_rule(n, degree + p.degree))
    rule = simplex_rule(n - 1, degree + max(q.degree, r.degree))
    rest = list(lam[3:])
    rhs = psi_momentum(h, q, zeta, [l0, l2] + rest, rule) + psi_momentum(h, r, zeta, [l1, l2] + rest, rule)
    return float(abs(lhs - rhs))
