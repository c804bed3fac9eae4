import numpy as np
import pytest
import sympy as sp

from specshift.functions import Gaussian
from specshift.identities import (check_decomp_ii, check_integral_rel, check_phi_mrep, decomposition_polynomials,
                                  integral_rel_polynomials)
from specshift.polynomials import MultivariatePolynomial

G = Gaussian(0.3, 0.9)


@pytest.mark.parametrize("m", [1, 2, 3, 5])
def test_phi_mrep(m):
    assert check_phi_mrep(G, m, -0.6, 0.1, 0.8) < 1e-10


def test_phi_mrep_rejects_bad_order():
    with pytest.raises(ValueError):
        check_phi_mrep(G, 1, 0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        check_phi_mrep(G, 1, 1.0, 1.0, 1.0)


@pytest.mark.parametrize("m,k", [(0, 0), (1, 0), (0, 1), (1, 1), (2, 3), (3, 2)])
def test_integral_rel(m, k):
    assert check_integral_rel(G, m, k, 0.7, -0.5, 0.2, 0.9) < 1e-10


def test_integral_rel_exact_for_polynomial_h():
    # both sides in exact arithmetic for h(u) = u^2 at rational points
    m, k = 1, 1
    kap, lam, xi, mu = sp.Rational(3, 4), sp.Rational(-1, 2), sp.Rational(1, 5), sp.Rational(1, 1)
    t, s, th = sp.symbols("t s theta")
    h = lambda u: u**2
    lhs = sp.integrate(sp.integrate(t**m * s**k * h(kap * xi + (lam - xi) * t + (mu - lam) * s), (s, 0, t)), (t, 0, kap))
    q, r = integral_rel_polynomials(m, k)
    zeta = (lam - xi) / (lam - mu)
    syms = sp.symbols("z K T")
    qs = q.to_sympy(syms).subs({syms[0]: zeta, syms[1]: kap, syms[2]: th})
    rs = r.to_sympy(syms).subs({syms[0]: zeta, syms[1]: kap, syms[2]: th})
    rhs = sp.integrate(qs * h(kap * xi + (lam - xi) * th) + rs * h(kap * xi + (mu - xi) * th), (th, 0, kap))
    assert float(abs(lhs - rhs)) < 1e-14


def test_decomposition_constant_p():
    assert check_decomp_ii(G, None, 2, [-0.5, 0.9, 0.1]) < 1e-10


@pytest.mark.parametrize("n", [2, 3, 4])
def test_decomposition_polynomial_p(n, rng):
    terms = (((1,) + (0,) * (n - 1), 1.5), ((0,) * (n - 1) + (2,), -0.7), ((0,) * n, 0.3))
    p = MultivariatePolynomial(n, terms)
    pts = [-0.8, 0.7, 0.2] + list(rng.uniform(-1, 1, n - 2))
    assert check_decomp_ii(G, p, n, pts) < 1e-10


def test_decomposition_polynomials_depend_only_on_p():
    p = MultivariatePolynomial.variable(3, 0)
    q1, r1 = decomposition_polynomials(p)
    q2, r2 = decomposition_polynomials(MultivariatePolynomial.variable(3, 0))
    assert q1 == q2 and r1 == r2 and q1.nvars == 3


def test_decomposition_rejects_bad_ordering():
    with pytest.raises(ValueError):
        check_decomp_ii(G, None, 2, [0.0, 1.0, 2.0])
