import math

import numpy as np
import pytest

from specshift.functions import DerivativeOrderError, Exponential, Gaussian, Polynomial
from specshift.kernels import (DegenerateKernelError, divided_difference, divided_difference_array, hermite_genocchi,
                               peano_kernel)
from specshift.quadrature import simplex_rule

G = Gaussian(0.2, 0.8)


def test_polynomial_divided_difference_exact():
    assert divided_difference(Polynomial((0, 0, 0, 1)), [0.0, 1.0, 2.0]) == 3.0
    # annihilates lower degree
    assert divided_difference(Polynomial((1, 2, 3)), [0.1, 0.5, 0.9, 2.0]) == 0.0


def test_reference_values():
    # 40-digit mpmath Newton tableau with derivative entries at repeated nodes
    assert divided_difference(G, [0.3, 0.3, 1.1]) == pytest.approx(-0.52671047647244974129, abs=1e-14)
    assert divided_difference(G, [-0.4, 0.1, 0.1, 0.9]) == pytest.approx(-0.030119562680420555769, abs=1e-14)
    assert divided_difference(Exponential(), [1.0, 2.0]) == pytest.approx(4.6707742704716049919, rel=1e-14)


def test_fully_confluent_is_derivative():
    assert divided_difference(G, [0.5] * 4) == pytest.approx(G.derivative(3, 0.5) / 6, rel=1e-13)


def test_array_matches_scalar(rng):
    pts = rng.uniform(-1, 1, (20, 4))
    pts[::3, 2] = pts[::3, 1]
    vals = divided_difference_array(G, pts)
    for p, v in zip(pts, vals):
        assert v == pytest.approx(divided_difference(G, p), abs=1e-12)


def test_order_limit():
    with pytest.raises(DerivativeOrderError):
        divided_difference(Gaussian(max_order=2), [0.0] * 4)


def test_peano_kernel_shapes():
    hat = peano_kernel([0.0, 1.0, 2.0])
    assert hat.coeffs.tolist() == [[0.0, 0.5], [0.5, -0.5]]
    ramp = peano_kernel([0.0, 0.0, 1.0])
    assert ramp.coeffs.tolist() == [[1.0, -1.0]]
    # cardinal quadratic B-spline is 3/4 at its centre; the kernel carries 1/3!
    assert peano_kernel([0.0, 1.0, 2.0, 3.0])(np.array([1.5]))[0] == pytest.approx(0.125)
    with pytest.raises(DegenerateKernelError):
        peano_kernel([1.0, 1.0, 1.0])


@pytest.mark.parametrize("nodes", [[0.1, 0.9], [-0.5, 0.3, 1.2], [0.0, 0.0, 0.7], [-1.0, 0.2, 0.2, 0.2, 1.0],
                                   [0.4, -0.3, 0.4, 1.1]])
def test_triple_agreement(nodes):
    n = len(nodes) - 1
    dd = divided_difference(G, nodes)
    hg = hermite_genocchi(G, nodes, simplex_rule(n, 30))
    pk = peano_kernel(nodes).integrate_against(lambda t: G.derivative(n, t))
    assert hg == pytest.approx(dd, abs=1e-12)
    assert pk == pytest.approx(dd, abs=1e-12)


def test_kernel_mass():
    for nodes in ([0, 1, 3], [0, 0, 1, 2], [-1, 0.5, 0.5, 2, 2]):
        n = len(nodes) - 1
        assert peano_kernel(nodes).integral() == pytest.approx(1 / math.factorial(n), rel=1e-13)
