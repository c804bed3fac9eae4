import math

import numpy as np
import pytest

from specshift.functions import Exponential, Gaussian, Polynomial
from specshift.piecewise import PiecewisePolynomial
from specshift.spectral import schatten_norm
from specshift.ssf import (SpectralShiftFunction, continuity_in_v, eta_n, eta_sequence, krein_eta1, l1_norm_and_ratios,
                           moment_target, mu_measure, remainder_ratio, verify_trace_formula)
from specshift.taylor import PerturbationLine, derivative_order_k, remainder_direct

from conftest import random_hermitian

G = (math.sqrt(5) - 1) / 2
H2 = np.diag([0.0, 1.0])
X2 = np.array([[0.0, 1.0], [1.0, 0.0]])


def sample_points(eta):
    b = eta.eta.breakpoints
    return np.concatenate([b, (b[:-1] + b[1:]) / 2, [b[0] - 1, b[-1] + 1]])


@pytest.mark.parametrize("v", [0.5, 2.0])
def test_scalar_closed_forms(v):
    H, V = np.array([[0.0]]), np.array([[v]])
    closed = {1: lambda t: ((t >= 0) & (t < v)).astype(float),
              2: lambda t: np.where((t >= 0) & (t < v), v - t, 0.0),
              3: lambda t: np.where((t >= 0) & (t < v), (v - t) ** 2 / 2, 0.0)}
    for n, fn in closed.items():
        eta = eta_n(H, V, n)
        ts = sample_points(eta)
        assert np.max(np.abs(eta(ts) - fn(ts))) <= 1e-12
        assert eta.integral() == pytest.approx(v**n / math.factorial(n), abs=1e-14)


def test_negative_scalar_eta1():
    eta = krein_eta1([[0.0]], [[-1.5]])
    assert eta(np.array([-1.0]))[0] == -1 and eta(np.array([0.0]))[0] == 0
    assert eta.integral() == pytest.approx(-1.5)


def test_krein_sign_convention(rng):
    H, V = random_hermitian(rng, 4), random_hermitian(rng, 4)
    for f in (Gaussian(0.2, 0.7), Exponential()):
        assert verify_trace_formula(H, V, 1, f).residual < 1e-9


def test_two_by_two_oracle():
    # hand-derived: eta_2 for H = diag(0, 1), V = swap
    eta = eta_n(H2, X2, 2)
    ts = np.linspace(-1, 2, 301)
    want = np.where(ts < -G, 0.0, np.where(ts < 0, ts + G, np.where(ts < 1, G, np.where(ts < 1 + G, G - (ts - 1), 0.0))))
    assert np.max(np.abs(eta(ts) - want)) < 1e-14
    chk = verify_trace_formula(H2, X2, 2, Exponential())
    assert abs(chk.lhs - 1.8638868976250280369) < 1e-13
    assert abs(chk.rhs - 1.8638868976250280369) < 1e-13


def test_mu_examples():
    mu1 = mu_measure([[0.3]], [[2.0]], 1)
    assert mu1.atoms == ((0.3, 2.0),) and mu1.density.num_pieces == 0
    assert mu_measure(H2, X2, 1).total_mass == 0
    mu2 = mu_measure(H2, X2, 2)
    assert not mu2.atoms
    ts = np.linspace(0.01, 0.99, 7)
    assert np.allclose(mu2.density(ts), 1.0, atol=1e-14)
    assert mu2.density.support == (0.0, 1.0)


def test_mu_moment_identity(rng):
    H, V = random_hermitian(rng, 4), random_hermitian(rng, 4)
    f = Gaussian(-0.3, 0.8)
    for k in (1, 2, 3):
        mu = mu_measure(H, V, k)
        lhs = mu.integrate(lambda t: f.derivative(k, t), nodes=40)
        rhs = np.trace(derivative_order_k(PerturbationLine(H, V), f, k)) / math.factorial(k)
        assert abs(lhs - rhs) < 1e-9
        assert mu.imag_residue < 1e-9


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_zero_perturbation(n, rng):
    eta = eta_n(random_hermitian(rng, 3), np.zeros((3, 3)), n)
    assert eta.l1_norm() == 0
    assert verify_trace_formula(random_hermitian(rng, 3), np.zeros((3, 3)), n, Gaussian()).residual == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_trace_formula_random(n, rng):
    H, V = random_hermitian(rng, 4), random_hermitian(rng, 4)
    eta = eta_n(H, V, n)
    for f in (Gaussian(0.1, 0.9), Gaussian(-0.5, 1.4, 2.0), Polynomial((0.2, -1, 0.5, 0.3, -0.2, 0.1, 0.05)[: n + 3])):
        chk = verify_trace_formula(H, V, n, f, eta)
        assert chk.residual <= 1e-8 * (1 + abs(chk.lhs))
    power = Polynomial((0,) * n + (1,))
    chk = verify_trace_formula(H, V, n, power, eta)
    assert abs(chk.lhs - np.trace(np.linalg.matrix_power(V, n))) < 1e-10
    assert abs(eta.integral() - moment_target(V, n)) <= 1e-9 * (1 + abs(moment_target(V, n)))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_support_and_mass(n, rng):
    H, V = random_hermitian(rng, 5), random_hermitian(rng, 5)
    eta = eta_n(H, V, n)
    spec = np.concatenate([np.linalg.eigvalsh(H), np.linalg.eigvalsh(H + V)])
    lo, hi = eta.support
    assert lo >= spec.min() - 1e-12 and hi <= spec.max() + 1e-12
    prev = eta_n(H, V, n - 1)
    mu = mu_measure(H, V, n - 1)
    scale = 1 + mu.variation_bound + prev.l1_norm()
    assert abs(eta.meta["massDefect"]) <= 1e-10 * scale


def test_recursion_consistency(rng):
    H, V = random_hermitian(rng, 4), random_hermitian(rng, 4)
    f = Gaussian(0.3, 1.1)
    line = PerturbationLine(H, V)
    for n in (2, 3, 4):
        lhs = np.trace(remainder_direct(line, f, n))
        mu = mu_measure(H, V, n - 1)
        rhs = np.trace(remainder_direct(line, f, n - 1)) - mu.integrate(lambda t: f.derivative(n - 1, t), nodes=40)
        assert abs(lhs - rhs) < 1e-9


def test_sequence_matches_individual(rng):
    H, V = random_hermitian(rng, 3), random_hermitian(rng, 3)
    seq = eta_sequence(H, V, 3)
    for k, eta in enumerate(seq, 1):
        ts = sample_points(eta)
        assert np.allclose(eta(ts), eta_n(H, V, k)(ts), atol=1e-14)


def test_repeated_eigenvalues(rng):
    H = np.diag([0.0, 0.0, 1.0, 1.0])
    V = random_hermitian(rng, 4)
    for n in (2, 3):
        chk = verify_trace_formula(H, V, n, Gaussian(0.4, 0.9))
        assert chk.residual <= 1e-8 * (1 + abs(chk.lhs))


def test_scalar_norm_ratio():
    rep = l1_norm_and_ratios([[0.0]], [[1.5]], 2, scalings=(0.5, 2.0))
    assert rep.l1 == pytest.approx(1.5**2 / 2) and rep.ratio == pytest.approx(0.5)
    assert all(r == pytest.approx(0.5) for _, _, r in rep.scalings)
    assert l1_norm_and_ratios([[0.0]], [[0.0]], 2).ratio is None


def test_eta1_l1_is_step_area():
    rep = l1_norm_and_ratios(H2, X2, 1)
    # |eta_1| = 1 on [-g, 0) and on [1, 1 + g)
    assert rep.l1 == pytest.approx(2 * G)


def test_remainder_ratio_homogeneous_for_power(rng):
    H, V = random_hermitian(rng, 4), random_hermitian(rng, 4)
    f = Polynomial((0, 0, 0, 1))
    r = [remainder_ratio(H, s * V, 3, f) for s in (0.25, 0.5, 1, 2)]
    assert max(r) - min(r) <= 1e-6 * max(r)


def test_continuity(rng):
    H, V = random_hermitian(rng, 3), random_hermitian(rng, 3)
    seq = [(1 - 2.0**-k) * V for k in range(1, 8)]
    rep = continuity_in_v(H, seq, 2, limit=V)
    assert all(b < a for a, b in zip(rep.eta_distances, rep.eta_distances[1:]))
    const = continuity_in_v(H, [V, V, V], 2)
    assert const.consecutive == (0.0, 0.0)
    with pytest.raises(ValueError):
        continuity_in_v(H, [np.eye(2)], 2)


def test_serialisation_round_trip(rng):
    eta = eta_n(random_hermitian(rng, 3), random_hermitian(rng, 3), 3)
    back = SpectralShiftFunction.from_dict(eta.to_dict())
    assert back.order == 3 and back.jumps == eta.jumps
    assert np.array_equal(back.eta.breakpoints, eta.eta.breakpoints)
    ts = sample_points(eta)
    assert np.array_equal(back(ts), eta(ts))


def test_order_validation():
    with pytest.raises(ValueError):
        eta_n([[0.0]], [[1.0]], 0)
    with pytest.raises(ValueError):
        mu_measure([[0.0]], [[1.0]], 0)
