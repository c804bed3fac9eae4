"""Derivatives of ``t -> f(H + tV)`` and the Taylor remainder, by independent routes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .functions import SmoothTestFunction
from .moi import divided_difference_symbol, moi_exact
from .piecewise import gauss_legendre01
from .reduction import compensated_sum
from .spectral import HermitianOperator, SpectralDecomposition, apply_function, decompose, schatten_norm

DEFAULT_REMAINDER_NODES = 24


@dataclass
class PerturbationLine:
    """``H_t = H + tV`` with decompositions cached per ``t``."""

    H: HermitianOperator
    V: HermitianOperator
    cluster_tol: float | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not isinstance(self.H, HermitianOperator):
            self.H = HermitianOperator(self.H)
        if not isinstance(self.V, HermitianOperator):
            self.V = HermitianOperator(self.V)
        if self.H.dim != self.V.dim:
            raise ValueError(f"H has dimension {self.H.dim}, V has {self.V.dim}")

    @property
    def dim(self) -> int:
        return self.H.dim

    def at(self, t: float) -> np.ndarray:
        return self.H.matrix + float(t) * self.V.matrix

    def decomposition(self, t: float) -> SpectralDecomposition:
        key = float(t)
        if key not in self._cache:
            self._cache[key] = decompose(self.at(key), self.cluster_tol)
        return self._cache[key]

    def clear(self):
        self._cache.clear()


def derivative_order_k(line: PerturbationLine, f: SmoothTestFunction, k: int, t0: float = 0.0) -> np.ndarray:
    """``d^k/dt^k f(H_t)`` at ``t0`` as ``k! T_{f^[k]}(V, ..., V)``."""
    if k < 1:
        raise ValueError("derivative order must be >= 1")
    V = line.V.matrix
    if not np.any(V):
        return np.zeros((line.dim, line.dim), dtype=complex)
    D = line.decomposition(t0)
    return math.factorial(k) * moi_exact(D, divided_difference_symbol(f, k), [V] * k)


def default_fd_step(line: PerturbationLine) -> float:
    return 1e-3 / (1.0 + schatten_norm(line.V.matrix, np.inf))


def derivative_finite_difference(line: PerturbationLine, f: SmoothTestFunction, k: int, t0: float = 0.0,
                                 h: float | None = None) -> np.ndarray:
    """Central difference ``h^-k sum_j (-1)^j C(k,j) f(H_{t0 + (k/2 - j) h})``, error ``O(h^2)``."""
    if k < 1:
        raise ValueError("derivative order must be >= 1")
    h = default_fd_step(line) if h is None else float(h)
    if h <= 0:
        raise ValueError("step must be positive")
    terms = []
    for j in range(k + 1):
        t = t0 + (k / 2 - j) * h
        fj = apply_function(decompose(line.at(t), line.cluster_tol), f)
        terms.append((-1) ** j * math.comb(k, j) * fj)
    return compensated_sum(np.array(terms), axis=0) / h**k


def remainder_direct(line: PerturbationLine, f: SmoothTestFunction, n: int) -> np.ndarray:
    """``f(H + V) - sum_{k<n} (1/k!) d^k f(H_t)/dt^k |_{t=0}``."""
    if n < 1:
        raise ValueError("remainder order must be >= 1")
    terms = [apply_function(line.decomposition(1.0), f), -apply_function(line.decomposition(0.0), f)]
    for k in range(1, n):
        terms.append(-derivative_order_k(line, f, k, 0.0) / math.factorial(k))
    return compensated_sum(np.array(terms, dtype=complex), axis=0)


def remainder_integral(line: PerturbationLine, f: SmoothTestFunction, n: int,
                       nodes: int = DEFAULT_REMAINDER_NODES) -> np.ndarray:
    """``(1/(n-1)!) int_0^1 (1 - t)^(n-1) d^n f(H_t)/dt^n dt`` by Gauss-Legendre."""
    if n < 1:
        raise ValueError("remainder order must be >= 1")
    ts, ws = gauss_legendre01(nodes)
    terms = [w * (1 - t) ** (n - 1) * derivative_order_k(line, f, n, t) for t, w in zip(ts, ws)]
    return compensated_sum(np.array(terms), axis=0) / math.factorial(n - 1)


def trace_ratio(line: PerturbationLine, f: SmoothTestFunction, n: int, t0: float = 0.0) -> float | None:
    """``|tau(d^n f(H_t))| / (||f^(n)||_inf ||V||_n^n)``; ``None`` when ``V = 0``."""
    vn = schatten_norm(line.V.matrix, n) ** n
    if vn == 0:
        return None
    num = abs(np.trace(derivative_order_k(line, f, n, t0)))
    return float(num / (sup_norm_on_line(line, f, n) * vn))


def spectral_hull(line: PerturbationLine) -> tuple[float, float]:
    """Interval containing the spectra of ``H_t`` for ``t`` in ``[0, 1]``."""
    e0 = line.decomposition(0.0).raw_eigenvalues
    v = schatten_norm(line.V.matrix, np.inf)
    return float(e0[0] - v), float(e0[-1] + v)


def sup_norm_on_line(line: PerturbationLine, f: SmoothTestFunction, n: int) -> float:
    """``||f^(n)||_inf`` on the whole line when finite, else on :func:`spectral_hull`."""
    try:
        return f.sup_norm(n)
    except ValueError:
        return f.sup_norm(n, spectral_hull(line))
