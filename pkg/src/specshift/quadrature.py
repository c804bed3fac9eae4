"""Quadrature on the unit simplex via the iterated-integral substitution.

The simplex ``S_n = {s in R^{n+1}: s_j >= 0, sum s_j = 1}`` carries the surface
measure whose total mass is ``1/n!``.  We integrate over ordered variables
``1 >= t_1 >= t_2 >= ... >= t_n >= 0`` with ``t_j = s_0 + ... + s_{n-j}``, and
collapse the ordered region to the unit cube with ``t_j = t_{j-1} u_j``.  The
Jacobian ``prod_j u_j^(n-j)`` is absorbed into a Gauss-Jacobi rule per level, so
a rule with ``q`` points per level integrates every polynomial of total degree
``<= 2q - 1`` in ``s`` exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

DEFAULT_DEGREE = 12


@lru_cache(maxsize=None)
def _jacobi01(count: int, beta: int) -> tuple[np.ndarray, np.ndarray]:
    # weight u^beta on [0, 1]
    if beta == 0:
        x, w = np.polynomial.legendre.leggauss(count)
    else:
        x, w = roots_jacobi(count, 0.0, float(beta))
    return 0.5 * (x + 1.0), w / 2.0 ** (beta + 1)


@dataclass(frozen=True)
class SimplexQuadratureRule:
    """Nodes and weights on ``S_n``.

    ``barycentric`` has shape ``(N, n+1)`` holding ``(s_0, ..., s_n)``;
    ``nodes`` is the projection ``(s_1, ..., s_n)`` onto the corner simplex ``R_n``.
    """

    dim: int
    degree: int
    barycentric: np.ndarray
    weights: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.barycentric[:, 1:]

    @property
    def size(self) -> int:
        return len(self.weights)

    def integrate(self, values) -> complex | float:
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))


@lru_cache(maxsize=64)
def simplex_rule(dim: int, degree: int = DEFAULT_DEGREE) -> SimplexQuadratureRule:
    """Rule on ``S_dim`` exact for polynomials of total degree ``<= degree``."""
    if dim < 0:
        raise ValueError("simplex dimension must be >= 0")
    if dim == 0:
        return SimplexQuadratureRule(0, degree, np.ones((1, 1)), np.ones(1))
    q = max(1, math.ceil((degree + 1) / 2))
    levels = [_jacobi01(q, dim - j) for j in range(1, dim + 1)]
    grids = np.meshgrid(*[u for u, _ in levels], indexing="ij")
    wgrids = np.meshgrid(*[w for _, w in levels], indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    t = np.cumprod(u, axis=1)  # t_1 >= t_2 >= ... >= t_n
    # s_j = t_{n-j} - t_{n-j+1} with t_0 = 1, t_{n+1} = 0
    padded = np.hstack([np.ones((len(w), 1)), t, np.zeros((len(w), 1))])
    s = np.empty((len(w), dim + 1))
    for j in range(dim + 1):
        s[:, j] = padded[:, dim - j] - padded[:, dim - j + 1]
    s.setflags(write=False)
    w.setflags(write=False)
    return SimplexQuadratureRule(dim, degree, s, w)


def gauss01(degree: int = DEFAULT_DEGREE) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on ``[0, 1]`` exact for polynomials of degree ``<= degree``."""
    return _jacobi01(max(1, math.ceil((degree + 1) / 2)), 0)
