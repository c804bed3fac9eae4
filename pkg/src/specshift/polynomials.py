"""Multivariate polynomials with real coefficients in the monomial basis."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp


@dataclass(frozen=True)
class MultivariatePolynomial:
    """``sum_e coeff[e] * prod_i x_i^e_i`` over a finite set of exponent tuples."""

    nvars: int
    terms: tuple  # ((exponents, coefficient), ...), sorted by exponents

    def __post_init__(self):
        merged: dict[tuple, float] = {}
        for exps, c in self.terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps} for {self.nvars} variables")
            merged[exps] = merged.get(exps, 0.0) + float(c)
        object.__setattr__(self, "terms", tuple(sorted((e, c) for e, c in merged.items() if c != 0.0)))

    @classmethod
    def from_dict(cls, nvars: int, coeffs: dict) -> "MultivariatePolynomial":
        return cls(nvars, tuple(coeffs.items()))

    @classmethod
    def constant(cls, nvars: int, value: float = 1.0) -> "MultivariatePolynomial":
        return cls(nvars, (((0,) * nvars, value),))

    @classmethod
    def variable(cls, nvars: int, index: int) -> "MultivariatePolynomial":
        e = [0] * nvars
        e[index] = 1
        return cls(nvars, ((tuple(e), 1.0),))

    @classmethod
    def from_sympy(cls, expr, symbols) -> "MultivariatePolynomial":
        poly = sp.Poly(sp.expand(expr), *symbols)
        return cls(len(symbols), tuple((m, float(c)) for m, c in poly.terms()))

    def to_sympy(self, symbols):
        return sum((sp.Float(c) if c != int(c) else sp.Integer(int(c))) * sp.Mul(*[x**e for x, e in zip(symbols, exps)])
                   for exps, c in self.terms) if self.terms else sp.Integer(0)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def __call__(self, points) -> np.ndarray:
        """Evaluate at ``points`` of shape ``(N, nvars)`` (or a single point)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {pts.shape[1]}")
        out = np.zeros(pts.shape[0])
        for exps, c in self.terms:
            out += c * np.prod(pts ** np.asarray(exps), axis=1)
        return out

    def to_dict(self) -> dict:
        return {"nvars": self.nvars, "terms": [[list(e), c] for e, c in self.terms]}
