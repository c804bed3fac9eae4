"""Piecewise polynomials with exact integration, refinement and L1 norms.

Piece ``i`` lives on ``[b_i, b_{i+1}]`` and is stored as coefficients of
``u = t - b_i`` in increasing powers.  The function is zero outside
``[b_0, b_K]``.  At interior breakpoints the value is the right limit when
``side == "right"`` and the left limit when ``side == "left"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre01(count: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[0, 1]``."""
    if count not in _GAUSS_CACHE:
        x, w = np.polynomial.legendre.leggauss(count)
        _GAUSS_CACHE[count] = (0.5 * (x + 1.0), 0.5 * w)
    return _GAUSS_CACHE[count]


def taylor_shift(c: np.ndarray, delta: float) -> np.ndarray:
    """Coefficients of ``p(u + delta)`` given those of ``p(u)`` (increasing powers)."""
    c = np.asarray(c)
    deg = len(c) - 1
    out = np.zeros_like(c)
    for m in range(deg + 1):
        out[m] = sum(c[k] * math.comb(k, m) * delta ** (k - m) for k in range(m, deg + 1))
    return out


@dataclass(frozen=True)
class PiecewisePolynomial:
    breakpoints: np.ndarray
    coeffs: np.ndarray
    side: str = "right"

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        c = np.asarray(self.coeffs)
        if c.dtype.kind not in "fc":
            c = c.astype(float)
        if c.ndim == 1:
            c = c.reshape(len(b) - 1, -1) if len(b) > 1 else c.reshape(0, max(len(c), 1))
        if len(b) == 1 or (len(b) >= 2 and np.any(np.diff(b) <= 0)):
            raise ValueError("breakpoints must be strictly increasing with at least two entries (or none)")
        if c.shape[0] != max(len(b) - 1, 0):
            raise ValueError(f"{c.shape[0]} coefficient rows for {len(b)} breakpoints")
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "coeffs", c)

    # -- construction -----------------------------------------------------
    @classmethod
    def zero(cls, side: str = "right") -> "PiecewisePolynomial":
        return cls(np.zeros(0), np.zeros((0, 1)), side)

    @classmethod
    def constant(cls, a: float, b: float, value: float, side: str = "right") -> "PiecewisePolynomial":
        return cls(np.array([a, b]), np.array([[value]]), side)

    @property
    def num_pieces(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def is_zero(self) -> bool:
        return self.num_pieces == 0 or not np.any(self.coeffs)

    @property
    def support(self) -> tuple[float, float] | None:
        if self.num_pieces == 0:
            return None
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def with_side(self, side: str) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.breakpoints, self.coeffs, side)

    # -- evaluation -------------------------------------------------------
    def piece_index(self, t) -> np.ndarray:
        """Index of the piece used at ``t``; -1 where the function is zero."""
        t = np.asarray(t, dtype=float)
        b = self.breakpoints
        if self.num_pieces == 0:
            return np.full(t.shape, -1)
        if self.side == "right":
            idx = np.searchsorted(b, t, side="right") - 1
            inside = (t >= b[0]) & (t < b[-1])
        else:
            idx = np.searchsorted(b, t, side="left") - 1
            inside = (t > b[0]) & (t <= b[-1])
        return np.where(inside, idx, -1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = self.piece_index(t)
        out = np.zeros(t.shape, dtype=self.coeffs.dtype)
        ok = idx >= 0
        if np.any(ok):
            i = idx[ok]
            u = t[ok] - self.breakpoints[i]
            acc = np.zeros(u.shape, dtype=self.coeffs.dtype)
            for k in range(self.degree, -1, -1):
                acc = acc * u + self.coeffs[i, k]
            out[ok] = acc
        return out

    def left_limit(self, t: float):
        return self.with_side("left")(np.array([t]))[0]

    def right_limit(self, t: float):
        return self.with_side("right")(np.array([t]))[0]

    def jumps(self) -> list[tuple[float, float]]:
        """``(location, right - left)`` at every breakpoint with a non-zero jump."""
        out = []
        for x in self.breakpoints:
            j = self.right_limit(x) - self.left_limit(x)
            if j != 0:
                out.append((float(x), j))
        return out

    # -- algebra ----------------------------------------------------------
    def _with_degree(self, deg: int) -> np.ndarray:
        c = self.coeffs
        if c.shape[1] - 1 >= deg:
            return c
        return np.hstack([c, np.zeros((c.shape[0], deg + 1 - c.shape[1]), dtype=c.dtype)])

    def refine(self, points) -> "PiecewisePolynomial":
        """Same function on the union of the current breakpoints and ``points``.

        New pieces outside the old support are zero; new pieces inside are the
        Taylor-shifted old pieces, so the representation stays exact.
        """
        new = np.union1d(self.breakpoints, np.asarray(points, dtype=float))
        if len(new) < 2:
            return self
        deg = self.degree
        coeffs = np.zeros((len(new) - 1, deg + 1), dtype=self.coeffs.dtype)
        b = self.breakpoints
        for j in range(len(new) - 1):
            mid = 0.5 * (new[j] + new[j + 1])
            if self.num_pieces == 0 or mid <= b[0] or mid >= b[-1]:
                continue
            i = int(np.searchsorted(b, mid, side="right") - 1)
            delta = new[j] - b[i]
            coeffs[j] = taylor_shift(self.coeffs[i], delta) if delta != 0.0 else self.coeffs[i]
        return PiecewisePolynomial(new, coeffs, self.side)

    def _aligned(self, other: "PiecewisePolynomial"):
        pts = np.union1d(self.breakpoints, other.breakpoints)
        a, b = self.refine(pts), other.refine(pts)
        deg = max(a.degree, b.degree)
        return pts, a._with_degree(deg), b._with_degree(deg)

    def __add__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        if other.num_pieces == 0:
            return self
        if self.num_pieces == 0:
            return other.with_side(self.side)
        pts, a, b = self._aligned(other)
        return PiecewisePolynomial(pts, a + b, self.side)

    def __neg__(self) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.breakpoints, -self.coeffs, self.side)

    def __sub__(self, other: "PiecewisePolynomial") -> "PiecewisePolynomial":
        return self + (-other)

    def __mul__(self, s) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.breakpoints, self.coeffs * s, self.side)

    __rmul__ = __mul__

    @property
    def real(self) -> "PiecewisePolynomial":
        return PiecewisePolynomial(self.breakpoints, np.real(self.coeffs).copy(), self.side)

    def derivative(self) -> "PiecewisePolynomial":
        if self.degree == 0:
            return PiecewisePolynomial(self.breakpoints, np.zeros_like(self.coeffs), self.side)
        k = np.arange(1, self.degree + 1)
        return PiecewisePolynomial(self.breakpoints, self.coeffs[:, 1:] * k, self.side)

    def piece_integrals(self) -> np.ndarray:
        h = np.diff(self.breakpoints)
        k = np.arange(self.degree + 1)
        return np.sum(self.coeffs * h[:, None] ** (k + 1) / (k + 1), axis=1)

    def integral(self):
        """Exact integral over the real line."""
        if self.num_pieces == 0:
            return 0.0
        pieces = self.piece_integrals()
        if np.iscomplexobj(pieces):
            return complex(math.fsum(pieces.real), math.fsum(pieces.imag))
        return math.fsum(pieces)

    def antiderivative(self) -> tuple["PiecewisePolynomial", float]:
        """Continuous antiderivative vanishing at ``b_0`` and its constant tail value.

        The returned piecewise polynomial is the antiderivative on ``[b_0, b_K]``
        (zero outside); to the right of ``b_K`` the true antiderivative equals the
        returned tail value.
        """
        if self.num_pieces == 0:
            return PiecewisePolynomial.zero(self.side), 0.0
        k = np.arange(1, self.degree + 2)
        coeffs = np.zeros((self.num_pieces, self.degree + 2), dtype=self.coeffs.dtype)
        coeffs[:, 1:] = self.coeffs / k
        pieces = self.piece_integrals()
        start = np.concatenate([[0.0], np.cumsum(pieces)])
        coeffs[:, 0] = start[:-1]
        return PiecewisePolynomial(self.breakpoints, coeffs, self.side), start[-1]

    def l1_norm(self) -> float:
        """Exact ``int |p|``: real roots inside each piece split it into sign-definite parts."""
        total = []
        for i in range(self.num_pieces):
            c = np.real_if_close(self.coeffs[i])
            h = self.breakpoints[i + 1] - self.breakpoints[i]
            if np.iscomplexobj(c):
                raise ValueError("L1 norm of a complex piecewise polynomial is not supported")
            cuts = [0.0, h]
            nz = np.flatnonzero(c)
            if len(nz) == 0:
                continue
            trimmed = c[: nz[-1] + 1]
            if len(trimmed) > 1:
                for r in npoly.polyroots(trimmed):
                    if abs(r.imag) <= 1e-12 * max(1.0, abs(r.real)) and 0.0 < r.real < h:
                        cuts.append(float(r.real))
            cuts = sorted(cuts)
            prim = npoly.polyint(trimmed)
            vals = npoly.polyval(np.array(cuts), prim)
            total.extend(np.abs(np.diff(vals)))
        return math.fsum(total)

    def integrate_against(self, g, nodes: int = 24):
        """``int g(t) p(t) dt`` by Gauss-Legendre on each piece (exact for polynomial ``g``
        of degree ``<= 2 nodes - 1 - deg p``)."""
        if self.num_pieces == 0:
            return 0.0
        x, w = gauss_legendre01(nodes)
        h = np.diff(self.breakpoints)
        t = self.breakpoints[:-1, None] + h[:, None] * x[None, :]
        u = h[:, None] * x[None, :]
        p = np.zeros(u.shape, dtype=self.coeffs.dtype)
        for k in range(self.degree, -1, -1):
            p = p * u + self.coeffs[:, k:k + 1]
        vals = np.asarray(g(t)) * p * (h[:, None] * w[None, :])
        flat = vals.ravel()
        if np.iscomplexobj(flat):
            return complex(math.fsum(flat.real), math.fsum(flat.imag))
        return math.fsum(flat)

    def sample(self, grid) -> np.ndarray:
        return self(np.asarray(grid, dtype=float))

    def trimmed(self, tol: float = 0.0) -> "PiecewisePolynomial":
        """Drop leading and trailing pieces whose coefficients are all within ``tol`` of zero."""
        if self.num_pieces == 0:
            return self
        keep = np.flatnonzero(np.max(np.abs(self.coeffs), axis=1) > tol)
        if len(keep) == 0:
            return PiecewisePolynomial.zero(self.side)
        lo, hi = keep[0], keep[-1]
        return PiecewisePolynomial(self.breakpoints[lo: hi + 2], self.coeffs[lo: hi + 1], self.side)

    # -- serialisation ----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "breakpoints": [float(x) for x in self.breakpoints],
            "coefficients": [[float(v) for v in np.real(row)] for row in self.coeffs],
            "basis": "local-monomial-increasing",
            "side": self.side,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewisePolynomial":
        b = np.asarray(d["breakpoints"], dtype=float)
        c = np.asarray(d["coefficients"], dtype=float)
        if len(b) == 0:
            return cls.zero(d.get("side", "right"))
        return cls(b, c.reshape(len(b) - 1, -1), d.get("side", "right"))
