"""Higher-order spectral shift functions of a Hermitian pair ``(H, V)``.

``eta_1 = N_H - N_{H+V}``.  For ``n >= 2``

    eta_n(t) = mu_{n-1}((-inf, t]) - int_{-inf}^t eta_{n-1},

where ``mu_k`` is the measure with ``int f^(k) dmu_k = tau(T_{f^[k]}(V, ..., V))``.
In a finite dimension ``mu_k`` is a sum of point masses and B-spline densities with
knots at eigenvalues of ``H``, so every ``eta_n`` is an exact piecewise
polynomial of degree ``n - 1``.

All ``eta_n`` are stored right-continuous, matching the counting-function
convention of ``eta_1``; the left limits are the values produced by open
cumulatives ``mu((-inf, t))`` and differ only at finitely many points.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .functions import SmoothTestFunction
from .kernels import peano_kernel
from .piecewise import PiecewisePolynomial
from .spectral import HermitianOperator, SpectralDecomposition, decompose, schatten_norm
from .taylor import PerturbationLine, remainder_direct, sup_norm_on_line


class MassCancellationError(RuntimeError):
    """The cumulative defining ``eta_n`` does not return to zero (an assembly bug)."""


MASS_TOL = 1e-8


@dataclass(frozen=True)
class SplineMeasure:
    """Finite real measure: point masses plus a piecewise-polynomial density."""

    atoms: tuple  # ((location, weight), ...) sorted by location
    density: PiecewisePolynomial
    order: int
    source: str = "mu"
    imag_residue: float = 0.0

    @property
    def total_mass(self) -> float:
        return math.fsum([w for _, w in self.atoms] + [self.density.integral()])

    @property
    def variation_bound(self) -> float:
        return math.fsum([abs(w) for _, w in self.atoms] + [self.density.l1_norm()])

    def integrate(self, g, nodes: int = 24) -> complex | float:
        """``int g dmu``."""
        parts = [w * complex(np.asarray(g(np.array([x])))[0]) for x, w in self.atoms]
        parts.append(complex(self.density.integrate_against(g, nodes)))
        total = complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))
        return total.real if total.imag == 0 else total

    def cumulative_on(self, grid: np.ndarray) -> np.ndarray:
        """Coefficients of ``mu((-inf, t])`` on the pieces of ``grid`` (right-continuous)."""
        out = _antiderivative_on(self.density, grid)
        for x, w in self.atoms:
            out[grid[:-1] >= x, 0] += w
        return out

    def to_dict(self) -> dict:
        return {"order": self.order, "source": self.source,
                "atoms": [[float(x), float(w)] for x, w in self.atoms],
                "density": self.density.to_dict(), "totalMass": self.total_mass}


def _antiderivative_on(pp: PiecewisePolynomial, grid: np.ndarray) -> np.ndarray:
    """Coefficients (local powers) of ``int_{-inf}^t pp`` on every piece of ``grid``.

    ``grid`` must contain the breakpoints of ``pp``.
    """
    deg = pp.degree + 1
    out = np.zeros((len(grid) - 1, deg + 1))
    if pp.num_pieces == 0:
        return out
    prim, tail = pp.antiderivative()
    refined = prim.refine(grid)
    coeffs = refined._with_degree(deg)
    # refine() only covers [b_0, b_K]; the primitive is the constant tail to the right
    lo = int(np.searchsorted(refined.breakpoints, grid[0]))
    for j in range(len(grid) - 1):
        a = grid[j]
        if a >= pp.breakpoints[-1]:
            out[j, 0] = tail
        elif a >= pp.breakpoints[0]:
            i = int(np.searchsorted(refined.breakpoints, a)) - lo
            out[j] = np.real(coeffs[i + lo])
    return out


@dataclass(frozen=True)
class SpectralShiftFunction:
    """``eta_n`` as a right-continuous piecewise polynomial with its jumps."""

    order: int
    eta: PiecewisePolynomial
    jumps: tuple = ()
    meta: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.eta(t)

    def left_limit(self, t) -> np.ndarray:
        return self.eta.with_side("left")(t)

    @property
    def support(self) -> tuple[float, float] | None:
        return self.eta.support

    def integral(self) -> float:
        return float(np.real(self.eta.integral()))

    def l1_norm(self) -> float:
        return self.eta.l1_norm()

    def integrate_against(self, g, nodes: int = 24):
        return self.eta.integrate_against(g, nodes)

    def to_dict(self) -> dict:
        d = self.eta.to_dict()
        d.update({"order": self.order, "jumps": [[float(x), float(np.real(j))] for x, j in self.jumps]})
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralShiftFunction":
        pp = PiecewisePolynomial.from_dict(d)
        return cls(int(d["order"]), pp, tuple((float(x), float(j)) for x, j in d.get("jumps", [])))


def _as_operators(H, V) -> tuple[HermitianOperator, HermitianOperator]:
    H = H if isinstance(H, HermitianOperator) else HermitianOperator(H)
    V = V if isinstance(V, HermitianOperator) else HermitianOperator(V)
    if H.dim != V.dim:
        raise ValueError(f"H has dimension {H.dim}, V has {V.dim}")
    return H, V


def _make_ssf(order: int, eta: PiecewisePolynomial, **meta) -> SpectralShiftFunction:
    eta = eta.trimmed()
    return SpectralShiftFunction(order, eta, tuple(eta.jumps()), meta)


def krein_eta1(H, V, cluster_tol: float | None = None) -> SpectralShiftFunction:
    """``N_H - N_{H+V}`` with ``N_A(t) = #{eigenvalues <= t}``."""
    H, V = _as_operators(H, V)
    D0 = decompose(H, cluster_tol)
    D1 = decompose(H + V, cluster_tol)
    pts = np.union1d(D0.values, D1.values)
    if len(pts) < 2:
        return _make_ssf(1, PiecewisePolynomial.zero())
    vals = [D0.ranks[D0.values <= a].sum() - D1.ranks[D1.values <= a].sum() for a in pts[:-1]]
    return _make_ssf(1, PiecewisePolynomial(pts, np.array(vals, dtype=float)[:, None]))


def cyclic_weights(D: SpectralDecomposition, V, k: int) -> dict[tuple, complex]:
    """Weights ``Tr(E_{i_0} V E_{i_1} V ... E_{i_{k-1}} V)`` summed per knot multiset.

    The knots of the tuple ``(i_0, ..., i_{k-1})`` are ``(i_0, ..., i_{k-1}, i_0)``;
    keys are the sorted knot index tuples.  Tuples are visited in lexicographic
    order and each group is accumulated with ``fsum``.
    """
    W = D.to_eigenbasis(V)
    rows = [np.where((D.labels == l)[:, None], W, 0.0) for l in range(D.size)]
    re: dict[tuple, list] = {}
    im: dict[tuple, list] = {}
    for idx in itertools.product(range(D.size), repeat=k):
        prod = rows[idx[0]]
        for l in idx[1:]:
            prod = prod @ rows[l]
        w = np.trace(prod)
        key = tuple(sorted(idx + (idx[0],)))
        re.setdefault(key, []).append(w.real)
        im.setdefault(key, []).append(w.imag)
    return {key: complex(math.fsum(re[key]), math.fsum(im[key])) for key in re}


def mu_measure(H, V, k: int, cluster_tol: float | None = None) -> SplineMeasure:
    """``mu_k`` with ``int f^(k) dmu_k = tau(T_{f^[k]}(V, ..., V))``.

    Fully confluent knot sets give point masses ``w / k!`` (since
    ``f^[k](l, ..., l) = f^(k)(l) / k!``); all others give ``w`` times the
    B-spline kernel on the knots.  The measure is real; the imaginary parts
    that cancel in each group are kept as ``imag_residue`` relative to the
    largest weight.
    """
    if k < 1:
        raise ValueError("mu_k needs k >= 1")
    H, V = _as_operators(H, V)
    D = decompose(H, cluster_tol)
    weights = cyclic_weights(D, V.matrix, k)
    scale = max([1.0] + [abs(w) for w in weights.values()])
    residue = max([0.0] + [abs(w.imag) for w in weights.values()]) / scale
    atoms = []
    density = PiecewisePolynomial.zero()
    for knots, w in weights.items():
        if w.real == 0.0:
            continue
        if knots[0] == knots[-1]:
            atoms.append((float(D.values[knots[0]]), w.real / math.factorial(k)))
        else:
            density = density + w.real * peano_kernel([D.values[i] for i in knots], k, cluster_tol=0.0)
    return SplineMeasure(tuple(sorted(atoms)), density, k, "mu", residue)


def eta_n(H, V, n: int, cluster_tol: float | None = None, mass_tol: float = MASS_TOL,
          _previous: SpectralShiftFunction | None = None) -> SpectralShiftFunction:
    """``eta_n`` by the recursion from ``eta_1``.

    Raises :class:`MassCancellationError` when ``mu_{n-1}(R)`` and ``int eta_{n-1}``
    differ by more than ``mass_tol`` times the scale of the pieces involved.
    """
    if n < 1:
        raise ValueError("order must be >= 1")
    H, V = _as_operators(H, V)
    if n == 1:
        return krein_eta1(H, V, cluster_tol)
    prev = _previous if _previous is not None else eta_n(H, V, n - 1, cluster_tol, mass_tol)
    if prev.order != n - 1:
        raise ValueError("previous function has the wrong order")
    mu = mu_measure(H, V, n - 1, cluster_tol)
    pts = [x for x, _ in mu.atoms]
    grid = np.union1d(np.union1d(pts, mu.density.breakpoints), prev.eta.breakpoints)
    if len(grid) < 2:
        return _make_ssf(n, PiecewisePolynomial.zero())
    coeffs = mu.cumulative_on(grid)
    prim = _antiderivative_on(prev.eta, grid)
    deg = max(coeffs.shape[1], prim.shape[1])
    coeffs = np.pad(coeffs, ((0, 0), (0, deg - coeffs.shape[1]))) - np.pad(prim, ((0, 0), (0, deg - prim.shape[1])))
    tail = mu.total_mass - prev.integral()
    scale = 1.0 + mu.variation_bound + prev.l1_norm()
    if abs(tail) > mass_tol * scale:
        raise MassCancellationError(f"order {n}: mu mass and eta integral differ by {tail:.3e} (scale {scale:.3e})")
    eta = PiecewisePolynomial(grid, coeffs)
    return _make_ssf(n, eta, massDefect=float(tail), imagResidue=mu.imag_residue)


def eta_sequence(H, V, n: int, cluster_tol: float | None = None) -> list[SpectralShiftFunction]:
    """``[eta_1, ..., eta_n]`` sharing the recursion."""
    out = [krein_eta1(H, V, cluster_tol)]
    for k in range(2, n + 1):
        out.append(eta_n(H, V, k, cluster_tol, _previous=out[-1]))
    return out


@dataclass(frozen=True)
class TraceCheck:
    lhs: complex
    rhs: complex
    residual: float


def verify_trace_formula(H, V, n: int, f: SmoothTestFunction, eta: SpectralShiftFunction | None = None,
                         nodes: int = 24, max_piece: float = 0.25) -> TraceCheck:
    """``tau(Delta_{n,f}(H, V))`` against ``int f^(n) eta_n``.

    The right side uses Gauss-Legendre on every piece of ``eta_n`` after
    splitting pieces longer than ``max_piece``; it is exact for polynomial ``f``.
    """
    H, V = _as_operators(H, V)
    eta = eta_n(H, V, n) if eta is None else eta
    lhs = complex(np.trace(remainder_direct(PerturbationLine(H, V), f, n)))
    pp = eta.eta
    if pp.num_pieces:
        b = pp.breakpoints
        extra = [np.linspace(a, c, int(math.ceil((c - a) / max_piece)) + 1)[1:-1] for a, c in zip(b[:-1], b[1:])]
        pp = pp.refine(np.concatenate([b] + extra))
    rhs = complex(pp.integrate_against(lambda t: f.derivative(n, t), nodes))
    return TraceCheck(lhs, rhs, abs(lhs - rhs))


def moment_target(V, n: int) -> float:
    """``Tr(V^n) / n!``."""
    V = V.matrix if isinstance(V, HermitianOperator) else np.asarray(V)
    return float(np.real(np.trace(np.linalg.matrix_power(V, n)))) / math.factorial(n)


@dataclass(frozen=True)
class NormReport:
    order: int
    l1: float
    schatten: float
    ratio: float | None
    scalings: tuple = ()  # ((s, l1, ratio), ...)


def l1_norm_and_ratios(H, V, n: int, scalings: Sequence[float] = ()) -> NormReport:
    """Exact ``||eta_n||_1`` and ``||eta_n||_1 / ||V||_n^n``, optionally for ``sV``."""
    H, V = _as_operators(H, V)

    def one(Vs):
        l1 = eta_n(H, Vs, n).l1_norm()
        vn = schatten_norm(Vs.matrix, n) ** n
        return l1, vn, (l1 / vn if vn > 0 else None)

    l1, vn, ratio = one(V)
    rows = tuple((float(s),) + one(V.scaled(s))[::2] for s in scalings)
    return NormReport(n, l1, vn, ratio, rows)


def remainder_ratio(H, V, n: int, f: SmoothTestFunction) -> float | None:
    """``|tau(Delta_{n,f}(H, V))| / (||f^(n)||_inf ||V||_n^n)``."""
    H, V = _as_operators(H, V)
    vn = schatten_norm(V.matrix, n) ** n
    if vn == 0:
        return None
    line = PerturbationLine(H, V)
    return float(abs(np.trace(remainder_direct(line, f, n))) / (sup_norm_on_line(line, f, n) * vn))


@dataclass(frozen=True)
class ContinuityReport:
    order: int
    eta_distances: tuple  # ||eta(V_k) - eta(limit)||_1
    v_distances: tuple  # ||V_k - limit||_n
    consecutive: tuple  # ||eta(V_k) - eta(V_{k+1})||_1


def continuity_in_v(H, Vseq: Sequence, n: int, limit=None) -> ContinuityReport:
    """L1 distances of ``eta_n`` along ``Vseq`` against Schatten-``n`` distances of the ``V``'s.

    Distances are measured to ``limit`` (the last element of ``Vseq`` when not given).
    """
    H = H if isinstance(H, HermitianOperator) else HermitianOperator(H)
    Vs = [v if isinstance(v, HermitianOperator) else HermitianOperator(v) for v in Vseq]
    if not Vs:
        raise ValueError("empty sequence")
    lim = Vs[-1] if limit is None else (limit if isinstance(limit, HermitianOperator) else HermitianOperator(limit))
    for v in Vs + [lim]:
        if v.dim != H.dim:
            raise ValueError(f"dimension mismatch: {v.dim} != {H.dim}")
    etas = [eta_n(H, v, n).eta for v in Vs]
    eta_lim = eta_n(H, lim, n).eta
    to_lim = tuple((e - eta_lim).l1_norm() for e in etas)
    vd = tuple(schatten_norm(v.matrix - lim.matrix, n) for v in Vs)
    cons = tuple((a - b).l1_norm() for a, b in zip(etas, etas[1:]))
    return ContinuityReport(n, to_lim, vd, cons)
