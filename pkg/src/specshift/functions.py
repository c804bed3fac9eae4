"""Scalar test functions with exact derivatives of every order.

Four families are supported.  W_n membership (integrable Fourier transform of the
n-th derivative) holds for the gaussian, the complex exponential (as a measure)
and the resolvent powers; polynomials are only used on compact spectra, where
they coincide with a W_n function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import hermite_e, polynomial as npoly
from scipy.optimize import minimize_scalar
from scipy.special import roots_genlaguerre

DEFAULT_MAX_ORDER = 16


class DerivativeOrderError(ValueError):
    pass


class UnsupportedFourierError(NotImplementedError):
    pass


class SmoothTestFunction:
    """Base class; subclasses implement :meth:`derivative` for arrays of points."""

    family: str = ""
    max_order: int = DEFAULT_MAX_ORDER
    is_real: bool = True

    def __call__(self, t):
        return self.derivative(0, t)

    def derivative(self, k: int, t):
        raise NotImplementedError

    def _check_order(self, k: int):
        if k < 0 or k > self.max_order:
            raise DerivativeOrderError(f"{self.family}: derivative order {k} outside 0..{self.max_order}")

    def sup_norm(self, k: int, interval: tuple[float, float] | None = None) -> float:
        """``sup |f^(k)|`` over ``interval`` (whole line when ``None`` and finite)."""
        if interval is None:
            raise ValueError(f"{self.family}: need an interval for the sup norm")
        return _sampled_sup(lambda t: np.abs(self.derivative(k, t)), *interval)

    def fourier_nodes(self, k: int, count: int | None = None, window: float = 8.0):
        """Nodes ``s_i`` and weights ``w_i`` with ``f^(k)(t) ~ sum_i w_i exp(i s_i t)``."""
        raise UnsupportedFourierError(f"no Fourier representation for family {self.family!r}")

    def to_dict(self) -> dict:
        raise NotImplementedError


def _sampled_sup(g, a: float, b: float, samples: int = 2001) -> float:
    if b <= a:
        return float(g(np.array([a]))[0])
    ts = np.linspace(a, b, samples)
    vals = g(ts)
    i = int(np.argmax(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, samples - 1)]
    best = float(vals[i])
    if hi > lo:
        res = minimize_scalar(lambda t: -float(g(np.array([t]))[0]), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


@dataclass(frozen=True, eq=True)
class Gaussian(SmoothTestFunction):
    """``amplitude * exp(-(t - center)^2 / (2 width^2))``."""

    center: float = 0.0
    width: float = 1.0
    amplitude: float = 1.0
    max_order: int = DEFAULT_MAX_ORDER
    family = "gaussian"

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("gaussian width must be positive")

    def derivative(self, k: int, t):
        self._check_order(k)
        x = (np.asarray(t, dtype=float) - self.center) / self.width
        coef = np.zeros(k + 1)
        coef[k] = 1.0
        return self.amplitude * (-1) ** k * hermite_e.hermeval(x, coef) * np.exp(-0.5 * x * x) / self.width**k

    def sup_norm(self, k: int, interval=None) -> float:
        if interval is None:
            r = math.sqrt(4 * k + 2) + 1.0
            interval = (self.center - r * self.width, self.center + r * self.width)
        return super().sup_norm(k, interval)

    def fourier_nodes(self, k: int, count: int = 201, window: float = 8.0):
        # f(t) = int g(s) e^{ist} ds, g(s) = A sigma / sqrt(2 pi) exp(-sigma^2 s^2 / 2 - i s a)
        half = window / self.width
        s = np.linspace(-half, half, count)
        ds = s[1] - s[0]
        g = self.amplitude * self.width / math.sqrt(2 * math.pi) * np.exp(-0.5 * (self.width * s) ** 2 - 1j * s * self.center)
        w = ds * (1j * s) ** k * g
        w[0] *= 0.5
        w[-1] *= 0.5
        return s, w

    def to_dict(self) -> dict:
        d = {"family": self.family, "center": self.center, "width": self.width}
        if self.amplitude != 1.0:
            d["amplitude"] = self.amplitude
        return d


@dataclass(frozen=True, eq=True)
class Polynomial(SmoothTestFunction):
    """``sum_j coeffs[j] t^j``; derivatives of any order are exact."""

    coeffs: tuple = (0.0,)
    max_order: int = 10**6
    family = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def degree(self) -> int:
        nz = [j for j, c in enumerate(self.coeffs) if c != 0.0]
        return nz[-1] if nz else 0

    def derivative(self, k: int, t):
        self._check_order(k)
        c = npoly.polyder(np.array(self.coeffs), k) if k else np.array(self.coeffs)
        return npoly.polyval(np.asarray(t, dtype=float), c)

    def derivative_exact(self, k: int, x: Fraction) -> Fraction:
        """Exact rational value of ``f^(k)(x)``."""
        total = Fraction(0)
        for j in range(len(self.coeffs) - 1, k - 1, -1):
            total = total * x + Fraction(self.coeffs[j]) * math.perm(j, k)
        return total

    def to_dict(self) -> dict:
        return {"family": self.family, "coeffs": list(self.coeffs)}


@dataclass(frozen=True, eq=True)
class ComplexExponential(SmoothTestFunction):
    """``exp(i * frequency * t)``."""

    frequency: float = 1.0
    max_order: int = DEFAULT_MAX_ORDER
    family = "complexExponential"
    is_real = False

    def derivative(self, k: int, t):
        self._check_order(k)
        return (1j * self.frequency) ** k * np.exp(1j * self.frequency * np.asarray(t, dtype=float))

    def sup_norm(self, k: int, interval=None) -> float:
        return abs(self.frequency) ** k

    def fourier_nodes(self, k: int, count: int = 1, window: float = 8.0):
        return np.array([self.frequency]), np.array([(1j * self.frequency) ** k])

    def to_dict(self) -> dict:
        return {"family": self.family, "frequency": self.frequency}


@dataclass(frozen=True, eq=True)
class Exponential(SmoothTestFunction):
    """``exp(rate * t)``; not bounded, so sup norms need an interval."""

    rate: float = 1.0
    max_order: int = DEFAULT_MAX_ORDER
    family = "exponential"

    def derivative(self, k: int, t):
        self._check_order(k)
        return self.rate**k * np.exp(self.rate * np.asarray(t, dtype=float))

    def to_dict(self) -> dict:
        return {"family": self.family, "rate": self.rate}


@dataclass(frozen=True, eq=True)
class ResolventPower(SmoothTestFunction):
    """``(t - pole)^(-power)`` with a non-real pole."""

    pole: complex = 1j
    power: int = 1
    max_order: int = DEFAULT_MAX_ORDER
    family = "resolventPower"
    is_real = False

    def __post_init__(self):
        object.__setattr__(self, "pole", complex(self.pole))
        if self.pole.imag == 0:
            raise ValueError("resolvent pole must have non-zero imaginary part")
        if self.power < 1:
            raise ValueError("resolvent power must be >= 1")

    def derivative(self, k: int, t):
        self._check_order(k)
        rising = math.prod(range(self.power, self.power + k))
        return (-1) ** k * rising * (np.asarray(t, dtype=float) - self.pole) ** (-(self.power + k))

    def sup_norm(self, k: int, interval=None) -> float:
        rising = math.prod(range(self.power, self.power + k))
        return rising * abs(self.pole.imag) ** (-(self.power + k))

    def fourier_nodes(self, k: int, count: int = 64, window: float = 8.0):
        # 1/(t-z) = -i int_0^inf e^{is(t-z)} ds for Im z < 0 and i int_{-inf}^0 ... for Im z > 0;
        # differentiating in z and t gives g(s) = c (-is)^(p-1)/(p-1)! (is)^k e^{-isz}.
        beta = abs(self.pole.imag)
        order = self.power - 1 + k
        u, w = roots_genlaguerre(count, order)
        sign = 1.0 if self.pole.imag < 0 else -1.0
        s = sign * u / beta
        c = -1j if self.pole.imag < 0 else 1j
        # |s|^order e^{-beta |s|} is absorbed by the generalised Laguerre weight
        phase = (-1j * sign) ** (self.power - 1) * (1j * sign) ** k
        weights = c * phase / math.factorial(self.power - 1) * w / beta ** (order + 1) * np.exp(-1j * s * self.pole.real)
        return s, weights

    def to_dict(self) -> dict:
        return {"family": self.family, "pole": {"re": self.pole.real, "im": self.pole.imag}, "power": self.power}


def from_dict(d: dict) -> SmoothTestFunction:
    family = d.get("family")
    extra = {"max_order": int(d["maxDerivativeOrder"])} if "maxDerivativeOrder" in d else {}
    if family == "gaussian":
        return Gaussian(float(d.get("center", 0.0)), float(d.get("width", 1.0)), float(d.get("amplitude", 1.0)), **extra)
    if family == "polynomial":
        return Polynomial(tuple(d["coeffs"]), **extra)
    if family == "complexExponential":
        return ComplexExponential(float(d["frequency"]), **extra)
    if family == "exponential":
        return Exponential(float(d.get("rate", 1.0)), **extra)
    if family == "resolventPower":
        pole = d["pole"]
        z = complex(pole["re"], pole.get("im", 0.0)) if isinstance(pole, dict) else complex(pole)
        return ResolventPower(z, int(d.get("power", 1)), **extra)
    raise ValueError(f"unknown function family {family!r}")
