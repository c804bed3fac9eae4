"""Higher-order spectral shift functions and multiple operator integrals for Hermitian matrices."""
from __future__ import annotations

__version__ = "0.1.0"

from .functions import ComplexExponential, Exponential, Gaussian, Polynomial, ResolventPower, SmoothTestFunction
from .kernels import divided_difference, hermite_genocchi, peano_kernel
from .moi import MoiSymbol, moi_discretized, moi_exact, moi_fourier, moi_projection_sum
from .spectral import HermitianOperator, SpectralDecomposition, decompose, schatten_norm
from .ssf import SpectralShiftFunction, SplineMeasure, eta_n, krein_eta1, mu_measure, verify_trace_formula
from .taylor import PerturbationLine, derivative_order_k, remainder_direct, remainder_integral

__all__ = [
    "ComplexExponential", "Exponential", "Gaussian", "Polynomial", "ResolventPower", "SmoothTestFunction",
    "divided_difference", "hermite_genocchi", "peano_kernel",
    "MoiSymbol", "moi_discretized", "moi_exact", "moi_fourier", "moi_projection_sum",
    "HermitianOperator", "SpectralDecomposition", "decompose", "schatten_norm",
    "SpectralShiftFunction", "SplineMeasure", "eta_n", "krein_eta1", "mu_measure", "verify_trace_formula",
    "PerturbationLine", "derivative_order_k", "remainder_direct", "remainder_integral",
]
