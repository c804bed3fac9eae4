"""Order-fixed compensated summation.

All tuple sums in the package go through :func:`compensated_sum` so that the
result depends only on the data and the index order, never on thread count.
"""
from __future__ import annotations

import numpy as np


def compensated_sum(terms: np.ndarray, axis: int = 0) -> np.ndarray:
    """Neumaier-compensated sum of ``terms`` along ``axis`` in index order.

    Vectorised over the remaining axes; works for real and complex arrays
    (real and imaginary parts are compensated independently since complex
    addition is componentwise).
    """
    terms = np.moveaxis(np.asarray(terms), axis, 0)
    if terms.shape[0] == 0:
        return np.zeros(terms.shape[1:], dtype=terms.dtype)
    total = terms[0].copy()
    comp = np.zeros_like(total)
    for term in terms[1:]:
        t = total + term
        if np.iscomplexobj(t):
            comp += _neumaier_correction(total.real, term.real, t.real)
            comp += 1j * _neumaier_correction(total.imag, term.imag, t.imag)
        else:
            comp += _neumaier_correction(total, term, t)
        total = t
    return total + comp


def _neumaier_correction(total, term, t):
    big = np.abs(total) >= np.abs(term)
    return np.where(big, (total - t) + term, (term - t) + total)


def tree_sum(parts: list) -> object:
    """Sum partial results pairwise in a fixed binary-tree order."""
    if not parts:
        raise ValueError("nothing to sum")
    parts = list(parts)
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]
