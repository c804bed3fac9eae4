"""Hermitian matrices, clustered spectral decompositions and Schatten norms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class NonHermitianError(ValueError):
    """Raised when a matrix fails the Hermitian check; carries the offending entry."""

    def __init__(self, i: int, j: int, defect: float):
        self.i, self.j, self.defect = i, j, defect
        super().__init__(f"matrix is not Hermitian at entry ({i}, {j}): |a_ij - conj(a_ji)| = {defect:.3e}")


class EigensolverError(RuntimeError):
    pass


def _hermitian_defect(a: np.ndarray) -> tuple[int, int, float]:
    diff = np.abs(a - a.conj().T)
    i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
    if i > j:
        i, j = j, i
    return int(i), int(j), float(diff[i, j])


@dataclass(frozen=True)
class HermitianOperator:
    """A d x d complex Hermitian matrix.

    Construction checks ``a_ij == conj(a_ji)`` up to ``1e-12 * max|a|`` and then
    stores the exactly symmetrised matrix.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        i, j, defect = _hermitian_defect(a)
        if defect > 1e-12 * scale:
            raise NonHermitianError(i, j, defect)
        a = 0.5 * (a + a.conj().T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.entries

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.entries + as_matrix(other))

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        return HermitianOperator(self.entries - as_matrix(other))

    def scaled(self, s: float) -> "HermitianOperator":
        return HermitianOperator(float(s) * self.entries)

    def shifted(self, V: "HermitianOperator", t: float) -> "HermitianOperator":
        """Return ``H + t V``."""
        return HermitianOperator(self.entries + float(t) * as_matrix(V))

    @classmethod
    def diag(cls, values) -> "HermitianOperator":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def zeros(cls, dim: int) -> "HermitianOperator":
        return cls(np.zeros((dim, dim)))


def as_matrix(A) -> np.ndarray:
    if isinstance(A, HermitianOperator):
        return A.entries
    return np.asarray(A, dtype=complex)


def default_cluster_tol(values: np.ndarray) -> float:
    radius = float(np.max(np.abs(values))) if len(values) else 0.0
    return 1e-10 * (1.0 + radius)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Spectral family of a Hermitian matrix with clustered eigenvalues.

    ``values[l]`` is the representative of cluster ``l`` (ascending), ``projections[l]``
    the orthogonal projection onto its eigenspace.  ``vectors`` holds the
    orthonormal eigenbasis column-wise and ``labels[i]`` is the cluster of column ``i``.
    """

    values: np.ndarray
    ranks: np.ndarray
    projections: np.ndarray
    vectors: np.ndarray
    labels: np.ndarray
    cluster_tol: float
    raw_eigenvalues: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def size(self) -> int:
        """Number of distinct (clustered) eigenvalues."""
        return len(self.values)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Cluster representatives repeated by multiplicity, ascending."""
        return self.values[self.labels]

    def to_eigenbasis(self, x) -> np.ndarray:
        U = self.vectors
        return U.conj().T @ as_matrix(x) @ U

    def from_eigenbasis(self, y: np.ndarray) -> np.ndarray:
        U = self.vectors
        return U @ y @ U.conj().T

    def reconstruct(self) -> np.ndarray:
        return np.einsum("l,lij->ij", self.values, self.projections)


def _cluster(eigs: np.ndarray, tol: float) -> np.ndarray:
    labels = np.zeros(len(eigs), dtype=int)
    for i in range(1, len(eigs)):
        labels[i] = labels[i - 1] + (1 if eigs[i] - eigs[i - 1] > tol else 0)
    return labels


def decompose(A, cluster_tol: float | None = None) -> SpectralDecomposition:
    """Eigendecompose ``A`` and merge eigenvalues closer than ``cluster_tol``.

    Consecutive sorted eigenvalues within ``cluster_tol`` of each other are chained
    into one cluster represented by their mean.
    """
    if not isinstance(A, HermitianOperator):
        A = HermitianOperator(A)
    if cluster_tol is not None and cluster_tol < 0:
        raise ValueError("cluster_tol must be non-negative")
    try:
        eigs, U = np.linalg.eigh(A.entries)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver failed to converge: {exc}") from exc
    tol = default_cluster_tol(eigs) if cluster_tol is None else float(cluster_tol)
    labels = _cluster(eigs, tol)
    r = labels[-1] + 1
    values = np.array([eigs[labels == l].mean() for l in range(r)])
    ranks = np.bincount(labels, minlength=r)
    projections = np.zeros((r, A.dim, A.dim), dtype=complex)
    for l in range(r):
        cols = U[:, labels == l]
        projections[l] = cols @ cols.conj().T
    for arr in (values, ranks, projections, U, labels, eigs):
        arr.setflags(write=False)
    return SpectralDecomposition(values, ranks, projections, U, labels, tol, eigs)


def apply_function(D: SpectralDecomposition, f: Callable) -> np.ndarray:
    """``f(H) = sum_l f(lambda_l) E_l``; ``f`` is called on the array of cluster values."""
    fv = np.asarray(f(D.values))
    if fv.shape != D.values.shape:
        fv = np.broadcast_to(fv, D.values.shape)
    return np.einsum("l,lij->ij", fv, D.projections)


def schatten_norm(A, p: float) -> float:
    if p < 1:
        raise ValueError(f"Schatten index must be >= 1, got {p}")
    s = np.linalg.svd(as_matrix(A), compute_uv=False)
    if np.isinf(p):
        return float(s.max(initial=0.0))
    return float(np.sum(s**p) ** (1.0 / p))


def counting_function(D: SpectralDecomposition, t: float) -> int:
    """Number of eigenvalues (with multiplicity) not exceeding ``t``."""
    return int(D.ranks[D.values <= t].sum())


@dataclass(frozen=True)
class GridProjectionFamily:
    """Spectral cells ``E_{l,m} = E[l/m, (l+1)/m)``; only non-empty cells are kept."""

    m: int
    cells: dict[int, np.ndarray]
    decomposition: SpectralDecomposition

    def as_decomposition(self) -> SpectralDecomposition:
        """View the grid family as a spectral family with eigenvalue ``l/m`` on cell ``l``.

        The eigenbasis of the parent decomposition is reused, so the multiple
        operator integral routines apply unchanged.
        """
        D = self.decomposition
        keys = sorted(self.cells)
        cell_of_cluster = np.floor(self.m * D.values).astype(int)
        index = {l: i for i, l in enumerate(keys)}
        labels = np.array([index[cell_of_cluster[c]] for c in D.labels])
        values = np.array(keys, dtype=float) / self.m
        ranks = np.bincount(labels, minlength=len(keys))
        projections = np.array([self.cells[l] for l in keys])
        return SpectralDecomposition(values, ranks, projections, D.vectors, labels, 0.0, values[labels])


def grid_projections(D: SpectralDecomposition, m: int) -> GridProjectionFamily:
    if m < 1:
        raise ValueError("grid resolution m must be >= 1")
    cells: dict[int, np.ndarray] = {}
    for value, proj in zip(D.values, D.projections):
        l = int(np.floor(m * value))
        cells[l] = cells[l] + proj if l in cells else proj.copy()
    return GridProjectionFamily(m, cells, D)
