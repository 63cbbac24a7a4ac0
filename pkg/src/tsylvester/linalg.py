"""Dense real linear-algebra kernels shared across the package.

Matrices are plain ``float64`` numpy arrays in the default C layout.
``vec`` uses the column-stacking convention throughout the package: entry
``(i, j)`` of an ``n x n`` matrix lands at position ``i + j*n`` of the
vector, and ``unvec`` inverts that.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg as sla

__all__ = [
    "EPS",
    "DegenerateDirectionsError",
    "LuFactor",
    "MatrixNorms",
    "PermutationOperator",
    "SingularOperatorError",
    "SingularityReport",
    "comp_quotient",
    "gauss_matrix",
    "kron",
    "lu_solve",
    "mgs_orthonormalize",
    "norms",
    "qr",
    "random_orthogonal",
    "rng_stream",
    "sigma_min",
    "spawn_streams",
    "uniform_pm1_matrix",
    "unvec",
    "vec",
    "vec_transpose_perm",
]

EPS = float(np.finfo(np.float64).eps)


class SingularOperatorError(np.linalg.LinAlgError):
    """An LU pivot fell below the singularity threshold."""

    def __init__(self, pivot_index, pivot, threshold):
        self.pivot_index = int(pivot_index)
        self.pivot = float(pivot)
        self.threshold = float(threshold)
        super().__init__(
            f"singular operator: pivot {self.pivot_index} has magnitude "
            f"{self.pivot:.3e}, below threshold {self.threshold:.3e}"
        )


class DegenerateDirectionsError(np.linalg.LinAlgError):
    """Gram-Schmidt input columns are numerically dependent."""


def vec(m: np.ndarray) -> np.ndarray:
    """Stack the columns of ``m`` into a single vector."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    return m.reshape(-1, order="F")


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`vec` for square matrices: ``unvec(vec(M), n) == M``."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size != n * n:
        raise ValueError(f"cannot reshape length-{v.size} vector into {n}x{n}")
    return v.reshape((n, n), order="F")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


@dataclass(frozen=True)
class PermutationOperator:
    """Vec-transpose permutation on length ``n**2`` vectors.

    ``apply(vec(M)) == vec(M.T)`` for every ``n x n`` matrix ``M``.  The
    operator is symmetric, orthogonal and involutory.  ``indices`` holds the
    index map, so a dense matrix picks up the permutation as a right factor
    via ``M[:, op.indices]`` and as a left factor via ``M[op.indices, :]``.
    """

    n: int
    indices: np.ndarray

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float).ravel()
        if v.size != self.n * self.n:
            raise ValueError(f"expected length {self.n**2}, got {v.size}")
        return v[self.indices]

    def dense(self) -> np.ndarray:
        return np.eye(self.n * self.n)[self.indices]


def vec_transpose_perm(n: int) -> PermutationOperator:
    """Permutation mapping ``vec(M)`` to ``vec(M.T)`` for ``n x n`` matrices."""
    if n < 1:
        raise ValueError("n must be at least 1")
    k = np.arange(n * n)
    return PermutationOperator(n=n, indices=(k % n) * n + k // n)


class MatrixNorms(NamedTuple):
    fro: float
    max: float
    inf: float


def norms(m: np.ndarray) -> MatrixNorms:
    """Frobenius norm, largest absolute entry, and infinity norm.

    The infinity norm is the maximum absolute entry for vectors and the
    maximum absolute row sum for matrices.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim not in (1, 2):
        raise ValueError(f"expected a vector or matrix, got ndim={m.ndim}")
    return MatrixNorms(
        fro=float(np.linalg.norm(m)),
        max=float(np.max(np.abs(m))) if m.size else 0.0,
        inf=float(np.linalg.norm(m, np.inf)) if m.size else 0.0,
    )


def comp_quotient(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Entrywise quotient with the zero-denominator convention.

    Where both entries are zero the ratio is defined as zero; where the
    denominator alone is zero the entry is flagged infinite (``+-inf``,
    detectable with ``np.isinf``).  Never raises on 0/0.
    """
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    if num.shape != den.shape:
        raise ValueError(f"shape mismatch: {num.shape} vs {den.shape}")
    out = np.zeros_like(num)
    nz = den != 0
    np.divide(num, den, out=out, where=nz)
    flagged = ~nz & (num != 0)
    out[flagged] = np.sign(num[flagged]) * np.inf
    return out


@dataclass(frozen=True)
class SingularityReport:
    is_singular: bool
    min_pivot: float
    pivot_index: int
    threshold: float


class LuFactor:
    """LU factorization with partial pivoting, reusable across right-hand sides.

    Construction never fails on singular input; the smallest pivot is
    compared against ``n * eps * max|M|`` and recorded in ``singularity``.
    ``solve`` raises :class:`SingularOperatorError` if the factorization is
    flagged singular.
    """

    def __init__(self, m: np.ndarray):
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        self.n = m.shape[0]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            self._lu, self._piv = sla.lu_factor(m)
        pivots = np.abs(np.diag(self._lu))
        i = int(np.argmin(pivots))
        threshold = self.n * EPS * float(np.max(np.abs(m)))
        self.singularity = SingularityReport(
            is_singular=bool(pivots[i] <= threshold),
            min_pivot=float(pivots[i]),
            pivot_index=i,
            threshold=threshold,
        )

    @property
    def is_singular(self) -> bool:
        return self.singularity.is_singular

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.is_singular:
            s = self.singularity
            raise SingularOperatorError(s.pivot_index, s.min_pivot, s.threshold)
        return sla.lu_solve((self._lu, self._piv), np.asarray(rhs, dtype=float))


def lu_solve(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``m @ x = rhs`` by LU with partial pivoting (one-shot helper)."""
    return LuFactor(m).solve(rhs)


def qr(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder QR of a tall (rows >= cols) matrix, economy shape."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] < m.shape[1]:
        raise ValueError(f"expected rows >= cols, got shape {m.shape}")
    q, r = sla.qr(m, mode="economic")
    return q, r


def mgs_orthonormalize(columns) -> np.ndarray:
    """Modified Gram-Schmidt orthonormalization of a set of vectors.

    Accepts a 2-d array whose columns are the vectors, or a sequence of 1-d
    vectors.  One re-orthogonalization pass is run for a column whose
    orthogonality defect after the first pass exceeds ``sqrt(eps)``.  A
    column whose norm collapses below ``100 * p * eps`` of its original norm
    is numerically dependent and raises :class:`DegenerateDirectionsError`
    (callers with random input regenerate their samples).
    """
    if isinstance(columns, np.ndarray) and columns.ndim == 2:
        q = columns.astype(float, copy=True)
    else:
        q = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    p, k = q.shape
    if k > p:
        raise ValueError(f"more columns ({k}) than dimensions ({p})")
    for j in range(k):
        norm0 = float(np.linalg.norm(q[:, j]))
        for _ in range(2):
            for i in range(j):
                q[:, j] -= (q[:, i] @ q[:, j]) * q[:, i]
            nrm = float(np.linalg.norm(q[:, j]))
            if j == 0 or nrm == 0.0:
                break
            defect = float(np.max(np.abs(q[:, :j].T @ q[:, j]))) / nrm
            if defect <= np.sqrt(EPS):
                break
        nrm = float(np.linalg.norm(q[:, j]))
        if norm0 == 0.0 or nrm <= 100 * p * EPS * norm0:
            raise DegenerateDirectionsError(
                f"column {j} is numerically dependent on the preceding ones"
            )
        q[:, j] /= nrm
    return q


def sigma_min(m: np.ndarray) -> float:
    """Smallest singular value of a square matrix (0 when singular)."""
    return float(sla.svdvals(np.asarray(m, dtype=float))[-1])


# ---------------------------------------------------------------------------
# Seeded random generation.  A stream is a numpy Generator: identical seeds
# give bitwise-identical sequences; concurrent consumers must use separate
# streams (see spawn_streams).
# ---------------------------------------------------------------------------

RngStream = np.random.Generator


def rng_stream(seed: int) -> np.random.Generator:
    """Reproducible random stream for a 64-bit seed."""
    return np.random.default_rng(seed)


def spawn_streams(seed: int, count: int) -> list[np.random.Generator]:
    """Independent child streams for parallel trials, derived from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def gauss_matrix(n: int, stream: np.random.Generator) -> np.ndarray:
    """``n x n`` matrix with independent standard normal entries."""
    return stream.standard_normal((n, n))


def uniform_pm1_matrix(n: int, stream: np.random.Generator) -> np.ndarray:
    """``n x n`` matrix with independent entries uniform on (-1, 1)."""
    return stream.uniform(-1.0, 1.0, (n, n))


def random_orthogonal(n: int, stream: np.random.Generator) -> np.ndarray:
    """Random orthogonal matrix from the QR factor of a Gaussian matrix.

    Signs are fixed so the triangular factor has a nonnegative diagonal,
    which makes the draw Haar-distributed.
    """
    q, r = sla.qr(stream.standard_normal((n, n)), mode="economic")
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d
