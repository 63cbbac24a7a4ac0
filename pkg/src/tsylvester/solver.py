"""Solvers for the transpose-Sylvester equation ``A X + s X^T B^T = C``.

The default production path assembles the dense ``n^2 x n^2`` operator
``P = I (x) A + s (B (x) I) Pi`` (``Pi`` the vec-transpose permutation) and
solves ``P vec(X) = vec(C)`` by LU with partial pivoting.  The factorization
is cached on a handle so directional-derivative equations against the same
coefficients reuse it.  A substitution fast path accepts caller-supplied
generalized triangular factors.

Unique solvability: with ``{(a_ii, b_ii)}`` the generalized spectrum of the
pencil ``A - lambda B``, the equation has exactly one solution iff
``a_ii * a_jj != b_ii * b_jj`` for all ``i != j`` and ``a_ii + s b_ii != 0``
for all ``i``; this is equivalent to ``P`` being invertible.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    EPS,
    LuFactor,
    SingularOperatorError,
    unvec,
    vec,
)

__all__ = [
    "NotUniquelySolvableError",
    "ProblemTriple",
    "SchurFactors",
    "SolvabilityReport",
    "SolverHandle",
    "as_sign",
    "build_handle",
    "build_operator",
    "directional_derivative",
    "solvability_check",
    "solve",
    "solve_triangular",
]


class NotUniquelySolvableError(np.linalg.LinAlgError):
    """The equation has no unique solution (singular coefficient operator)."""


def as_sign(value) -> int:
    """Normalize a sign specifier (+1/-1 or 'plus'/'minus') to +-1."""
    if value in (1, -1):
        return int(value)
    if value == "plus":
        return 1
    if value == "minus":
        return -1
    raise ValueError(f"sign must be +1, -1, 'plus' or 'minus', got {value!r}")


def _square(m, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class ProblemTriple:
    """Coefficient data of ``A X + sign * X^T B^T = C``."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    sign: int = 1

    def __post_init__(self):
        a = _square(self.a, "A")
        b = _square(self.b, "B")
        c = _square(self.c, "C")
        if not (a.shape == b.shape == c.shape):
            raise ValueError(
                f"A, B, C must share one dimension, got {a.shape}, {b.shape}, {c.shape}"
            )
        for name, m in (("A", a), ("B", b), ("C", c)):
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "sign", as_sign(self.sign))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def lhs(self, x: np.ndarray) -> np.ndarray:
        """Apply the left-hand-side operator: ``A @ x + sign * x.T @ B.T``."""
        return self.a @ x + self.sign * (x.T @ self.b.T)


def build_operator(a: np.ndarray, b: np.ndarray, sign: int = 1) -> np.ndarray:
    """Dense matrix of ``X -> vec(A X + sign * X^T B^T)`` in vec coordinates.

    Equal to ``kron(I, A) + sign * kron(B, I) @ Pi`` but assembled by direct
    index filling, which is much cheaper at the n=40 experiment scale.
    """
    a = _square(a, "A")
    b = _square(b, "B")
    sign = as_sign(sign)
    n = a.shape[0]
    idx = np.arange(n)
    p4 = np.zeros((n, n, n, n))
    # vec index r = i + j*n splits into C-order axes (j, i); entry (i, j) of
    # A X picks up A[i, k] X[k, j] and of X^T B^T picks up B[j, k] X[k, i]
    p4[idx, :, idx, :] = a
    p4[:, idx, idx, :] += sign * b[:, None, :]
    return p4.reshape(n * n, n * n)


class SolverHandle:
    """Cached factorization of the equation operator for repeated solves.

    Immutable after construction.  A singular operator is recorded, not
    fatal: it surfaces as :class:`NotUniquelySolvableError` on solve.
    """

    def __init__(self, problem: ProblemTriple):
        self.problem = problem
        self.n = problem.n
        self.operator = build_operator(problem.a, problem.b, problem.sign)
        self.lu = LuFactor(self.operator)

    @property
    def singularity(self):
        return self.lu.singularity

    @property
    def is_solvable(self) -> bool:
        return not self.lu.is_singular

    def solve_vec(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``P x = rhs`` against the cached factorization."""
        try:
            return self.lu.solve(rhs)
        except SingularOperatorError as exc:
            raise NotUniquelySolvableError(
                "the equation A X ± X^T B^T = C is not uniquely solvable: the "
                f"coefficient operator is singular ({exc}); unique solvability "
                "requires a_ii·a_jj ≠ b_ii·b_jj (i ≠ j) and a_ii ± b_ii ≠ 0 "
                "over the generalized spectrum of (A, B)"
            ) from exc


def build_handle(problem: ProblemTriple) -> SolverHandle:
    """Assemble the dense operator and cache its LU factorization."""
    return SolverHandle(problem)


def solve(handle: SolverHandle, c: np.ndarray | None = None) -> np.ndarray:
    """Solve ``A X + sign * X^T B^T = C`` via the handle's factorization.

    ``c`` defaults to the handle's own right-hand side; passing a different
    matrix reuses the factorization for a new right-hand side.
    """
    if c is None:
        c = handle.problem.c
    else:
        c = _square(c, "C")
        if c.shape[0] != handle.n:
            raise ValueError(f"C has dimension {c.shape[0]}, expected {handle.n}")
    return unvec(handle.solve_vec(vec(c)), handle.n)


def directional_derivative(
    handle: SolverHandle,
    x: np.ndarray,
    e: np.ndarray,
    f: np.ndarray,
    g: np.ndarray,
) -> np.ndarray:
    """First-order response of the solution to a data perturbation direction.

    For the direction ``(E, F, G)`` on ``(A, B, C)`` and computed solution
    ``x``, returns the solution ``Y`` of

        ``A Y + sign * Y^T B^T = G - E X - sign * X^T F^T``

    using the cached factorization (no re-factorization).
    """
    x = np.asarray(x, dtype=float)
    s = handle.problem.sign
    rhs = np.asarray(g, dtype=float) - np.asarray(e, dtype=float) @ x
    rhs -= s * (x.T @ np.asarray(f, dtype=float).T)
    return unvec(handle.solve_vec(vec(rhs)), handle.n)


@dataclass
class SolvabilityReport:
    solvable: bool
    method: str                      # "spectrum" or "operator"
    violations: list[str] = field(default_factory=list)
    min_pivot: float | None = None
    threshold: float | None = None


def solvability_check(problem: ProblemTriple, eigs=None) -> SolvabilityReport:
    """Check unique solvability of the equation.

    With ``eigs`` a sequence of generalized eigenvalue pairs ``(a_ii, b_ii)``
    of the pencil ``A - lambda B``, tests the spectral conditions directly.
    Without it, falls back to invertibility diagnostics of the assembled
    operator.  Always returns a report, never raises.
    """
    if eigs is not None:
        pairs = [(float(a), float(b)) for a, b in eigs]
        s = problem.sign
        violations = []
        for i, (ai, bi) in enumerate(pairs):
            if ai + s * bi == 0.0:
                violations.append(f"a_{i}{i} {'+' if s > 0 else '-'} b_{i}{i} = 0")
        for i in range(len(pairs)):
            for j in range(i + 1, len(pairs)):
                if pairs[i][0] * pairs[j][0] - pairs[i][1] * pairs[j][1] == 0.0:
                    violations.append(f"a_{i}{i}·a_{j}{j} - b_{i}{i}·b_{j}{j} = 0")
        return SolvabilityReport(
            solvable=not violations, method="spectrum", violations=violations
        )
    handle = build_handle(problem)
    report = handle.singularity
    violations = []
    if report.is_singular:
        violations.append(
            f"operator pivot {report.pivot_index} has magnitude "
            f"{report.min_pivot:.3e} (threshold {report.threshold:.3e})"
        )
    return SolvabilityReport(
        solvable=not report.is_singular,
        method="operator",
        violations=violations,
        min_pivot=report.min_pivot,
        threshold=report.threshold,
    )


@dataclass(frozen=True)
class SchurFactors:
    """Generalized triangular factors ``A = W T_A V^T``, ``B = W T_B V^T``.

    ``W`` and ``V`` are orthogonal and ``T_A``, ``T_B`` strictly upper
    triangular; quasi-triangular input (nonzero subdiagonal, i.e. 2x2
    eigenvalue blocks) is rejected, route such problems to the dense
    operator path instead.
    """

    w: np.ndarray
    v: np.ndarray
    t_a: np.ndarray
    t_b: np.ndarray

    def __post_init__(self):
        w = _square(self.w, "W")
        v = _square(self.v, "V")
        t_a = _square(self.t_a, "T_A")
        t_b = _square(self.t_b, "T_B")
        n = w.shape[0]
        if not (v.shape[0] == t_a.shape[0] == t_b.shape[0] == n):
            raise ValueError("all factors must share one dimension")
        tol = 100 * EPS * n
        eye = np.eye(n)
        for name, q in (("W", w), ("V", v)):
            if np.max(np.abs(q.T @ q - eye)) > tol:
                raise ValueError(f"{name} is not orthogonal to within {tol:.2e}")
        for name, t in (("T_A", t_a), ("T_B", t_b)):
            if n > 1 and np.any(np.tril(t, -1) != 0.0):
                raise ValueError(
                    f"{name} has nonzero subdiagonal entries; quasi-triangular "
                    "factors (2x2 blocks) are not supported on this path"
                )
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t_a", t_a)
        object.__setattr__(self, "t_b", t_b)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray]:
        """Coefficient matrices ``(A, B)`` implied by the factors."""
        return self.w @ self.t_a @ self.v.T, self.w @ self.t_b @ self.v.T

    def consistent_with(self, a, b, tol: float = 1e-10) -> bool:
        """Whether the factors reproduce ``a`` and ``b`` to relative ``tol``."""
        ra, rb = self.reconstruct()
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        in_a = np.linalg.norm(a - ra, "fro") <= tol * max(np.linalg.norm(a, "fro"), EPS)
        in_b = np.linalg.norm(b - rb, "fro") <= tol * max(np.linalg.norm(b, "fro"), EPS)
        return bool(in_a and in_b)


def solve_triangular(factors: SchurFactors, c: np.ndarray, sign: int = 1) -> np.ndarray:
    """Substitution fast path for caller-supplied triangular factors.

    Transforms the right-hand side to ``C~ = W^T C W``, solves

        ``T_A Y + sign * Y^T T_B^T = C~``

    by backward substitution over entry pairs, and returns ``X = V Y W^T``.

    Entry pairs ``(Y[i, j], Y[j, i])`` are processed with ``j`` from ``n``
    down to 1 and ``i`` from ``n`` down to ``j``.  Each off-diagonal pair
    solves the closed 2x2 system

        ``t_a[i,i] Y[i,j] + sign * t_b[j,j] Y[j,i] = rhs_ij``
        ``t_a[j,j] Y[j,i] + sign * t_b[i,i] Y[i,j] = rhs_ji``

    whose right-hand sides accumulate already-solved later entries; the
    triangular structure guarantees the pair only involves entries from
    columns >= j (and rows > i within column j), all previously computed.
    A pair determinant ``t_a[i,i] t_a[j,j] - t_b[i,i] t_b[j,j]`` (or diagonal
    divisor ``t_a[i,i] + sign * t_b[i,i]``) at roundoff scale means the
    solvability conditions fail and raises
    :class:`NotUniquelySolvableError`.
    """
    sign = as_sign(sign)
    c = _square(c, "C")
    n = factors.n
    if c.shape[0] != n:
        raise ValueError(f"C has dimension {c.shape[0]}, expected {n}")
    ta, tb = factors.t_a, factors.t_b
    ct = factors.w.T @ c @ factors.w
    y = np.zeros((n, n))
    for j in range(n - 1, -1, -1):
        for i in range(n - 1, j - 1, -1):
            r1 = ct[i, j] - ta[i, i + 1:] @ y[i + 1:, j]
            r1 -= sign * (tb[j, j + 1:] @ y[j + 1:, i])
            if i == j:
                d = ta[i, i] + sign * tb[i, i]
                if abs(d) <= 4 * EPS * (abs(ta[i, i]) + abs(tb[i, i])):
                    raise NotUniquelySolvableError(
                        f"diagonal divisor t_a[{i},{i}] "
                        f"{'+' if sign > 0 else '-'} t_b[{i},{i}] vanishes"
                    )
                y[i, i] = r1 / d
            else:
                r2 = ct[j, i] - ta[j, j + 1:] @ y[j + 1:, i]
                r2 -= sign * (tb[i, i + 1:] @ y[i + 1:, j])
                a11, a12 = ta[i, i], sign * tb[j, j]
                a21, a22 = sign * tb[i, i], ta[j, j]
                det = a11 * a22 - a12 * a21
                if abs(det) <= 4 * EPS * (abs(a11 * a22) + abs(a12 * a21)):
                    raise NotUniquelySolvableError(
                        f"pair determinant t_a[{i},{i}]·t_a[{j},{j}] - "
                        f"t_b[{i},{i}]·t_b[{j},{j}] vanishes"
                    )
                y[i, j] = (a22 * r1 - a12 * r2) / det
                y[j, i] = (a11 * r2 - a21 * r1) / det
    return factors.v @ y @ factors.w.T
