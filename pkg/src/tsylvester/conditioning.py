"""Condition numbers of the transpose-Sylvester equation, exact and estimated.

The exact normwise (kappa), mixed (m) and componentwise (c) condition
numbers are evaluated from explicit formulas involving the inverse of the
equation operator; that is affordable at desk scale only.  The small-sample
estimators probe the solution map along a few random orthonormal directions
instead, reusing the handle's cached factorization, and rescale the sampled
directional derivatives by Wallis factors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DegenerateDirectionsError,
    gauss_matrix,
    mgs_orthonormalize,
    comp_quotient,
    unvec,
    vec,
    vec_transpose_perm,
)
from .solver import ProblemTriple, SolverHandle, build_handle, directional_derivative

__all__ = [
    "ExactConditionResult",
    "SceEstimate",
    "WallisFactor",
    "exact_conditions",
    "sample_directions",
    "sce_componentwise",
    "sce_normwise",
    "wallis",
    "wallis_factor",
]


def wallis(p: int, mode: str = "exact") -> float:
    """Wallis factor: the constant making ``|g . d| / omega_p`` an unbiased
    estimate of ``||g||_2`` for ``d`` uniform on the unit sphere in R^p.

    ``mode='exact'`` evaluates the piecewise product formula (1 for p=1,
    2/pi for p=2, then the ratio of consecutive odd/even products);
    ``mode='approx'`` returns ``sqrt(2 / (pi (p - 1/2)))``, accurate to
    better than 1% from p=5 on.
    """
    p = int(p)
    if p < 1:
        raise ValueError(f"p must be a positive integer, got {p}")
    if mode == "approx":
        return float(np.sqrt(2.0 / (np.pi * (p - 0.5))))
    if mode != "exact":
        raise ValueError(f"mode must be 'exact' or 'approx', got {mode!r}")
    # recurrence omega_p = omega_{p-2} * (p-2)/(p-1), seeded at p=1 and p=2
    if p % 2:
        w, q = 1.0, 1
    else:
        w, q = 2.0 / np.pi, 2
    while q < p:
        q += 2
        w *= (q - 2) / (q - 1)
    return float(w)


@dataclass(frozen=True)
class WallisFactor:
    p: int
    exact: float
    approx: float


def wallis_factor(p: int) -> WallisFactor:
    return WallisFactor(p=int(p), exact=wallis(p, "exact"), approx=wallis(p, "approx"))


@dataclass(frozen=True)
class ExactConditionResult:
    """Exact condition numbers and the shared componentwise bound vector.

    ``componentwise_bound`` is the length-``n^2`` numerator common to the
    mixed and componentwise condition numbers,

        ``|P^-1 (X^T (x) I)| vec|A| + |P^-1 (I (x) X^T) Pi| vec|B| + |P^-1| vec|C|``.

    ``c`` is infinite when a zero entry of X meets a nonzero bound entry.
    """

    kappa: float
    m: float
    c: float
    componentwise_bound: np.ndarray


def exact_conditions(
    problem: ProblemTriple,
    x: np.ndarray,
    handle: SolverHandle | None = None,
) -> ExactConditionResult:
    """Exact normwise/mixed/componentwise condition numbers at solution ``x``.

    Forms the explicit inverse of the ``n^2 x n^2`` operator by solving unit
    right-hand sides against the cached factorization, so this is a desk-scale
    routine.  Raises :class:`~tsylvester.solver.NotUniquelySolvableError` when
    the operator is singular.
    """
    if handle is None:
        handle = build_handle(problem)
    n = handle.n
    x = np.asarray(x, dtype=float)
    eye = np.eye(n)
    perm = vec_transpose_perm(n)
    p_inv = handle.solve_vec(np.eye(n * n))
    m_a = p_inv @ np.kron(x.T, eye)
    m_b = p_inv @ (np.kron(eye, x.T)[:, perm.indices])
    op_f = float(np.sqrt(np.sum(m_a**2) + np.sum(m_b**2) + np.sum(p_inv**2)))
    data_f = float(
        np.sqrt(sum(np.sum(m**2) for m in (problem.a, problem.b, problem.c)))
    )
    x_f = float(np.linalg.norm(x, "fro"))
    kappa = op_f * data_f / x_f
    bound = (
        np.abs(m_a) @ vec(np.abs(problem.a))
        + np.abs(m_b) @ vec(np.abs(problem.b))
        + np.abs(p_inv) @ vec(np.abs(problem.c))
    )
    m_cond = float(np.max(bound) / np.max(np.abs(x)))
    c_cond = float(np.max(comp_quotient(bound, vec(np.abs(x)))))
    return ExactConditionResult(
        kappa=kappa, m=m_cond, c=c_cond, componentwise_bound=bound
    )


def sample_directions(
    n: int,
    k: int,
    stream: np.random.Generator,
    max_retries: int = 5,
) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Draw ``k`` orthonormal perturbation direction triples ``(E, F, G)``.

    Each triple's matrices get independent standard normal entries (drawn in
    the order E, F, G per triple); the stacked vecs are orthonormalized with
    modified Gram-Schmidt, so the triples form an orthonormal set in
    ``R^{3 n^2}``.  A degenerate draw is resampled up to ``max_retries``
    times before giving up.
    """
    p = 3 * n * n
    if not 1 <= k <= p:
        raise ValueError(f"k must be between 1 and 3*n^2 = {p}, got {k}")
    last_error = None
    for _ in range(max_retries):
        cols = np.empty((p, k))
        for i in range(k):
            e = gauss_matrix(n, stream)
            f = gauss_matrix(n, stream)
            g = gauss_matrix(n, stream)
            cols[:, i] = np.concatenate([vec(e), vec(f), vec(g)])
        try:
            q = mgs_orthonormalize(cols)
        except DegenerateDirectionsError as exc:
            last_error = exc
            continue
        nn = n * n
        return [
            (unvec(q[:nn, i], n), unvec(q[nn:2 * nn, i], n), unvec(q[2 * nn:, i], n))
            for i in range(k)
        ]
    raise DegenerateDirectionsError(
        f"could not draw {k} independent directions in {max_retries} attempts"
    ) from last_error


@dataclass(frozen=True)
class SceEstimate:
    """Small-sample condition estimate.

    ``abs_condition_matrix`` is the entrywise estimate of the solution's
    absolute sensitivity; ``rel_condition_matrix`` its relative counterpart,
    with entries kept absolute where the solution entry is zero.  Exactly one
    of ``kappa`` (normwise mode) or ``m``/``c`` (componentwise mode) is set.
    """

    k: int
    mode: str
    abs_condition_matrix: np.ndarray
    rel_condition_matrix: np.ndarray
    omega_p: float
    omega_k: float
    kappa: float | None = None
    m: float | None = None
    c: float | None = None


def _resolve_directions(handle, k, stream, directions):
    if directions is None:
        if stream is None:
            raise ValueError("a stream is required when directions are not injected")
        return sample_directions(handle.n, k, stream)
    return [tuple(np.asarray(m, dtype=float) for m in d) for d in directions]


def _abs_condition(handle, x, directions, masked: bool):
    prob = handle.problem
    ssq = np.zeros((handle.n, handle.n))
    for e, f, g in directions:
        if masked:
            e, f, g = e * prob.a, f * prob.b, g * prob.c
        y = directional_derivative(handle, x, e, f, g)
        ssq += y * y
    return np.sqrt(ssq)


def sce_normwise(
    handle: SolverHandle,
    x: np.ndarray,
    k: int = 3,
    stream: np.random.Generator | None = None,
    directions=None,
    wallis_mode: str = "approx",
) -> SceEstimate:
    """Estimate the normwise condition of the solution from ``k`` samples.

    Solves one directional-derivative equation per direction against the
    cached factorization, scales the entrywise root-sum-of-squares by
    ``omega_k / omega_p`` (p = 3 n^2), and aggregates.  The relative matrix
    divides ``||[A, B, C]||_F`` times the absolute matrix componentwise by
    ``x``, keeping absolute entries where ``x`` is zero; the scalar estimate
    is ``||[A, B, C]||_F ||K_abs||_F / ||x||_F``.

    ``directions`` injects a precomputed orthonormal direction set (testing
    hook, bypasses the stream); its length overrides ``k``.
    """
    x = np.asarray(x, dtype=float)
    dirs = _resolve_directions(handle, k, stream, directions)
    k = len(dirs)
    p = 3 * handle.n ** 2
    omega_p = wallis(p, wallis_mode)
    omega_k = wallis(k, wallis_mode)
    k_abs = (omega_k / omega_p) * _abs_condition(handle, x, dirs, masked=False)
    prob = handle.problem
    data_f = float(np.sqrt(sum(np.sum(m**2) for m in (prob.a, prob.b, prob.c))))
    r_rel = k_abs.copy()
    np.divide(data_f * k_abs, x, out=r_rel, where=x != 0)
    kappa = data_f * float(np.linalg.norm(k_abs, "fro")) / float(np.linalg.norm(x, "fro"))
    return SceEstimate(
        k=k,
        mode="normwise",
        abs_condition_matrix=k_abs,
        rel_condition_matrix=r_rel,
        omega_p=omega_p,
        omega_k=omega_k,
        kappa=kappa,
    )


def sce_componentwise(
    handle: SolverHandle,
    x: np.ndarray,
    k: int = 3,
    stream: np.random.Generator | None = None,
    directions=None,
    wallis_mode: str = "approx",
) -> SceEstimate:
    """Estimate mixed/componentwise condition numbers from ``k`` samples.

    Identical to :func:`sce_normwise` except the orthonormal directions are
    Hadamard-masked by ``A``, ``B``, ``C`` before the directional-derivative
    solves, so the probes respect the data's scaling and sparsity.  The
    scalar estimates are ``m = ||M_abs||_max / ||x||_max`` and ``c`` the
    max-norm of the componentwise quotient matrix (zero entries of ``x``
    keep their absolute value).
    """
    x = np.asarray(x, dtype=float)
    dirs = _resolve_directions(handle, k, stream, directions)
    k = len(dirs)
    p = 3 * handle.n ** 2
    omega_p = wallis(p, wallis_mode)
    omega_k = wallis(k, wallis_mode)
    m_abs = (omega_k / omega_p) * _abs_condition(handle, x, dirs, masked=True)
    c_rel = m_abs.copy()
    np.divide(m_abs, x, out=c_rel, where=x != 0)
    m_est = float(np.max(m_abs) / np.max(np.abs(x)))
    c_est = float(np.max(np.abs(c_rel)))
    return SceEstimate(
        k=k,
        mode="componentwise",
        abs_condition_matrix=m_abs,
        rel_condition_matrix=c_rel,
        omega_p=omega_p,
        omega_k=omega_k,
        m=m_est,
        c=c_est,
    )
