"""Backward errors of an approximate transpose-Sylvester solution.

Given a computed solution ``Y`` of ``A X + s X^T B^T = C``, this module
evaluates the residual, an upper bound ``eta`` on the normwise backward
error, and a computable upper bound ``mu_bar`` on the componentwise backward
error

    ``mu(Y) = min { eps : (A+dA) Y + s Y^T (B+dB)^T = C + dC,``
    ``               |dA| <= eps |A|, |dB| <= eps |B|, |dC| <= eps |C| }``.

Writing ``vec(dA) = D1 nu1`` etc. with ``D1 = diag(vec(A))`` turns the
constraint into one underdetermined system ``H z = vec(R)`` over
``z = (nu1; nu2; nu3)``; ``mu_bar`` is the infinity norm of its minimum
2-norm solution, obtained from a QR factorization of ``H^T``.  It satisfies
``mu(Y) <= mu_bar(Y) <= sqrt(3) n mu(Y)``.  A desk-scale linear-programming
oracle for the exact minimum infinity-norm value is included for
verification.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linprog

from .linalg import EPS, sigma_min, unvec, vec, vec_transpose_perm
from .solver import ProblemTriple

__all__ = [
    "BackwardErrorReport",
    "UnderdeterminedSystem",
    "build_underdetermined",
    "eta_bound",
    "mu_bar",
    "mu_exact_oracle",
    "residual",
]


def residual(problem: ProblemTriple, y: np.ndarray) -> np.ndarray:
    """Residual ``C - A Y - sign * Y^T B^T`` of an approximate solution."""
    return problem.c - problem.lhs(np.asarray(y, dtype=float))


def eta_bound(problem: ProblemTriple, y: np.ndarray) -> float:
    """Upper bound on the normwise backward error of ``y``.

    Computed as the product

        ``[(||A||_F + ||B||_F) ||Y||_F + ||C||_F] / d  *  ||R||_F / [(||A||_F + ||B||_F) ||Y||_F + ||C||_F]``

    with ``d = sqrt((||A||_F^2 + ||B||_F^2) sigma_min(Y)^2 + ||C||_F^2)``;
    the long factors cancel, leaving ``||R||_F / d``.  A singular ``y``
    contributes ``sigma_min = 0`` and the bound stays finite as long as
    ``C`` is nonzero.
    """
    y = np.asarray(y, dtype=float)
    r_f = float(np.linalg.norm(residual(problem, y), "fro"))
    n_a = float(np.linalg.norm(problem.a, "fro"))
    n_b = float(np.linalg.norm(problem.b, "fro"))
    n_c = float(np.linalg.norm(problem.c, "fro"))
    n_y = float(np.linalg.norm(y, "fro"))
    num = (n_a + n_b) * n_y + n_c
    den = float(np.sqrt((n_a**2 + n_b**2) * sigma_min(y) ** 2 + n_c**2))
    if den == 0.0:
        return 0.0 if r_f == 0.0 else np.inf
    return (num / den) * (r_f / num)


@dataclass(frozen=True)
class UnderdeterminedSystem:
    """The ``n^2 x 3 n^2`` system ``H z = r`` behind the componentwise bound.

    ``H = [(Y^T (x) I) D1, sign * (I (x) Y^T) Pi D2, -D3]`` with the ``D_i``
    diagonal in the vecs of A, B, C, and ``r`` the vec of the residual.
    """

    h: np.ndarray
    r: np.ndarray


def build_underdetermined(problem: ProblemTriple, y: np.ndarray) -> UnderdeterminedSystem:
    """Assemble ``H`` and ``r`` for an approximate solution ``y``."""
    y = np.asarray(y, dtype=float)
    n = problem.n
    eye = np.eye(n)
    perm = vec_transpose_perm(n)
    # the D_i are diagonal, so they enter as column scalings
    block_a = np.kron(y.T, eye) * vec(problem.a)[None, :]
    block_b = problem.sign * np.kron(eye, y.T)[:, perm.indices] * vec(problem.b)[None, :]
    block_c = -np.diag(vec(problem.c))
    h = np.hstack([block_a, block_b, block_c])
    return UnderdeterminedSystem(h=h, r=vec(residual(problem, y)))


@dataclass(frozen=True)
class BackwardErrorReport:
    """Componentwise backward-error bound and recovered perturbations.

    When ``H`` is numerically rank-deficient the bound is infinite and the
    perturbation fields are ``None``.  Otherwise ``nu`` is the minimum
    2-norm solution of ``H z = r`` and the recovered ``(dA, dB, dC)``
    satisfy the perturbed equation exactly (to roundoff) with
    ``|dA| <= mu_bar |A|`` entrywise, and likewise for B and C.
    """

    residual: np.ndarray
    eta_bound: float
    mu_bar: float
    nu: np.ndarray | None
    delta_a: np.ndarray | None
    delta_b: np.ndarray | None
    delta_c: np.ndarray | None


def mu_bar(problem: ProblemTriple, y: np.ndarray) -> BackwardErrorReport:
    """Componentwise backward-error bound of ``y`` with recovered perturbations.

    Factors ``H^T = Q [R; 0]``, solves ``R^T z1 = r`` and takes
    ``z = Q [z1; 0]`` (the minimum 2-norm solution of ``H z = r``);
    ``mu_bar`` is ``||z||_inf``.  A triangular diagonal entry below
    ``3 n^2 eps`` of the largest flags rank deficiency, for which the
    backward error is infinite.
    """
    y = np.asarray(y, dtype=float)
    n = problem.n
    system = build_underdetermined(problem, y)
    res = unvec(system.r, n)
    eta = eta_bound(problem, y)
    q, r_fac = sla.qr(system.h.T, mode="economic")
    diag = np.abs(np.diag(r_fac))
    if diag.min() <= 3 * n * n * EPS * diag.max():
        return BackwardErrorReport(
            residual=res, eta_bound=eta, mu_bar=np.inf,
            nu=None, delta_a=None, delta_b=None, delta_c=None,
        )
    z1 = sla.solve_triangular(r_fac.T, system.r, lower=True)
    z = q @ z1
    nn = n * n
    nu1, nu2, nu3 = z[:nn], z[nn:2 * nn], z[2 * nn:]
    return BackwardErrorReport(
        residual=res,
        eta_bound=eta,
        mu_bar=float(np.max(np.abs(z))),
        nu=z,
        delta_a=unvec(vec(problem.a) * nu1, n),
        delta_b=unvec(vec(problem.b) * nu2, n),
        delta_c=unvec(vec(problem.c) * nu3, n),
    )


def mu_exact_oracle(system: UnderdeterminedSystem) -> float:
    """Exact minimum infinity-norm solution value of ``H z = r``.

    Solves ``min t`` subject to ``H z = r`` and ``-t <= z_i <= t`` as a
    linear program (desk scale only).  Returns ``inf`` when the system is
    infeasible (rank-deficient ``H`` with ``r`` outside its range).
    """
    h = np.asarray(system.h, dtype=float)
    r = np.asarray(system.r, dtype=float).ravel()
    m, nz = h.shape
    cost = np.zeros(nz + 1)
    cost[-1] = 1.0
    a_eq = np.hstack([h, np.zeros((m, 1))])
    a_ub = np.vstack([
        np.hstack([np.eye(nz), -np.ones((nz, 1))]),
        np.hstack([-np.eye(nz), -np.ones((nz, 1))]),
    ])
    res = linprog(
        cost,
        A_ub=a_ub,
        b_ub=np.zeros(2 * nz),
        A_eq=a_eq,
        b_eq=r,
        bounds=[(None, None)] * nz + [(0, None)],
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status == 2:  # infeasible
        return np.inf
    if res.status != 0:
        raise RuntimeError(f"linear program failed with status {res.status}: {res.message}")
    return float(res.fun)
