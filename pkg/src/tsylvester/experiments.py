"""Problem generators, perturbation machinery and benchmark tables.

The three generators build families of uniquely solvable problems with a
known exact solution: a fixed diagonal 2x2 family exposing the gap between
normwise and componentwise conditioning, a random 2x2 family whose
conditioning is dialed by a scale exponent, and a random n x n family from
rotated triangular coefficients.  On top of them sit componentwise random
perturbations, true-error and overestimation statistics, and CSV writers
for the benchmark tables.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .backward_error import mu_bar
from .conditioning import exact_conditions, sce_componentwise, sce_normwise
from .linalg import (
    comp_quotient,
    gauss_matrix,
    random_orthogonal,
    rng_stream,
    uniform_pm1_matrix,
)
from .solver import NotUniquelySolvableError, ProblemTriple, build_handle, solve

__all__ = [
    "ExperimentRecord",
    "OverestimationSummary",
    "Perturbation",
    "PerturbationSpec",
    "TrueErrors",
    "gen_example1",
    "gen_example2",
    "gen_example3",
    "overestimation",
    "perturb",
    "reproduce_tables",
    "run_example2_trial",
    "run_overestimation",
    "true_errors",
]


def gen_example1(eps_param: float) -> tuple[ProblemTriple, np.ndarray]:
    """Diagonal 2x2 problem with exact solution I.

    ``A = diag(1, eps)``, ``B = diag(1, 0)``, ``C = diag(2, eps)`` for
    ``0 < eps < 1``.  Its mixed and componentwise condition numbers stay at
    2 while the normwise one grows like ``1/eps``, so it separates the three
    measures cleanly.
    """
    eps_param = float(eps_param)
    if not 0.0 < eps_param < 1.0:
        raise ValueError(f"eps_param must lie in (0, 1), got {eps_param}")
    problem = ProblemTriple(
        a=np.diag([1.0, eps_param]),
        b=np.diag([1.0, 0.0]),
        c=np.diag([2.0, eps_param]),
    )
    return problem, np.eye(2)


def gen_example2(m_param: int, stream: np.random.Generator) -> tuple[ProblemTriple, np.ndarray]:
    """Random 2x2 problem whose conditioning grows with ``m_param``.

    With ``Q`` random orthogonal, the exact solution is
    ``X = Q^T diag(10^-m, 10^m) Q`` and

        ``A = [[g1, 0], [g2, 10^-m]] Q``,  ``B = [[g3, 0], [g4, 2*10^-m]] Q``

    with standard normal scalars drawn in the documented order Q, g1, g2,
    g3, g4.  ``C`` is computed so ``X`` is exact by construction.
    """
    m_param = int(m_param)
    if m_param < 0:
        raise ValueError(f"m_param must be nonnegative, got {m_param}")
    q = random_orthogonal(2, stream)
    scale = 10.0 ** m_param
    x = q.T @ np.diag([1.0 / scale, scale]) @ q
    a = np.array([
        [stream.standard_normal(), 0.0],
        [stream.standard_normal(), 1.0 / scale],
    ]) @ q
    b = np.array([
        [stream.standard_normal(), 0.0],
        [stream.standard_normal(), 2.0 / scale],
    ]) @ q
    c = a @ x + x.T @ b.T
    return ProblemTriple(a=a, b=b, c=c), x


def gen_example3(
    n: int,
    diag_a: np.ndarray,
    diag_b: np.ndarray,
    stream: np.random.Generator,
) -> tuple[ProblemTriple, np.ndarray]:
    """Random n x n problem from rotated triangular coefficients.

    ``A_hat`` and ``B_hat`` are lower triangular with the given diagonals
    and random strictly-lower parts; random orthogonal ``Q`` and ``Z``
    reshuffle them into ``(A, B) = (Q A_hat Z, Q B_hat Z)``.  The exact
    solution is a random Gaussian matrix and ``C`` is computed from it.
    The supplied diagonals are the generalized spectrum of ``(A, B)``, so
    unique solvability is checked on them directly; violations only warn,
    since the equation data may still be useful for diagnostics.

    Draw order: strict-lower of A_hat, strict-lower of B_hat, Q, Z, X.
    """
    diag_a = np.asarray(diag_a, dtype=float).ravel()
    diag_b = np.asarray(diag_b, dtype=float).ravel()
    if diag_a.size != n or diag_b.size != n:
        raise ValueError(
            f"diagonals must have length n={n}, got {diag_a.size} and {diag_b.size}"
        )
    a_hat = np.tril(gauss_matrix(n, stream), -1) + np.diag(diag_a)
    b_hat = np.tril(gauss_matrix(n, stream), -1) + np.diag(diag_b)
    q = random_orthogonal(n, stream)
    z = random_orthogonal(n, stream)
    a = q @ a_hat @ z
    b = q @ b_hat @ z
    x = gauss_matrix(n, stream)
    c = a @ x + x.T @ b.T
    for i in range(n):
        if diag_a[i] + diag_b[i] == 0.0:
            warnings.warn(
                f"diagonals give a_{i}{i} + b_{i}{i} = 0: not uniquely solvable",
                stacklevel=2,
            )
    for i in range(n):
        for j in range(i + 1, n):
            if diag_a[i] * diag_a[j] - diag_b[i] * diag_b[j] == 0.0:
                warnings.warn(
                    f"diagonals give a_{i}{i}·a_{j}{j} = b_{i}{i}·b_{j}{j}: "
                    "not uniquely solvable",
                    stacklevel=2,
                )
    return ProblemTriple(a=a, b=b, c=c), x


@dataclass(frozen=True)
class PerturbationSpec:
    """Componentwise random perturbation of magnitude ``epsilon``."""

    epsilon: float
    stream: np.random.Generator

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")


@dataclass(frozen=True)
class Perturbation:
    """A perturbed problem together with the realized perturbation.

    ``epsilon_star`` is the smallest admissible componentwise magnitude of
    the realized perturbation: the largest ratio ``|delta| / |data|`` over
    nonzero data entries.  It never exceeds the nominal epsilon.
    """

    problem: ProblemTriple
    delta_a: np.ndarray
    delta_b: np.ndarray
    delta_c: np.ndarray
    epsilon_star: float


def perturb(problem: ProblemTriple, spec: PerturbationSpec) -> Perturbation:
    """Draw ``delta = epsilon * factor (.) data`` with factors uniform on (-1, 1).

    Zero data entries stay exactly zero.  Factor matrices are drawn in the
    order A, B, C.
    """
    n = problem.n
    deltas = []
    eps_star = 0.0
    for data in (problem.a, problem.b, problem.c):
        factor = uniform_pm1_matrix(n, spec.stream)
        delta = spec.epsilon * factor * data
        deltas.append(delta)
        nz = data != 0
        if np.any(nz):
            ratio = np.abs(delta[nz]) / np.abs(data[nz])
            eps_star = max(eps_star, float(np.max(ratio)))
    perturbed = ProblemTriple(
        a=problem.a + deltas[0],
        b=problem.b + deltas[1],
        c=problem.c + deltas[2],
        sign=problem.sign,
    )
    return Perturbation(
        problem=perturbed,
        delta_a=deltas[0],
        delta_b=deltas[1],
        delta_c=deltas[2],
        epsilon_star=eps_star,
    )


class TrueErrors(NamedTuple):
    gamma_kappa: float
    gamma_m: float
    gamma_c: float


def true_errors(x: np.ndarray, x_tilde: np.ndarray) -> TrueErrors:
    """Normwise, mixed and componentwise relative errors of ``x_tilde``.

    ``gamma_kappa = ||dX||_F / ||X||_F``, ``gamma_m = ||dX||_max /
    ||X||_max`` and ``gamma_c`` the max-norm of the componentwise quotient
    ``dX / X`` under the zero convention (flagged infinite when a zero entry
    of X moved).
    """
    x = np.asarray(x, dtype=float)
    dx = np.asarray(x_tilde, dtype=float) - x
    if dx.shape != x.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {np.shape(x_tilde)}")
    return TrueErrors(
        gamma_kappa=float(np.linalg.norm(dx, "fro") / np.linalg.norm(x, "fro")),
        gamma_m=float(np.max(np.abs(dx)) / np.max(np.abs(x))),
        gamma_c=float(np.max(np.abs(comp_quotient(dx, x)))),
    )


def overestimation(rel_matrix: np.ndarray, epsilon: float, dx_over_x: np.ndarray) -> np.ndarray:
    """Entrywise ratio of the predicted error bound to the realized error.

    Computed on magnitudes, ``|rel_matrix * epsilon| / |dx_over_x|``, under
    the zero convention: entries where the realized error is zero are
    flagged infinite (and excluded from summary statistics), entries where
    the solution entry itself was zero (infinite denominator) come out zero.
    """
    return comp_quotient(
        np.abs(np.asarray(rel_matrix, dtype=float)) * float(epsilon),
        np.abs(np.asarray(dx_over_x, dtype=float)),
    )


@dataclass(frozen=True)
class ExperimentRecord:
    """One perturbation trial on a generated problem."""

    epsilon: float
    m_param: int
    gamma_kappa: float
    gamma_m: float
    gamma_c: float
    kappa: float
    m: float
    c: float
    kappa_sce: float
    m_sce: float
    c_sce: float
    epsilon_star: float
    mu_bar: float
    eta: float

    @property
    def kappa_bound(self) -> float:
        return self.kappa * self.epsilon

    @property
    def m_bound(self) -> float:
        return self.m * self.epsilon

    @property
    def c_bound(self) -> float:
        return self.c * self.epsilon

    @property
    def kappa_sce_bound(self) -> float:
        return self.kappa_sce * self.epsilon

    @property
    def m_sce_bound(self) -> float:
        return self.m_sce * self.epsilon

    @property
    def c_sce_bound(self) -> float:
        return self.c_sce * self.epsilon


def run_example2_trial(m_param: int, epsilon: float, seed: int, k: int = 3) -> ExperimentRecord:
    """One seeded trial of the random 2x2 family.

    The trial owns one stream consumed in a fixed order: problem generation,
    perturbation factors, normwise estimator directions, componentwise
    estimator directions.  The perturbed equation is solved through its own
    dense factorization; backward errors are evaluated for the perturbed
    solution against the unperturbed data.
    """
    stream = rng_stream(seed)
    problem, x = gen_example2(m_param, stream)
    handle = build_handle(problem)
    pert = perturb(problem, PerturbationSpec(epsilon=epsilon, stream=stream))
    x_tilde = solve(build_handle(pert.problem))
    errors = true_errors(x, x_tilde)
    exact = exact_conditions(problem, x, handle)
    est_norm = sce_normwise(handle, x, k, stream)
    est_comp = sce_componentwise(handle, x, k, stream)
    report = mu_bar(problem, x_tilde)
    return ExperimentRecord(
        epsilon=float(epsilon),
        m_param=int(m_param),
        gamma_kappa=errors.gamma_kappa,
        gamma_m=errors.gamma_m,
        gamma_c=errors.gamma_c,
        kappa=exact.kappa,
        m=exact.m,
        c=exact.c,
        kappa_sce=est_norm.kappa,
        m_sce=est_comp.m,
        c_sce=est_comp.c,
        epsilon_star=pert.epsilon_star,
        mu_bar=report.mu_bar,
        eta=report.eta_bound,
    )


_M_GRID = (2, 4, 6, 8, 10)
_T12_EPSILONS = (1e-8, 1e-16)
_T4_EPSILONS = (1e-3, 1e-6, 1e-9, 1e-12)

TABLE_COLUMNS = {
    1: ("epsilon", "m", "gamma_kappa", "kappa_eps", "kappa_sce_eps"),
    2: ("epsilon", "m", "gamma_m", "m_eps", "m_sce_eps", "gamma_c", "c_eps", "c_sce_eps"),
    4: ("epsilon", "m", "epsilon_star", "mu_bar", "eta"),
}


def _table_row(table: int, epsilon: float, m_param: int, records) -> dict:
    def med(attr):
        return float(np.median([getattr(r, attr) for r in records]))

    row = {"epsilon": float(epsilon), "m": int(m_param)}
    if table == 1:
        row["gamma_kappa"] = med("gamma_kappa")
        row["kappa_eps"] = med("kappa_bound")
        row["kappa_sce_eps"] = med("kappa_sce_bound")
    elif table == 2:
        row["gamma_m"] = med("gamma_m")
        row["m_eps"] = med("m_bound")
        row["m_sce_eps"] = med("m_sce_bound")
        row["gamma_c"] = med("gamma_c")
        row["c_eps"] = med("c_bound")
        row["c_sce_eps"] = med("c_sce_bound")
    else:
        row["epsilon_star"] = med("epsilon_star")
        row["mu_bar"] = med("mu_bar")
        row["eta"] = med("eta")
    return row


def reproduce_tables(table: int, seeds, out=None, k: int = 3) -> list[dict]:
    """Benchmark tables over the random 2x2 family, one CSV row per cell.

    Table 1 compares true normwise errors with exact and estimated
    first-order bounds, table 2 the mixed/componentwise counterparts, and
    table 4 the realized componentwise magnitude against the backward-error
    bounds.  Each cell is the per-column median over the seed list, so the
    output is deterministic for a fixed list.  Rows are written to ``out``
    as CSV when given, and returned either way.
    """
    table = int(table)
    if table not in TABLE_COLUMNS:
        raise ValueError(f"table must be one of 1, 2, 4, got {table}")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("at least one seed is required")
    eps_grid = _T4_EPSILONS if table == 4 else _T12_EPSILONS
    rows = []
    for epsilon in eps_grid:
        for m_param in _M_GRID:
            records = [run_example2_trial(m_param, epsilon, seed, k) for seed in seeds]
            rows.append(_table_row(table, epsilon, m_param, records))
    if out is not None:
        columns = TABLE_COLUMNS[table]
        with open(out, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow(
                    [str(row["m"]) if col == "m" else repr(row[col]) for col in columns]
                )
    return rows


@dataclass(frozen=True)
class OverestimationSummary:
    """Aggregate overestimation statistics over many perturbation samples.

    Means and variances run over all included entries of all samples;
    entries whose realized componentwise error is zero or flagged are
    excluded.  ``entry_mean_*`` hold per-entry means in vec order (for
    plotting against the solution entry index).
    """

    example: int
    n: int
    samples: int
    epsilon: float
    k: int
    mean_on: float
    mean_oc: float
    var_on: float
    var_oc: float
    included: int
    skipped_samples: int
    entry_mean_on: np.ndarray
    entry_mean_oc: np.ndarray


def run_overestimation(
    example: int,
    samples: int,
    epsilon: float,
    seed: int,
    n: int = 40,
    m_param: int = 2,
    k: int = 3,
    out=None,
) -> OverestimationSummary:
    """Overestimation experiment comparing the two condition estimators.

    For each sample: generate a problem with known solution (the random 2x2
    family for ``example=2``, the rotated-triangular n x n family with
    standard normal diagonals for ``example=3``), run both estimators with
    ``k`` probes, apply a componentwise perturbation of magnitude
    ``epsilon``, solve the perturbed equation through its own factorization,
    and form the entrywise bound-to-error ratios for the normwise and the
    componentwise relative condition matrices.  Samples whose draw is not
    uniquely solvable are skipped and counted.  ``out`` gets one CSV row per
    sample with that sample's included-entry means.
    """
    example = int(example)
    if example not in (2, 3):
        raise ValueError(f"example must be 2 or 3, got {example}")
    if example == 2:
        n = 2
    nn = n * n
    sum_on = sum_oc = sumsq_on = sumsq_oc = 0.0
    included = 0
    skipped = 0
    entry_sum_on = np.zeros((n, n))
    entry_sum_oc = np.zeros((n, n))
    entry_count = np.zeros((n, n))
    csv_rows = []
    for idx, seq in enumerate(np.random.SeedSequence(seed).spawn(int(samples))):
        stream = np.random.default_rng(seq)
        try:
            if example == 2:
                problem, x = gen_example2(m_param, stream)
            else:
                diag_a = stream.standard_normal(n)
                diag_b = stream.standard_normal(n)
                problem, x = gen_example3(n, diag_a, diag_b, stream)
            handle = build_handle(problem)
            est_norm = sce_normwise(handle, x, k, stream)
            est_comp = sce_componentwise(handle, x, k, stream)
            pert = perturb(problem, PerturbationSpec(epsilon=epsilon, stream=stream))
            x_tilde = solve(build_handle(pert.problem))
        except NotUniquelySolvableError:
            skipped += 1
            continue
        dx_over_x = comp_quotient(x_tilde - x, x)
        on = overestimation(est_norm.rel_condition_matrix, epsilon, dx_over_x)
        oc = overestimation(est_comp.rel_condition_matrix, epsilon, dx_over_x)
        valid = np.isfinite(dx_over_x) & (dx_over_x != 0)
        vals_on = on[valid]
        vals_oc = oc[valid]
        count = int(valid.sum())
        included += count
        sum_on += float(vals_on.sum())
        sum_oc += float(vals_oc.sum())
        sumsq_on += float((vals_on**2).sum())
        sumsq_oc += float((vals_oc**2).sum())
        entry_sum_on += np.where(valid, on, 0.0)
        entry_sum_oc += np.where(valid, oc, 0.0)
        entry_count += valid
        csv_rows.append((
            idx,
            count,
            float(vals_on.mean()) if count else float("nan"),
            float(vals_oc.mean()) if count else float("nan"),
        ))
    mean_on = sum_on / included if included else float("nan")
    mean_oc = sum_oc / included if included else float("nan")
    var_on = sumsq_on / included - mean_on**2 if included else float("nan")
    var_oc = sumsq_oc / included - mean_oc**2 if included else float("nan")
    with np.errstate(invalid="ignore"):
        entry_mean_on = np.where(entry_count > 0, entry_sum_on / entry_count, np.nan)
        entry_mean_oc = np.where(entry_count > 0, entry_sum_oc / entry_count, np.nan)
    if out is not None:
        with open(out, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(("sample", "included_entries", "mean_on", "mean_oc"))
            for row in csv_rows:
                writer.writerow((str(row[0]), str(row[1]), repr(row[2]), repr(row[3])))
    return OverestimationSummary(
        example=example,
        n=n,
        samples=int(samples),
        epsilon=float(epsilon),
        k=int(k),
        mean_on=mean_on,
        mean_oc=mean_oc,
        var_on=var_on,
        var_oc=var_oc,
        included=included,
        skipped_samples=skipped,
        entry_mean_on=entry_mean_on.reshape(-1, order="F"),
        entry_mean_oc=entry_mean_oc.reshape(-1, order="F"),
    )
