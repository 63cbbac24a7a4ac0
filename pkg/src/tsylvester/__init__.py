"""Transpose-Sylvester equations: solvers, conditioning, backward errors.

The package solves the real matrix equation ``A X ± X^T B^T = C``, computes
its exact normwise/mixed/componentwise condition numbers and cheap
small-sample estimates of them, evaluates normwise and componentwise
backward errors of approximate solutions, and reproduces the desk-scale
benchmark experiments.
"""

from .backward_error import (
    BackwardErrorReport,
    UnderdeterminedSystem,
    build_underdetermined,
    eta_bound,
    mu_bar,
    mu_exact_oracle,
    residual,
)
from .conditioning import (
    ExactConditionResult,
    SceEstimate,
    WallisFactor,
    exact_conditions,
    sample_directions,
    sce_componentwise,
    sce_normwise,
    wallis,
    wallis_factor,
)
from .experiments import (
    ExperimentRecord,
    OverestimationSummary,
    Perturbation,
    PerturbationSpec,
    TrueErrors,
    gen_example1,
    gen_example2,
    gen_example3,
    overestimation,
    perturb,
    reproduce_tables,
    run_example2_trial,
    run_overestimation,
    true_errors,
)
from .linalg import (
    DegenerateDirectionsError,
    LuFactor,
    MatrixNorms,
    PermutationOperator,
    SingularOperatorError,
    comp_quotient,
    gauss_matrix,
    kron,
    lu_solve,
    mgs_orthonormalize,
    norms,
    qr,
    random_orthogonal,
    rng_stream,
    sigma_min,
    spawn_streams,
    uniform_pm1_matrix,
    unvec,
    vec,
    vec_transpose_perm,
)
from .matrixio import MatrixFormatError, read_matrix, write_matrix
from .solver import (
    NotUniquelySolvableError,
    ProblemTriple,
    SchurFactors,
    SolvabilityReport,
    SolverHandle,
    build_handle,
    build_operator,
    directional_derivative,
    solvability_check,
    solve,
    solve_triangular,
)

__version__ = "0.1.0"
