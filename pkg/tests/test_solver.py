import numpy as np
import pytest
from numpy.testing import assert_allclose

from tsylvester import (
    NotUniquelySolvableError,
    ProblemTriple,
    SchurFactors,
    build_handle,
    build_operator,
    directional_derivative,
    gen_example1,
    kron,
    random_orthogonal,
    solvability_check,
    solve,
    solve_triangular,
    vec,
    vec_transpose_perm,
)
from tsylvester.linalg import EPS

from conftest import random_triangular_factors, random_triple


def residual_norm(problem, x):
    return np.linalg.norm(problem.lhs(x) - problem.c, "fro")


def residual_tolerance(problem, x):
    a_f = np.linalg.norm(problem.a, "fro")
    b_f = np.linalg.norm(problem.b, "fro")
    return 1e3 * EPS * (
        (a_f + b_f) * np.linalg.norm(x, "fro") + np.linalg.norm(problem.c, "fro")
    )


class TestProblemTriple:
    def test_dimension_validation(self, rng):
        with pytest.raises(ValueError):
            ProblemTriple(a=np.eye(2), b=np.eye(3), c=np.eye(2))
        with pytest.raises(ValueError):
            ProblemTriple(a=rng.standard_normal((2, 3)), b=np.eye(2), c=np.eye(2))

    def test_finite_validation(self):
        bad = np.array([[np.nan, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            ProblemTriple(a=bad, b=np.eye(2), c=np.eye(2))

    def test_sign_parsing(self):
        assert ProblemTriple(a=np.eye(1), b=np.eye(1), c=np.eye(1), sign="plus").sign == 1
        assert ProblemTriple(a=np.eye(1), b=np.eye(1), c=np.eye(1), sign="minus").sign == -1
        with pytest.raises(ValueError):
            ProblemTriple(a=np.eye(1), b=np.eye(1), c=np.eye(1), sign=2)

    def test_lhs_sign(self, rng):
        a, b, x = (rng.standard_normal((2, 2)) for _ in range(3))
        plus = ProblemTriple(a=a, b=b, c=np.eye(2), sign=1)
        minus = ProblemTriple(a=a, b=b, c=np.eye(2), sign=-1)
        assert_allclose(plus.lhs(x), a @ x + x.T @ b.T)
        assert_allclose(minus.lhs(x), a @ x - x.T @ b.T)


class TestBuildOperator:
    def test_matches_kron_construction(self, rng):
        for n in (1, 2, 3, 5):
            a = rng.standard_normal((n, n))
            b = rng.standard_normal((n, n))
            perm = vec_transpose_perm(n)
            for sign in (1, -1):
                reference = kron(np.eye(n), a) + sign * kron(b, np.eye(n))[:, perm.indices]
                assert_allclose(build_operator(a, b, sign), reference)

    def test_scalar_case(self):
        assert_allclose(build_operator(np.array([[3.0]]), np.array([[4.0]]), 1), [[7.0]])
        assert_allclose(build_operator(np.array([[3.0]]), np.array([[4.0]]), -1), [[-1.0]])

    def test_identity_zero(self):
        assert_allclose(build_operator(np.eye(3), np.zeros((3, 3))), np.eye(9))

    def test_operator_acts_as_lhs(self, rng):
        problem = random_triple(4, rng)
        x = rng.standard_normal((4, 4))
        p = build_operator(problem.a, problem.b, problem.sign)
        assert_allclose(p @ vec(x), vec(problem.lhs(x)), atol=1e-12)


class TestBuildHandle:
    def test_diagonal_family_invertible(self):
        for eps in (0.5, 0.1, 0.01):
            problem, _ = gen_example1(eps)
            assert build_handle(problem).is_solvable

    def test_singular_recorded_not_raised(self):
        problem = ProblemTriple(a=np.eye(2), b=np.eye(2), c=np.eye(2))
        handle = build_handle(problem)
        assert not handle.is_solvable
        assert handle.singularity.is_singular


class TestSolve:
    def test_diagonal_family_identity_solution(self):
        problem, x_exact = gen_example1(0.5)
        assert_allclose(solve(build_handle(problem)), x_exact, atol=1e-12)

    def test_b_zero_reduces_to_linear_solve(self, rng):
        c = rng.standard_normal((3, 3))
        problem = ProblemTriple(a=np.eye(3), b=np.zeros((3, 3)), c=c)
        assert_allclose(solve(build_handle(problem)), c, atol=1e-13)

    def test_unsolvable_raises(self):
        problem = ProblemTriple(a=np.eye(2), b=np.eye(2), c=np.eye(2))
        with pytest.raises(NotUniquelySolvableError):
            solve(build_handle(problem))

    def test_residual_bound_random(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 11))
            sign = 1 if rng.uniform() < 0.5 else -1
            problem = random_triple(n, rng, sign)
            x = solve(build_handle(problem))
            assert residual_norm(problem, x) <= residual_tolerance(problem, x)

    def test_alternate_rhs_reuses_factorization(self, rng):
        problem = random_triple(3, rng)
        handle = build_handle(problem)
        c2 = rng.standard_normal((3, 3))
        x2 = solve(handle, c2)
        assert np.linalg.norm(problem.lhs(x2) - c2, "fro") <= residual_tolerance(problem, x2)


class TestSolvabilityCheck:
    def test_spectrum_diagonal_conditions(self):
        base = ProblemTriple(a=np.eye(1), b=np.eye(1), c=np.eye(1))
        assert solvability_check(base, eigs=[(1.0, 1.0)]).solvable
        report = solvability_check(base, eigs=[(1.0, -1.0)])
        assert not report.solvable
        assert report.violations

    def test_spectrum_pair_condition(self):
        base = ProblemTriple(a=np.eye(2), b=np.eye(2), c=np.eye(2))
        report = solvability_check(base, eigs=[(1.0, 2.0), (2.0, 1.0)])
        assert not report.solvable
        assert any("a_00" in v for v in report.violations)

    def test_minus_sign_diagonal_condition(self):
        base = ProblemTriple(a=np.eye(1), b=np.eye(1), c=np.eye(1), sign=-1)
        assert not solvability_check(base, eigs=[(1.0, 1.0)]).solvable
        assert solvability_check(base, eigs=[(1.0, -1.0)]).solvable

    def test_operator_fallback(self):
        problem, _ = gen_example1(0.25)
        report = solvability_check(problem)
        assert report.solvable and report.method == "operator"
        singular = ProblemTriple(a=np.eye(2), b=np.eye(2), c=np.eye(2))
        report = solvability_check(singular)
        assert not report.solvable
        assert report.min_pivot is not None


class TestSchurFactors:
    def test_rejects_non_orthogonal(self, rng):
        n = 3
        with pytest.raises(ValueError, match="orthogonal"):
            SchurFactors(
                w=rng.standard_normal((n, n)),
                v=np.eye(n),
                t_a=np.eye(n),
                t_b=np.eye(n),
            )

    def test_rejects_subdiagonal_blocks(self):
        t = np.array([[1.0, 0.5], [0.3, 2.0]])
        with pytest.raises(ValueError, match="quasi-triangular"):
            SchurFactors(w=np.eye(2), v=np.eye(2), t_a=t, t_b=np.eye(2))

    def test_consistency_check(self, rng):
        factors = random_triangular_factors(4, rng)
        a, b = factors.reconstruct()
        assert factors.consistent_with(a, b)
        assert not factors.consistent_with(a + 0.1, b)


class TestSolveTriangular:
    def test_identity_factors(self, rng):
        c = rng.standard_normal((3, 3))
        factors = SchurFactors(w=np.eye(3), v=np.eye(3), t_a=np.eye(3), t_b=np.zeros((3, 3)))
        assert_allclose(solve_triangular(factors, c), c, atol=1e-14)

    def test_scalar_both_signs(self):
        factors = SchurFactors(
            w=np.eye(1), v=np.eye(1), t_a=np.array([[3.0]]), t_b=np.array([[2.0]])
        )
        c = np.array([[10.0]])
        assert solve_triangular(factors, c, sign=1)[0, 0] == pytest.approx(2.0)
        assert solve_triangular(factors, c, sign=-1)[0, 0] == pytest.approx(10.0)

    def test_agrees_with_dense_path(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 9))
            factors = random_triangular_factors(n, rng)
            a, b = factors.reconstruct()
            c = rng.standard_normal((n, n))
            sign = 1 if rng.uniform() < 0.5 else -1
            x_fast = solve_triangular(factors, c, sign)
            problem = ProblemTriple(a=a, b=b, c=c, sign=sign)
            x_dense = solve(build_handle(problem))
            rel = np.linalg.norm(x_fast - x_dense, "fro") / np.linalg.norm(x_dense, "fro")
            assert rel <= 1e-10

    def test_diagonal_divisor_violation(self):
        factors = SchurFactors(
            w=np.eye(2), v=np.eye(2), t_a=np.diag([1.0, 2.0]), t_b=np.diag([-1.0, 3.0])
        )
        with pytest.raises(NotUniquelySolvableError, match="diagonal divisor"):
            solve_triangular(factors, np.eye(2), sign=1)

    def test_pair_determinant_violation(self):
        factors = SchurFactors(
            w=np.eye(2), v=np.eye(2), t_a=np.diag([1.0, 2.0]), t_b=np.diag([2.0, 1.0])
        )
        with pytest.raises(NotUniquelySolvableError, match="determinant"):
            solve_triangular(factors, np.eye(2), sign=1)


class TestDirectionalDerivative:
    def test_same_rhs_returns_solution(self, rng):
        problem = random_triple(3, rng)
        handle = build_handle(problem)
        x = solve(handle)
        y = directional_derivative(handle, x, np.zeros((3, 3)), np.zeros((3, 3)), problem.c)
        assert_allclose(y, x, atol=1e-10)

    def test_zero_direction(self, rng):
        problem = random_triple(3, rng)
        handle = build_handle(problem)
        x = solve(handle)
        zero = np.zeros((3, 3))
        assert_allclose(directional_derivative(handle, x, zero, zero, zero), zero)

    def test_superposition(self, rng):
        problem = random_triple(3, rng)
        handle = build_handle(problem)
        x = solve(handle)
        d1 = [rng.standard_normal((3, 3)) for _ in range(3)]
        d2 = [rng.standard_normal((3, 3)) for _ in range(3)]
        alpha, beta = 0.7, -1.3
        combo = [alpha * m1 + beta * m2 for m1, m2 in zip(d1, d2)]
        y = directional_derivative(handle, x, *combo)
        y_split = alpha * directional_derivative(handle, x, *d1) + beta * directional_derivative(
            handle, x, *d2
        )
        assert_allclose(y, y_split, atol=1e-12)

    @pytest.mark.parametrize("sign", [1, -1])
    def test_finite_difference_convergence(self, rng, sign):
        problem = random_triple(3, rng, sign)
        handle = build_handle(problem)
        x = solve(handle)
        e, f, g = (rng.standard_normal((3, 3)) for _ in range(3))
        y = directional_derivative(handle, x, e, f, g)

        def fd(h):
            moved = ProblemTriple(
                a=problem.a + h * e, b=problem.b + h * f, c=problem.c + h * g, sign=sign
            )
            return np.linalg.norm((solve(build_handle(moved)) - x) / h - y, "fro")

        ratio = fd(1e-4) / fd(5e-5)
        assert 1.5 <= ratio <= 2.5


class TestLemma1Consistency:
    def test_diagonal_grid_n2(self):
        entries = (-1.0, 0.0, 1.0, 2.0)
        for a1 in entries:
            for a2 in entries:
                for b1 in entries:
                    for b2 in entries:
                        a = np.diag([a1, a2])
                        b = np.diag([b1, b2])
                        predicate = (
                            a1 + b1 != 0 and a2 + b2 != 0 and a1 * a2 - b1 * b2 != 0
                        )
                        p = build_operator(a, b, 1)
                        singular = np.linalg.svd(p, compute_uv=False)[-1] < 1e-8
                        assert singular == (not predicate), (a1, a2, b1, b2)
