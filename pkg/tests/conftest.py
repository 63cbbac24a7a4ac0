import numpy as np
import pytest

from tsylvester import ProblemTriple, random_orthogonal


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)


def random_triple(n, rng, sign=1):
    """Random Gaussian coefficient triple (uniquely solvable almost surely)."""
    return ProblemTriple(
        a=rng.standard_normal((n, n)),
        b=rng.standard_normal((n, n)),
        c=rng.standard_normal((n, n)),
        sign=sign,
    )


def random_triangular_factors(n, rng):
    """Well-separated triangular factors: diag(T_A) in [1,2], diag(T_B) in [3,4].

    The pair determinants t_a[i,i]*t_a[j,j] - t_b[i,i]*t_b[j,j] then lie in
    [-15, -5] and the diagonal divisors in [4, 6], safely away from zero.
    """
    from tsylvester import SchurFactors

    t_a = np.triu(rng.standard_normal((n, n)))
    np.fill_diagonal(t_a, rng.uniform(1.0, 2.0, n))
    t_b = np.triu(rng.standard_normal((n, n)))
    np.fill_diagonal(t_b, rng.uniform(3.0, 4.0, n))
    w = random_orthogonal(n, rng)
    v = random_orthogonal(n, rng)
    return SchurFactors(w=w, v=v, t_a=t_a, t_b=t_b)
