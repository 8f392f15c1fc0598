"""Exact elimination; expected values frozen from an independent CAS run."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tensorcert import linalg
from tensorcert.exactfield import DivisionByZeroError, FieldSpec

Q = FieldSpec.rationals()
F7 = FieldSpec.prime(7)


def test_rank_frozen():
    assert linalg.rank(Q, Q.asarray([[1, 2, 3], [4, 5, 6], [7, 8, 10]])) == 3
    assert linalg.rank(Q, Q.asarray([[1, 2, 3], [2, 4, 6], [1, 1, 1]])) == 2
    # det = -3 vanishes mod 3 only
    M = [[1, 2, 3], [4, 5, 6], [7, 8, 10]]
    assert linalg.rank(FieldSpec.prime(3), FieldSpec.prime(3).asarray(M)) == 2
    assert linalg.rank(F7, F7.asarray(M)) == 3


def test_nullspace_frozen():
    N = linalg.nullspace(Q, Q.asarray([[1, 2, 3], [2, 4, 6], [1, 1, 1]]))
    assert N.shape == (3, 1)
    v = N[:, 0] / N[0, 0]
    assert list(v) == [1, -2, 1]


def test_inverse_and_solve():
    A = Q.asarray([[2, 1], [1, 1]])
    Ai = linalg.inverse(Q, A)
    assert Q.array_equal(Q.matmul(A, Ai), Q.eye(2))
    x = linalg.solve(Q, A, Q.asarray([3, 2]))
    assert list(x.reshape(-1)) == [1, 1]
    assert linalg.solve(Q, Q.asarray([[1, 1], [1, 1]]), Q.asarray([1, 2])) is None
    with pytest.raises((DivisionByZeroError, ValueError, ArithmeticError)):
        linalg.inverse(Q, Q.asarray([[1, 1], [1, 1]]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_rank_nullity_mod_p(n, m, seed):
    rng = np.random.default_rng(seed)
    M = F7.random_array(rng, (n, m))
    N = linalg.nullspace(F7, M)
    assert linalg.rank(F7, M) + N.shape[1] == m
    assert not np.any(F7.matmul(M, N)) if N.size else True


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_rank_rational_matches_product_structure(n, seed):
    # rank(A B) with A n x 1, B 1 x n is 1 unless one factor is zero
    rng = np.random.default_rng(seed)
    a = Q.random_array(rng, (n, 1))
    b = Q.random_array(rng, (1, n))
    expected = 0 if not np.any(a) or not np.any(b) else 1
    assert linalg.rank(Q, Q.matmul(a, b)) == expected


def test_rref_fractions():
    R, piv = linalg.rref(Q, Q.asarray([[2, 4], [1, 3]]))
    assert piv == [0, 1]
    assert Q.array_equal(R, Q.eye(2))
    R, piv = linalg.rref(Q, Q.asarray([[3, 1]]))
    assert R[0, 1] == Fraction(1, 3)
