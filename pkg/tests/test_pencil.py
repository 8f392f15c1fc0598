"""Pencil canonical forms and the rank formula."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tensorcert import bounds as b, linalg, pencil as pc, tensorcore as tc
from tensorcert.exactfield import FieldSpec, Poly, format_poly

Q = FieldSpec.rationals()
F2 = FieldSpec.prime(2)
F3 = FieldSpec.prime(3)
F5 = FieldSpec.prime(5)


def xpoly(coeffs, field):
    return Poly(coeffs, field, "x")


def pencil_of(K1, K2, field):
    return tc.Tensor._wrap(np.stack([field.asarray(K1), field.asarray(K2)]), field)


@pytest.mark.parametrize("field", [Q, F2, F5])
def test_w3_canonical_form(field):
    cf, change = pc.kronecker_canonical_form(tc.w_tensor(3, field), basis_change=True)
    assert (cf.zero_rows, cf.zero_cols, cf.eps_indices, cf.eta_indices) == (0, 0, [], [])
    assert [format_poly(p) for p in cf.invariant_factors] == ["1*x^2"]
    assert cf.ell == 2
    assert pc.m_of_F(cf.invariant_factors) == 1
    assert pc.pencil_rank(cf) == 3
    assert change.apply(tc.w_tensor(3, field)) == cf.assemble()


@pytest.mark.parametrize("eps", [1, 2, 3])
def test_l_and_n_blocks(eps):
    cf, _ = pc.kronecker_canonical_form(pc.l_block(eps))
    assert cf.eps_indices == [eps] and cf.eta_indices == [] and cf.ell == 0
    assert pc.pencil_rank(cf) == eps + 1
    cf, _ = pc.kronecker_canonical_form(pc.n_block(eps))
    assert cf.eta_indices == [eps] and cf.eps_indices == []
    assert pc.pencil_rank(cf) == eps + 1


def test_l2_already_canonical():
    t = pc.l_block(2)
    cf, change = pc.kronecker_canonical_form(t, basis_change=True)
    assert cf.assemble() == t
    assert change.apply(t) == t


def test_regular_examples_over_q():
    # distinct eigenvalues 1, 2, 3
    t = pencil_of(np.eye(3, dtype=int).tolist(), [[1, 0, 0], [0, 2, 0], [0, 0, 3]], Q)
    assert pc.pencil_rank_of_tensor(t) == 3
    J = [[0, 1], [0, 0]]
    Z = [[0, 0], [0, 0]]

    def blockdiag(A, B):
        return np.block([[np.array(A), np.array(Z)], [np.array(Z), np.array(B)]]).tolist()

    I4 = np.eye(4, dtype=int).tolist()
    # two blocks J_2(0): m(F) = 2
    cf, _ = pc.kronecker_canonical_form(pencil_of(I4, blockdiag(J, J), Q))
    assert [format_poly(p) for p in cf.invariant_factors] == ["1*x^2", "1*x^2"]
    assert pc.pencil_rank(cf) == 4 + 2
    # J_2(0) and J_2(1): different eigenvalues, m(F) = 1
    cf, _ = pc.kronecker_canonical_form(pencil_of(I4, blockdiag(J, [[1, 1], [0, 1]]), Q))
    assert pc.m_of_F(cf.invariant_factors) == 1
    assert pc.pencil_rank(cf) == 5


def test_m_of_f_examples():
    x = xpoly([0, 1], Q)
    one = xpoly([1], Q)
    assert pc.m_of_F([x * x]) == 1
    assert pc.m_of_F([x, x]) == 0
    a, c = x - one, x - one - one
    assert pc.m_of_F([a, a * a * c * c]) == 1
    assert pc.m_of_F([a * a, a * a * c * c]) == 2


def test_delta_examples():
    assert pc.delta_of_B([xpoly([0, 0, 1], F2)]) == 1
    assert pc.delta_of_B([xpoly([0, 1], F3) * xpoly([-1, 1], F3)]) == 0
    assert pc.delta_of_B([xpoly([1, 1, 1], F2)]) == 1
    # a single infinite eigenvalue of multiplicity one is a linear form
    assert pc.delta_of_B([], [1]) == 0
    assert pc.delta_of_B([], [2]) == 1


def test_smith_frozen_against_cas():
    # expected diagonals from an independent CAS computation
    x = xpoly([0, 1], Q)
    one = xpoly([1], Q)
    zero = xpoly([], Q)
    M = [[x, one, zero], [zero, x, zero], [zero, zero, x - one]]
    # x^3 - x^2
    assert [format_poly(p) for p in pc.smith_invariant_factors(M, Q)] == ["1", "1", "-1*x^2 + 1*x^3"]
    M2 = [[x * x, x, zero], [zero, x, one], [x, zero, x]]
    # 1, x, x^3 + x
    assert [format_poly(p) for p in pc.smith_invariant_factors(M2, Q)] == ["1", "1*x", "1*x + 1*x^3"]


def test_smith_fast_path_matches_generic():
    rng = np.random.default_rng(5)
    for _ in range(40):
        K1, K2 = F5.random_array(rng, (3, 3)), F5.random_array(rng, (3, 3))
        fast = pc._pencil_smith(F5, K1, K2)
        slow = pc.smith_invariant_factors(pc.linear_pencil(F5, K1, K2), F5)
        assert fast == slow


def test_small_field_refusal_and_counterexample():
    # regular part with the irreducible cubic x^3 + x + 1 over F_2
    C = pc.companion(xpoly([1, 1, 0, 1], F2))
    t = pencil_of(np.eye(3, dtype=int).tolist(), C, F2)
    cf, _ = pc.kronecker_canonical_form(t)
    assert pc.formula_block_size(cf) == 3
    with pytest.raises(pc.FormulaNotApplicable):
        pc.pencil_rank(cf)
    # evaluated anyway the formula gives 4, but the rank is 5
    assert pc.pencil_rank(cf, allow_small_field=True) == 4
    assert b.gf2_rank_table((2, 3, 3))[b.gf2_code(t)] == 5
    assert b.brute_force_rank(t, 5) == 5


def test_no_regular_point_over_f2():
    # det vanishes at all three points of P^1(F_2): divisor x y (x + y)
    t = pencil_of([[1, 0, 0], [0, 1, 0], [0, 0, 0]], [[0, 0, 0], [0, 1, 0], [0, 0, 1]], F2)
    cf, change = pc.kronecker_canonical_form(t, basis_change=True)
    assert cf.infinite_indices == [1]
    assert change.apply(t) == cf.assemble()
    with pytest.raises(pc.FormulaNotApplicable):
        pc.pencil_rank(cf)
    assert pc.pencil_rank(cf, allow_small_field=True) == 3 == b.brute_force_rank(t, 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([Q, F3, F5]))
def test_invariants_under_basis_change(seed, field):
    rng = np.random.default_rng(seed)
    t = pc.random_pencil(field, rng, 3, 3)
    cf, change = pc.kronecker_canonical_form(t, basis_change=True, seed=seed % 1000)
    assert change.apply(t) == cf.assemble()
    assert pc.formula_block_size(cf) <= max(t.dims[1], t.dims[2])

    def rand_inv(n):
        while True:
            M = field.random_array(rng, (n, n))
            if linalg.is_invertible(field, M):
                return M

    B = rand_inv(t.dims[1])
    C = rand_inv(t.dims[2])
    moved = pc.BasisChange(field.eye(2), B, C).apply(t)
    cf2, _ = pc.kronecker_canonical_form(moved)
    assert (cf2.zero_rows, cf2.zero_cols, cf2.eps_indices, cf2.eta_indices) == (
        cf.zero_rows, cf.zero_cols, cf.eps_indices, cf.eta_indices)
    assert cf2.invariant_factors == cf.invariant_factors
    assert cf2.infinite_indices == cf.infinite_indices


def test_multiplicativity_examples():
    rep = pc.pencil_multiplicativity_check(tc.w_tensor(3, Q), r=2)
    assert (rep.rank_t, rep.rank_product, rep.holds, rep.blocks_match) == (3, 6, True, True)
    rep = pc.pencil_multiplicativity_check(pc.l_block(1), r=3)
    assert (rep.rank_t, rep.rank_product) == (2, 6)
    rep = pc.pencil_multiplicativity_check(tc.w_tensor(3, F5), r=1)
    assert rep.rank_product == rep.rank_t == 3


def test_json_shape():
    cf, _ = pc.kronecker_canonical_form(tc.w_tensor(3, Q), basis_change=True)
    js = cf.to_json()
    assert js["zero"] == [0, 0] and js["eps"] == [] and js["eta"] == []
    assert js["invariant_factors"] == ["1*x^2"]
    assert set(js["basis_change"]) == {"A", "B", "C"}
