"""Rank bounds.  Frozen F_2 rank distributions come from an independent
bitmask breadth-first enumeration of sums of simple tensors."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tensorcert import bounds as b, tensorcore as tc
from tensorcert.exactfield import FieldError, FieldSpec

Q = FieldSpec.rationals()
F2 = FieldSpec.prime(2)
F3 = FieldSpec.prime(3)
F5 = FieldSpec.prime(5)

GF2_DISTRIBUTIONS = {
    (2, 2, 2): [1, 27, 162, 66],
    (2, 2, 3): [1, 63, 1050, 2982],
    (2, 3, 3): [1, 147, 6762, 95466, 151704, 8064],
}


@pytest.mark.parametrize("dims", sorted(GF2_DISTRIBUTIONS))
def test_gf2_rank_distribution(dims):
    tab = b.gf2_rank_table(dims)
    assert list(np.bincount(tab)) == GF2_DISTRIBUTIONS[dims]


def test_brute_force_agrees_with_table_on_all_222():
    tab = b.gf2_rank_table((2, 2, 2))
    for code in range(256):
        bits = (code >> np.arange(8)) & 1
        t = tc.Tensor._wrap(bits.reshape(2, 2, 2).astype(np.int64), F2)
        assert b.gf2_code(t) == code
        assert b.brute_force_rank(t, 3) == tab[code]


def test_brute_force_named():
    for f in (F2, F3, F5):
        assert b.brute_force_rank(tc.w_tensor(3, f), 4) == 3
        assert b.brute_force_rank(tc.unit_tensor(3, 3, f), 4) == 3
    assert b.brute_force_rank(tc.w_tensor(3, F3), 2) is None
    assert b.brute_force_rank(tc.Tensor.zeros((2, 2, 2), F3), 2) == 0
    with pytest.raises(b.BudgetExceeded):
        b.brute_force_rank(tc.matmul_tensor(2, 2, 2, F2), 7)
    with pytest.raises(FieldError):
        b.brute_force_rank(tc.w_tensor(3, Q), 3)


@pytest.mark.parametrize(
    "tensor,expected",
    [
        (tc.w_tensor(3), 2),
        (tc.unit_tensor(3, 3), 3),
        (tc.matmul_tensor(2, 2, 2), 4),
        (tc.matmul_tensor(2, 2, 4), 8),
        (tc.strassen_tensor(3), 4),
        (tc.chi_tensor(2, 3), 3),
    ],
)
def test_flattening_frozen(tensor, expected):
    assert b.flattening_lower_bound(tensor) == expected


def test_substitution():
    assert b.substitution_lower_bound(tc.w_tensor(3, F5)).value == 3
    assert b.substitution_lower_bound(tc.unit_tensor(3, 3, F3)).value == 3
    res = b.substitution_lower_bound(tc.w_tensor(3, F5), max_nodes=0)
    assert res.method == "fallback" and res.value == 2
    with pytest.raises(FieldError):
        b.substitution_lower_bound(tc.w_tensor(3, Q))


def test_substitution_never_exceeds_table_rank():
    tab = b.gf2_rank_table((2, 2, 3))
    rng = np.random.default_rng(3)
    for code in rng.integers(0, 1 << 12, size=150):
        bits = (int(code) >> np.arange(12)) & 1
        t = tc.Tensor._wrap(bits.reshape(2, 2, 3).astype(np.int64), F2)
        lo = b.substitution_lower_bound(t).value
        assert b.flattening_lower_bound(t) <= lo <= tab[code]


def test_generalized_flattening_explicit_matches_grouping():
    t = tc.w_tensor(3, Q)
    G = b.FlatteningMap.grouping(t.dims, [0])
    E = b.FlatteningMap.explicit(t.dims, G.out_shape, G.as_matrix(Q), 1, Q)
    assert b.generalized_flattening_bound(t, G) == b.generalized_flattening_bound(t, E) == 2
    half = b.FlatteningMap.explicit(t.dims, G.out_shape, G.as_matrix(Q), 2, Q)
    assert b.generalized_flattening_bound(t, half) == Fraction(1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_product_flattening_multiplicative(seed):
    rng = np.random.default_rng(seed)
    d1 = tuple(int(x) for x in rng.integers(1, 4, size=3))
    d2 = tuple(int(x) for x in rng.integers(1, 4, size=3))
    t1 = tc.random_tensor(d1, Q, rng)
    t2 = tc.random_tensor(d2, Q, rng)
    F1 = b.FlatteningMap.grouping(d1, [int(rng.integers(0, 3))])
    F2_ = b.FlatteningMap.grouping(d2, [int(rng.integers(0, 3))])
    pb = b.flattening_product_bound(t1, F1, t2, F2_)
    assert pb.multiplicative


def test_certify_rank():
    rep = b.certify_rank(tc.w_tensor(3, F5), tc.w_decomposition(3, F5), ("flattening",))
    assert (rep.lower_int, rep.upper, rep.determined) == (2, 3, False)
    rep = b.certify_rank(tc.w_tensor(3, F5), tc.w_decomposition(3, F5), ("flattening", "substitution"))
    assert rep.determined
    js = rep.to_json()
    assert js == {"upper": 3, "lower": "3/1", "lower_int": 3, "methods": js["methods"], "determined": True}
    rep = b.certify_rank(tc.w_tensor(3, Q), None, ("pencil",))
    assert rep.lower_int == 3 and rep.upper is None
    # exact methods over a finite field also close the bracket from above
    for methods in (("pencil",), ("brute_force",)):
        rep = b.certify_rank(tc.w_tensor(3, F2), None, methods, rmax=4)
        assert (rep.lower_int, rep.upper, rep.determined) == (3, 3, True)
    with pytest.raises(ValueError):
        b.certify_rank(tc.w_tensor(3, Q), tc.unit_decomposition(2, 3, Q))


def test_inconsistent_bounds():
    with pytest.raises(b.InconsistentBoundsError):
        b.RankBoundReport(2, Fraction(3))


def test_projective_points_count():
    for p, n in ((2, 3), (3, 2), (5, 3)):
        assert len(b.projective_points(p, n)) == (p**n - 1) // (p - 1)
