"""Restrictions, degenerations, interpolation and the named certificates."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tensorcert import tensorcore as tc, transform as tr
from tensorcert.exactfield import FieldError, FieldSpec

from oracles import expansion_as_dict, naive_expansion

Q = FieldSpec.rationals()
F2 = FieldSpec.prime(2)
F5 = FieldSpec.prime(5)
F7 = FieldSpec.prime(7)
QS2 = FieldSpec.quadratic(2)


@pytest.mark.parametrize("k", [3, 4, 5])
@pytest.mark.parametrize("field", [Q, F2, F5])
def test_w_certificate(k, field):
    g = tr.w_certificate(k, field)
    rep = tr.verify(g)
    assert rep.ok and (rep.d, rep.e) == (1, k - 1)
    assert tr.apply_degeneration(g).leading == tc.w_tensor(k, field)


@pytest.mark.parametrize("q,k", [(1, 3), (2, 3), (3, 3), (2, 4), (7, 3)])
def test_strassen_certificate(q, k):
    g = tr.strassen_certificate(q, k, Q)
    rep = tr.verify(g)
    assert rep.ok and (rep.d, rep.e) == (1, 1)
    exp = tr.apply_degeneration(g)
    assert exp.leading == tc.strassen_tensor(q, k)
    assert expansion_as_dict(exp) == naive_expansion(g)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([Q, F5, F7]))
def test_expansion_matches_naive_oracle(seed, field):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 4))
    dims = tuple(int(x) for x in rng.integers(1, 3, size=k))
    g = tr.random_degeneration(field, rng, k, dims, int(rng.integers(0, 3)))
    exp = tr.apply_degeneration(g)
    assert expansion_as_dict(exp) == naive_expansion(g)
    assert tr.verify(g).ok


def test_tampered_certificate_reports_location():
    g = tr.w_certificate(3, Q)
    maps = list(g.maps)
    M = maps[0].copy()
    M[1, 1, 0] = Fraction(2)
    maps[0] = M
    bad = tr.Degeneration(tuple(maps), g.source, 1, 2, g.target)
    rep = tr.verify(bad)
    assert not rep.ok and rep.mismatch is not None
    assert rep.mismatch[0] == "2,1,1"


def test_wrong_claims_rejected():
    g = tr.w_certificate(3, Q)
    assert not tr.verify(tr.Degeneration(g.maps, g.source, 0, 2, g.target)).ok
    assert not tr.verify(tr.Degeneration(g.maps, g.source, 1, 1, g.target)).ok
    # a larger claimed error degree is still a valid (weaker) claim
    assert tr.verify(tr.Degeneration(g.maps, g.source, 1, 5, g.target)).ok


def test_restriction_basics():
    # ⟨3⟩ restricts to W-like tensors only through rank; the identity is a restriction
    t = tc.w_tensor(3, F5)
    r = tr.identity_restriction(t.dims, F5)
    assert tr.apply_restriction(r, t) == t
    dec = tc.w_decomposition(3, F5)
    A = tc.Decomposition.factor_matrices(dec)
    R = tr.Restriction.of(A, F5)
    assert tr.verify_restriction(R, tc.unit_tensor(3, 3, F5), t).ok


ALPHA_SETS = {
    Q: [[1, 2, 3, 4], [-1, 2, Fraction(1, 2), 5], [3, -2, 7, Fraction(-1, 3)]],
    F5: [[1, 2, 3, 4], [4, 3, 2, 1], [2, 4, 1, 3]],
    F7: [[1, 2, 3, 4], [6, 5, 4, 3], [2, 3, 5, 6]],
}


@pytest.mark.parametrize("k", [3, 4])
@pytest.mark.parametrize("field", [Q, F5, F7])
def test_interpolation_round_trip(k, field):
    g = tr.w_certificate(k, field)
    L = k  # e + 1 points
    for alphas in ALPHA_SETS[field]:
        R = tr.interpolate_to_restriction(g, alphas[:L])
        src = tc.kronecker_product(tc.unit_tensor(2, k, field), tc.unit_tensor(L, k, field))
        assert tr.apply_restriction(R, src) == tc.w_tensor(k, field)


def test_interpolation_rejects_small_field_and_bad_points():
    with pytest.raises(FieldError):
        tr.interpolate_to_restriction(tr.w_certificate(3, F2))
    g = tr.w_certificate(3, Q)
    with pytest.raises(tr.CertificateError):
        tr.interpolate_to_restriction(g, [1, 1, 2])
    with pytest.raises(tr.CertificateError):
        tr.interpolate_to_restriction(g, [0, 1, 2])


def test_lagrange_weights_solve_vandermonde():
    alphas = [Fraction(1), Fraction(2), Fraction(-3)]
    betas = tr.lagrange_weights(Q, alphas)
    # Lagrange basis at 0: Σ β_j α_j^m = [m == 0] for m < L
    for m in range(3):
        s = sum(b * a**m for a, b in zip(alphas, betas))
        assert s == (1 if m == 0 else 0)


@pytest.mark.parametrize("k,n,expected", [(3, 2, 20), (3, 1, 6), (4, 2, 28)])
def test_power_decomposition_w(k, n, expected):
    g = tr.w_certificate(k, Q)
    dec = tr.power_decomposition(g, n)
    assert len(dec) <= tr.power_bound(2, k - 1, n) == expected
    assert tc.eval_decomposition(dec) == tc.tensor_power(tc.w_tensor(k), n)


def test_power_decomposition_strassen_small():
    f = FieldSpec.prime(101)
    g = tr.strassen_certificate(2, 3, f)
    dec = tr.power_decomposition(g, 2)
    assert len(dec) <= tr.power_bound(3, 1, 2) == 27
    assert tc.eval_decomposition(dec) == tc.tensor_power(tc.strassen_tensor(2, 3, f), 2)


def test_truncation_property_seeded():
    rng = np.random.default_rng(11)
    for _ in range(30):
        k = int(rng.integers(2, 4))
        g = tr.random_degeneration(F5, rng, k, (2,) * k, 3)
        exp = tr.apply_degeneration(g)
        h = tr.truncate_degeneration(g)
        hexp = tr.apply_degeneration(h)
        assert hexp.d == exp.d and hexp.leading == exp.leading
        assert hexp.e <= (k - 1) * exp.d
        assert h.max_entry_degree <= exp.d
        # idempotent
        assert all(np.array_equal(a, b) for a, b in zip(tr.truncate_degeneration(h).maps, h.maps))


def test_chi_restriction_over_f2():
    g = tr.truncate_degeneration(tr.w_certificate(3, F2))
    R = tr.chi_restriction(g)
    assert tr.apply_restriction(R, tr.chi_source(g, 1)) == tc.w_tensor(3, F2)
    assert tr.chi_rank_bound(1, 3) == 3


def test_chi_restriction_kronecker_square_over_f2():
    w = tr.w_certificate(3, F2)
    g = tr.truncate_degeneration(tr.degeneration_product(w, w, "kronecker"))
    assert tr.verify(g).d == 2
    R = tr.chi_restriction(g)
    assert tr.apply_restriction(R, tr.chi_source(g, 2)) == tc.kronecker_product(tc.w_tensor(3, F2), tc.w_tensor(3, F2))
    assert tr.chi_rank_bound(2, 3) == math.comb(4, 2)


def test_chi_restriction_requires_truncation():
    g = tr.w_certificate(3, Q)
    M = Q.zeros((4, 2, 2))
    M[:2] = g.maps[0]
    M[3, 0, 0] = Q.one()  # an eps^3 entry leaves the eps^1 coefficient alone
    high = tr.Degeneration((M,) + g.maps[1:], g.source, 1, 10, g.target)
    assert tr.verify(high).ok
    with pytest.raises(tr.CertificateError):
        tr.chi_restriction(high)
    R = tr.chi_restriction(tr.truncate_degeneration(high))
    assert tr.apply_restriction(R, tr.chi_source(g, 1)) == tc.w_tensor(3)


def test_w3_squared_decomposition():
    for f in (QS2, F7):
        dec = tr.w3_squared_decomposition(f)
        w = tc.w_tensor(3, f)
        assert len(dec) == 8 < 9
        assert tc.eval_decomposition(dec) == tc.tensor_product(w, w)
    with pytest.raises(FieldError):
        tr.w3_squared_decomposition(F5)  # 2 is not a square mod 5
    with pytest.raises(FieldError):
        tr.two_term_w3plus(1, F2)


def test_two_term_identity():
    dec = tr.two_term_w3plus(1, Q)
    z = tc.Tensor.from_entries((2, 2, 2), [((2, 2, 2), 1)])
    assert tc.eval_decomposition(dec) == tc.w_tensor(3) + z


def test_certificate_json_round_trip():
    for cert in (tr.w_certificate(3, F5), tr.strassen_certificate(2, 3, Q)):
        back = tr.certificate_from_json(cert.to_json())
        assert tr.verify(back, cert.target).ok
        assert all(np.array_equal(a, b) for a, b in zip(back.maps, cert.maps))
    R = tr.interpolate_to_restriction(tr.w_certificate(3, Q))
    back = tr.certificate_from_json(R.to_json())
    assert back.maps[0].shape == R.maps[0].shape
    dec = tr.w3_squared_decomposition(QS2)
    back = tr.certificate_from_json(tr.certificate_to_json(dec))
    assert tc.eval_decomposition(back) == tc.eval_decomposition(dec)


def test_certificate_json_malformed():
    obj = tr.w_certificate(3, Q).to_json()
    obj["target_dims"] = [2, 2]
    with pytest.raises(ValueError):
        tr.certificate_from_json(obj)
    with pytest.raises(KeyError):
        tr.certificate_from_json({"field": {"kind": "rationals"}})


def test_degeneration_product_degrees_add():
    a = tr.w_certificate(3, Q)
    b = tr.strassen_certificate(1, 3, Q)
    for mode in ("tensor", "kronecker"):
        g = tr.degeneration_product(a, b, mode)
        rep = tr.verify(g)
        assert rep.ok and rep.d == 2 and rep.e <= 3
