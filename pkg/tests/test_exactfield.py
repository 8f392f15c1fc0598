"""Scalars, eps-polynomials and the text formats."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tensorcert.exactfield import (
    DivisionByZeroError,
    FieldError,
    FieldMismatchError,
    FieldSpec,
    Poly,
    QuadraticNumber,
    format_poly,
    is_squarefree,
    parse_poly,
    poly_gcd,
    poly_mul,
    poly_powmod,
    poly_truncate,
    poly_valuation,
)

Q = FieldSpec.rationals()
F5 = FieldSpec.prime(5)
F7 = FieldSpec.prime(7)
QS2 = FieldSpec.quadratic(2)

small = st.integers(-20, 20)


def _elt(field, a, b, c):
    if field.kind == "quadratic":
        return field.element(QuadraticNumber(Fraction(a, c), Fraction(b, c), field.D))
    return field.element(Fraction(a, c)) if field.kind == "rationals" else field.element(a)


fields = st.sampled_from([Q, F5, F7, FieldSpec.prime(2), QS2, FieldSpec.quadratic(-3)])


@settings(max_examples=150, deadline=None)
@given(fields, small, small, small, small, small, small, st.integers(1, 6), st.integers(1, 6))
def test_field_axioms(f, a1, b1, a2, b2, a3, b3, c1, c2):
    x, y, z = _elt(f, a1, b1, c1), _elt(f, a2, b2, c2), _elt(f, a3, b3, 1)
    assert f.add(x, y) == f.add(y, x)
    assert f.mul(x, y) == f.mul(y, x)
    assert f.mul(x, f.add(y, z)) == f.add(f.mul(x, y), f.mul(x, z))
    assert f.add(f.add(x, y), z) == f.add(x, f.add(y, z))
    assert f.sub(x, x) == f.zero()
    if x != f.zero():
        assert f.mul(x, f.inv(x)) == f.one()


@settings(max_examples=100, deadline=None)
@given(fields, small, small, st.integers(1, 6))
def test_format_parse_round_trip(f, a, b, c):
    x = _elt(f, a, b, c)
    assert f.parse(f.format(x)) == x


def test_inverse_of_zero_raises():
    for f in (Q, F5, QS2):
        with pytest.raises(DivisionByZeroError):
            f.inv(f.zero())


def test_scalar_text_formats():
    assert Q.format(Fraction(-3, 4)) == "-3/4"
    assert Q.format(Fraction(6, 3)) == "2"
    assert F5.format(F5.element(-1)) == "4"
    assert QS2.parse("1/2+3*sqrt(2)") == QuadraticNumber(Fraction(1, 2), 3, 2)


def test_field_strings():
    assert FieldSpec.from_string("q") == Q
    assert FieldSpec.from_string("fp:7") == F7
    assert FieldSpec.from_string("qsqrt:2") == QS2
    for bad in ("fp:6", "qsqrt:4", "gf(8)"):
        with pytest.raises(FieldError):
            FieldSpec.from_string(bad)
    for f in (Q, F7, QS2):
        assert FieldSpec.from_json(f.to_json()) == f


def test_sqrt():
    assert F7.sqrt(F7.element(2)) in (3, 4)
    assert F5.sqrt(F5.element(2)) is None
    assert QS2.sqrt(QS2.element(2)) == QuadraticNumber(0, 1, 2)
    assert Q.sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert Q.sqrt(Fraction(2)) is None


def test_eps_poly_product_over_f5():
    # (2 + 3 eps)(4 + eps) = 8 + 14 eps + 3 eps^2 = 3 + 4 eps + 3 eps^2 mod 5
    a = Poly([2, 3], F5)
    b = Poly([4, 1], F5)
    assert poly_mul(a, b) == Poly([3, 4, 3], F5)
    assert format_poly(poly_mul(a, b)) == "3 + 4*eps + 3*eps^2"


def test_poly_text_round_trip_and_valuation():
    p = parse_poly("1/2*eps^2 + -3*eps^5", Q)
    assert p.valuation == 2 and p.degree == 5
    assert parse_poly(format_poly(p), Q) == p
    assert poly_valuation(Poly.zero(Q)) == float("inf")
    assert poly_truncate(p, 4) == Poly([0, 0, Fraction(1, 2)], Q)
    assert Poly.zero(Q).degree == float("-inf")


def test_poly_field_mismatch():
    with pytest.raises(FieldMismatchError):
        Poly([1], F5) + Poly([1], F7)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=6), st.lists(st.integers(0, 6), min_size=1, max_size=5))
def test_division_identity_f7(a, b):
    A, B = Poly(a, F7), Poly(b, F7)
    if B.is_zero():
        return
    q, r = A.divmod(B)
    assert q * B + r == A
    assert r.is_zero() or r.degree < B.degree


def test_gcd_squarefree_powmod():
    x = Poly.monomial(1, F5, var="x")
    one = Poly.constant(1, F5, var="x")
    f = (x - one) * (x - one) * (x + one)
    assert poly_gcd(f, f.derivative()) == (x - one)
    assert not is_squarefree(f)
    assert is_squarefree(x * (x + one))
    m = x * x * x + x + one
    x7 = x * x * x * x * x * x * x
    assert poly_powmod(x, 7, m) == x7 % m


def test_arrays_prime_dtype_and_matmul():
    A = F5.asarray([[1, 2], [3, 4]])
    assert A.dtype == np.int64
    assert F5.array_equal(F5.matmul(A, A), F5.asarray([[7, 10], [15, 22]]))
    B = Q.asarray([[Fraction(1, 2), 0], [0, 3]])
    assert Q.matmul(B, B)[0, 0] == Fraction(1, 4)
