"""Exact scalars and univariate polynomials.

Three kinds of ground field are supported: the rationals, prime fields
``F_p`` and quadratic extensions ``Q(sqrt(D))``.  Scalars are plain Python
objects (``Fraction``, ``int`` residues, :class:`QuadraticNumber`) so that
numpy object arrays can hold them; prime-field arrays use ``int64`` with
explicit reduction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

INT64_LIMIT = 2**62


class FieldError(ArithmeticError):
    """Base class for field arithmetic failures."""


class FieldMismatchError(FieldError):
    pass


class DivisionByZeroError(FieldError, ZeroDivisionError):
    pass


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def _is_squarefree(n: int) -> bool:
    n = abs(n)
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    num, den = x.numerator, x.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def _format_fraction(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


_RATIONAL = r"[+-]?\d+(?:/\d+)?"
_RATIONAL_RE = re.compile(rf"^\s*({_RATIONAL})\s*$")
_QUAD_RE = re.compile(
    rf"^\s*(?:({_RATIONAL})\s*)?([+-])?\s*(\d+(?:/\d+)?)?\s*\*?\s*sqrt\(\s*(-?\d+)\s*\)\s*$"
)


class QuadraticNumber:
    """Element ``a + b*sqrt(D)`` of ``Q(sqrt(D))`` with rational ``a, b``."""

    __slots__ = ("a", "b", "D")

    def __init__(self, a, b, D: int):
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))
        object.__setattr__(self, "D", int(D))

    def __setattr__(self, name, value):
        raise AttributeError("QuadraticNumber is immutable")

    def _coerce(self, other):
        if isinstance(other, QuadraticNumber):
            if other.D != self.D:
                raise FieldMismatchError(f"sqrt({self.D}) vs sqrt({other.D})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticNumber(other, 0, self.D)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadraticNumber(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.D)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadraticNumber(self.a - o.a, self.b - o.b, self.D)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadraticNumber(
            self.a * o.a + self.D * self.b * o.b, self.a * o.b + self.b * o.a, self.D
        )

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.a * self.a - self.D * self.b * self.b

    def conjugate(self) -> "QuadraticNumber":
        return QuadraticNumber(self.a, -self.b, self.D)

    def inverse(self) -> "QuadraticNumber":
        n = self.norm()
        if n == 0:
            raise DivisionByZeroError("inverse of zero in Q(sqrt(D))")
        return QuadraticNumber(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadraticNumber(1, 0, self.D)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, QuadraticNumber):
            return self.D == other.D and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.D))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __str__(self):
        sign = "-" if self.b < 0 else "+"
        return f"{_format_fraction(self.a)}{sign}{_format_fraction(abs(self.b))}*sqrt({self.D})"

    def __repr__(self):
        return f"QuadraticNumber({self})"


@dataclass(frozen=True)
class FieldSpec:
    """Ground field descriptor.

    ``kind`` is one of ``"rationals"``, ``"prime"`` or ``"quadratic"``.  Use the
    :meth:`rationals`, :meth:`prime` and :meth:`quadratic` constructors, which
    validate ``p`` and ``D``.
    """

    kind: str
    p: int | None = None
    D: int | None = None

    def __post_init__(self):
        if self.kind == "prime":
            if self.p is None or not _is_prime(self.p):
                raise FieldError(f"modulus {self.p!r} is not prime")
            if self.p >= 2**31:
                raise FieldError("prime moduli must be below 2^31")
        elif self.kind == "quadratic":
            D = self.D
            if D is None or D in (0, 1):
                raise FieldError(f"invalid quadratic discriminant {D!r}")
            if not _is_squarefree(D):
                raise FieldError(f"D={D} is not square-free")
            if D > 0 and math.isqrt(D) ** 2 == D:
                raise FieldError(f"D={D} is a perfect square")
        elif self.kind != "rationals":
            raise FieldError(f"unknown field kind {self.kind!r}")

    # -- constructors -----------------------------------------------------
    @classmethod
    def rationals(cls) -> "FieldSpec":
        return cls("rationals")

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls("prime", p=int(p))

    @classmethod
    def quadratic(cls, D: int) -> "FieldSpec":
        return cls("quadratic", D=int(D))

    @classmethod
    def from_string(cls, text: str) -> "FieldSpec":
        """Parse the CLI notation ``q``, ``fp:<p>`` or ``qsqrt:<D>``."""
        text = text.strip().lower()
        if text in ("q", "rationals", "qq"):
            return cls.rationals()
        if text.startswith("fp:"):
            return cls.prime(int(text[3:]))
        if text.startswith("qsqrt:"):
            return cls.quadratic(int(text[6:]))
        raise FieldError(f"cannot parse field {text!r}")

    def to_json(self) -> dict:
        if self.kind == "prime":
            return {"kind": "prime", "p": self.p}
        if self.kind == "quadratic":
            return {"kind": "quadratic", "D": self.D}
        return {"kind": "rationals"}

    @classmethod
    def from_json(cls, obj) -> "FieldSpec":
        if isinstance(obj, str):
            return cls.from_string(obj)
        kind = obj.get("kind")
        if kind == "prime":
            return cls.prime(obj["p"])
        if kind == "quadratic":
            return cls.quadratic(obj["D"])
        if kind == "rationals":
            return cls.rationals()
        raise FieldError(f"unknown field kind {kind!r}")

    def __str__(self):
        if self.kind == "prime":
            return f"F_{self.p}"
        if self.kind == "quadratic":
            return f"Q(sqrt({self.D}))"
        return "Q"

    # -- basic properties -------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.kind == "prime"

    @property
    def cardinality(self) -> float | int:
        return self.p if self.kind == "prime" else math.inf

    @property
    def characteristic(self) -> int:
        return self.p if self.kind == "prime" else 0

    @property
    def dtype(self):
        return np.int64 if self.kind == "prime" else object

    # -- scalars ----------------------------------------------------------
    def element(self, x):
        """Coerce ``x`` (int, Fraction, QuadraticNumber or string) into the field."""
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, np.generic):
            x = x.item()
        if self.kind == "prime":
            p = self.p
            if isinstance(x, Fraction):
                if x.denominator % p == 0:
                    raise DivisionByZeroError(f"{x} has denominator divisible by {p}")
                return x.numerator * pow(x.denominator, -1, p) % p
            if isinstance(x, QuadraticNumber):
                raise FieldMismatchError("quadratic element in a prime field")
            return int(x) % p
        if self.kind == "rationals":
            if isinstance(x, QuadraticNumber):
                if x.b != 0:
                    raise FieldMismatchError(f"{x} is not rational")
                return x.a
            return Fraction(x)
        if isinstance(x, QuadraticNumber):
            if x.D != self.D:
                raise FieldMismatchError(f"sqrt({x.D}) element in {self}")
            return x
        return QuadraticNumber(x, 0, self.D)

    def zero(self):
        return self.element(0)

    def one(self):
        return self.element(1)

    def add(self, a, b):
        if self.kind == "prime":
            return (a + b) % self.p
        return a + b

    def sub(self, a, b):
        if self.kind == "prime":
            return (a - b) % self.p
        return a - b

    def mul(self, a, b):
        if self.kind == "prime":
            return a * b % self.p
        return a * b

    def neg(self, a):
        if self.kind == "prime":
            return -a % self.p
        return -a

    def inv(self, a):
        if a == 0:
            raise DivisionByZeroError(f"division by zero in {self}")
        if self.kind == "prime":
            return pow(int(a), -1, self.p)
        if self.kind == "rationals":
            return 1 / Fraction(a)
        return self.element(a).inverse()

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def power(self, a, n: int):
        if self.kind == "prime":
            if n < 0:
                a, n = self.inv(a), -n
            return pow(int(a), n, self.p)
        return a**n

    def sqrt(self, x):
        """Square root of ``x`` inside the field, or ``None`` if there is none."""
        x = self.element(x)
        if self.kind == "prime":
            return _sqrt_mod(x, self.p)
        if self.kind == "rationals":
            return _rational_sqrt(x)
        return _quadratic_sqrt(x)

    def elements(self) -> Iterable:
        if not self.is_finite:
            raise FieldError(f"{self} is infinite")
        return range(self.p)

    # -- text format ------------------------------------------------------
    def format(self, x) -> str:
        x = self.element(x)
        if self.kind == "prime":
            return str(x)
        if self.kind == "rationals":
            return _format_fraction(x)
        return str(x)

    def parse(self, text: str):
        text = str(text).strip()
        m = _RATIONAL_RE.match(text)
        if m:
            return self.element(Fraction(m.group(1)))
        m = _QUAD_RE.match(text)
        if m and self.kind == "quadratic":
            a = Fraction(m.group(1)) if m.group(1) else Fraction(0)
            b = Fraction(m.group(3)) if m.group(3) else Fraction(1)
            if m.group(2) == "-":
                b = -b
            if int(m.group(4)) != self.D:
                raise FieldMismatchError(f"{text!r} is not in {self}")
            return QuadraticNumber(a, b, self.D)
        raise FieldError(f"cannot parse {text!r} as an element of {self}")

    # -- arrays -----------------------------------------------------------
    def asarray(self, values) -> np.ndarray:
        """Return an array of field elements (``int64`` for prime fields)."""
        if isinstance(values, np.ndarray) and values.dtype != object and self.kind == "prime":
            return np.mod(values.astype(np.int64), self.p)
        arr = np.asarray(values, dtype=object)
        if self.kind == "prime":
            flat = [self.element(v) for v in arr.ravel()]
            return np.array(flat, dtype=np.int64).reshape(arr.shape)
        out = np.empty(arr.shape, dtype=object)
        flat = out.reshape(-1)
        for i, v in enumerate(arr.ravel()):
            flat[i] = self.element(v)
        return out

    def zeros(self, shape) -> np.ndarray:
        if self.kind == "prime":
            return np.zeros(shape, dtype=np.int64)
        out = np.empty(shape, dtype=object)
        out.fill(self.zero())
        return out

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self.one()
        return out

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        if self.kind == "prime":
            return np.mod(arr, self.p)
        return arr

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Exact matrix product; prime fields fall back to Python ints on overflow risk."""
        if self.kind == "prime":
            inner = a.shape[-1] if a.ndim else 1
            if inner * (self.p - 1) ** 2 < INT64_LIMIT:
                return np.mod(a @ b, self.p)
            res = a.astype(object) @ b.astype(object)
            return np.mod(res, self.p).astype(np.int64)
        return a @ b

    def tensordot(self, a: np.ndarray, b: np.ndarray, axes) -> np.ndarray:
        if self.kind == "prime":
            ax = axes[0] if isinstance(axes[0], (list, tuple)) else [axes[0]]
            inner = int(np.prod([a.shape[i] for i in ax])) if ax else 1
            if inner * (self.p - 1) ** 2 < INT64_LIMIT:
                return np.mod(np.tensordot(a, b, axes=axes), self.p)
            res = np.tensordot(a.astype(object), b.astype(object), axes=axes)
            return np.mod(res, self.p).astype(np.int64)
        return np.tensordot(a, b, axes=axes)

    def scale(self, arr: np.ndarray, c) -> np.ndarray:
        if self.kind == "prime":
            return np.mod(arr * int(c), self.p)
        return arr * c

    def array_equal(self, a: np.ndarray, b: np.ndarray) -> bool:
        return a.shape == b.shape and bool(np.all(a == b))

    def random_array(self, rng: np.random.Generator, shape, low: int = -3, high: int = 3):
        """Random small entries; ``low``/``high`` bound the integer range for infinite fields."""
        if self.kind == "prime":
            return rng.integers(0, self.p, size=shape, dtype=np.int64)
        ints = rng.integers(low, high + 1, size=shape)
        return self.asarray(ints.astype(object))


def _sqrt_mod(a: int, p: int) -> int | None:
    a %= p
    if a == 0 or p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return min(r, p - r)


def _quadratic_sqrt(x: QuadraticNumber) -> QuadraticNumber | None:
    D = x.D
    if x.b == 0:
        r = _rational_sqrt(x.a)
        if r is not None:
            return QuadraticNumber(r, 0, D)
        r = _rational_sqrt(x.a / D)
        if r is not None:
            return QuadraticNumber(0, r, D)
        return None
    # (u + v sqrt D)^2 = a + b sqrt D  =>  u^2 = (a +- sqrt(a^2 - D b^2)) / 2
    disc = _rational_sqrt(x.a * x.a - D * x.b * x.b)
    if disc is None:
        return None
    for u2 in ((x.a + disc) / 2, (x.a - disc) / 2):
        u = _rational_sqrt(u2)
        if u:
            cand = QuadraticNumber(u, x.b / (2 * u), D)
            if cand * cand == x:
                return cand
    return None


# ---------------------------------------------------------------------------
# Univariate polynomials
# ---------------------------------------------------------------------------


class Poly:
    """Univariate polynomial with coefficients in a :class:`FieldSpec`.

    ``coeffs[i]`` is the coefficient of ``var**i``; trailing zeros are stripped
    so the representation is canonical.  Used both for entries of
    degeneration maps (variable ``eps``) and for invariant factors
    (variable ``x``).
    """

    __slots__ = ("field", "coeffs", "var")

    def __init__(self, coeffs: Sequence, field: FieldSpec, var: str = "eps"):
        cs = [field.element(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "var", var)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    @classmethod
    def _raw(cls, coeffs: list, field: FieldSpec, var: str) -> "Poly":
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        obj = object.__new__(cls)
        object.__setattr__(obj, "field", field)
        object.__setattr__(obj, "coeffs", tuple(coeffs))
        object.__setattr__(obj, "var", var)
        return obj

    @classmethod
    def zero(cls, field: FieldSpec, var: str = "eps") -> "Poly":
        return cls._raw([], field, var)

    @classmethod
    def constant(cls, c, field: FieldSpec, var: str = "eps") -> "Poly":
        return cls([c], field, var)

    @classmethod
    def monomial(cls, degree: int, field: FieldSpec, c=1, var: str = "eps") -> "Poly":
        return cls([0] * degree + [c], field, var)

    # -- structure --------------------------------------------------------
    @property
    def degree(self) -> float | int:
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    @property
    def valuation(self) -> float | int:
        for i, c in enumerate(self.coeffs):
            if c != 0:
                return i
        return math.inf

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, i: int):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else self.field.zero()

    def lead(self):
        return self.coeffs[-1]

    def _check(self, other: "Poly"):
        if not isinstance(other, Poly):
            raise TypeError(f"expected Poly, got {type(other).__name__}")
        if other.field != self.field:
            raise FieldMismatchError(f"{self.field} vs {other.field}")

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        f = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        cs = [f.add(self.coefficient(i), other.coefficient(i)) for i in range(n)]
        return Poly._raw(cs, f, self.var)

    def __neg__(self) -> "Poly":
        f = self.field
        return Poly._raw([f.neg(c) for c in self.coeffs], f, self.var)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = self.field.element(other)
            return Poly._raw([self.field.mul(a, c) for a in self.coeffs], self.field, self.var)
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def __call__(self, x):
        f = self.field
        acc = f.zero()
        for c in reversed(self.coeffs):
            acc = f.add(f.mul(acc, x), c)
        return acc

    def truncate(self, dmax: int) -> "Poly":
        return poly_truncate(self, dmax)

    def shift(self, k: int) -> "Poly":
        """Multiply by ``var**k``."""
        if self.is_zero():
            return self
        return Poly._raw([self.field.zero()] * k + list(self.coeffs), self.field, self.var)

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self * self.field.inv(self.lead())

    def derivative(self) -> "Poly":
        f = self.field
        return Poly._raw(
            [f.mul(f.element(i), c) for i, c in enumerate(self.coeffs)][1:], f, self.var
        )

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        self._check(other)
        if other.is_zero():
            raise DivisionByZeroError("polynomial division by zero")
        f = self.field
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly.zero(f, self.var), self
        quot = [f.zero()] * (dq + 1)
        inv_lead = f.inv(other.lead())
        od = len(other.coeffs) - 1
        for i in range(dq, -1, -1):
            c = f.mul(rem[i + od], inv_lead)
            quot[i] = c
            if c != 0:
                for j, oc in enumerate(other.coeffs):
                    rem[i + j] = f.sub(rem[i + j], f.mul(c, oc))
        return Poly._raw(quot, f, self.var), Poly._raw(rem[:od], f, self.var)

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def divides(self, other: "Poly") -> bool:
        return (other % self).is_zero()

    def with_var(self, var: str) -> "Poly":
        return Poly._raw(list(self.coeffs), self.field, var)

    # -- text -------------------------------------------------------------
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r}, {self.field})"


EpsPoly = Poly


def poly_mul(a: Poly, b: Poly) -> Poly:
    """Product of two polynomials over the same field."""
    a._check(b)
    f = a.field
    if a.is_zero() or b.is_zero():
        return Poly.zero(f, a.var)
    out = [f.zero()] * (len(a.coeffs) + len(b.coeffs) - 1)
    for i, x in enumerate(a.coeffs):
        if x == 0:
            continue
        for j, y in enumerate(b.coeffs):
            out[i + j] = f.add(out[i + j], f.mul(x, y))
    return Poly._raw(out, f, a.var)


def poly_truncate(a: Poly, dmax: int) -> Poly:
    """Drop every coefficient of degree above ``dmax``."""
    if dmax < 0:
        raise ValueError("dmax must be non-negative")
    return Poly._raw(list(a.coeffs[: dmax + 1]), a.field, a.var)


def poly_valuation(a: Poly) -> float | int:
    return a.valuation


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd (zero if both inputs are zero)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_powmod(base: Poly, n: int, modulus: Poly) -> Poly:
    result = Poly.constant(1, base.field, base.var) % modulus
    base = base % modulus
    while n:
        if n & 1:
            result = poly_mul(result, base) % modulus
        base = poly_mul(base, base) % modulus
        n >>= 1
    return result


def is_squarefree(a: Poly) -> bool:
    """Squarefree test over a perfect field (Q, Q(sqrt D), F_p)."""
    if a.degree <= 0:
        return True
    da = a.derivative()
    if da.is_zero():
        return False
    return poly_gcd(a, da).degree == 0


def _format_coeff(field: FieldSpec, c) -> str:
    s = field.format(c)
    if field.kind == "quadratic":
        return f"({s})"
    return s


def format_poly(a: Poly) -> str:
    """Render as ``c0 + c1*eps + c2*eps^2`` with zero terms omitted."""
    if a.is_zero():
        return "0"
    parts = []
    for i, c in enumerate(a.coeffs):
        if c == 0:
            continue
        if i == 0:
            parts.append(a.field.format(c))
        elif i == 1:
            parts.append(f"{_format_coeff(a.field, c)}*{a.var}")
        else:
            parts.append(f"{_format_coeff(a.field, c)}*{a.var}^{i}")
    return " + ".join(parts)


def parse_poly(text: str, field: FieldSpec, var: str = "eps") -> Poly:
    """Inverse of :func:`format_poly`; also accepts bare ``eps`` / ``-eps^2`` terms."""
    text = str(text).strip()
    if not text:
        raise FieldError("empty polynomial string")
    coeffs: dict[int, object] = {}
    term_re = re.compile(rf"^(.*?)\s*\*?\s*{re.escape(var)}(?:\s*\^\s*(\d+))?$")
    for term in re.split(r"\s+\+\s+", text):
        term = term.strip()
        m = term_re.match(term)
        if m:
            cstr, deg = m.group(1).strip(), int(m.group(2) or 1)
            if cstr.startswith("(") and cstr.endswith(")"):
                cstr = cstr[1:-1]
            if cstr in ("", "+"):
                c = field.one()
            elif cstr == "-":
                c = field.neg(field.one())
            else:
                c = field.parse(cstr)
        else:
            deg, c = 0, field.parse(term.strip("()") if term.startswith("(") else term)
        coeffs[deg] = field.add(coeffs.get(deg, field.zero()), c)
    top = max(coeffs)
    return Poly([coeffs.get(i, 0) for i in range(top + 1)], field, var)
