"""Restrictions, degenerations and the interpolation machinery.

A restriction is one scalar matrix per leg, ``A_i`` of shape
``dim(V_i) x dim(U_i)``.  A degeneration is one matrix per leg whose entries
are polynomials in ``eps``; it is stored as a coefficient stack of shape
``(deg + 1, dim(V_i), dim(U_i))`` so that ``stack[a]`` is the ``eps^a``
coefficient matrix.

Approximation degree ``d`` is the valuation of the applied result, error
degree ``e`` is the top degree minus ``d``.  With this convention ``t`` and
``s`` related with ``d = 0`` are related by a plain restriction; some older
texts shift ``d`` by one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Sequence

import numpy as np

from .exactfield import FieldError, FieldSpec, Poly, format_poly, parse_poly
from .tensorcore import (
    Decomposition,
    ShapeError,
    SimpleTensor,
    Tensor,
    basis_vector,
    chi_tensor,
    decomposition_product,
    decomposition_sum,
    kronecker_product,
    scale_decomposition,
    tensor_product,
    unit_tensor,
)

Q = FieldSpec.rationals()


class CertificateError(ValueError):
    """A certificate failed verification or is internally inconsistent."""


# ---------------------------------------------------------------------------
# Restrictions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Restriction:
    maps: tuple[np.ndarray, ...]
    field: FieldSpec = Q
    meta: dict = dc_field(default_factory=dict, compare=False)

    @classmethod
    def of(cls, maps, field: FieldSpec = Q, meta=None) -> "Restriction":
        mats = tuple(field.asarray(m) for m in maps)
        for m in mats:
            if m.ndim != 2:
                raise ShapeError("restriction maps must be matrices")
        return cls(mats, field, dict(meta or {}))

    @property
    def order(self) -> int:
        return len(self.maps)

    @property
    def source_dims(self) -> tuple[int, ...]:
        return tuple(m.shape[1] for m in self.maps)

    @property
    def target_dims(self) -> tuple[int, ...]:
        return tuple(m.shape[0] for m in self.maps)

    def to_json(self) -> dict:
        f = self.field
        return {
            "type": "restriction",
            "field": f.to_json(),
            "source_dims": list(self.source_dims),
            "target_dims": list(self.target_dims),
            "maps": [[[f.format(x) for x in row] for row in m] for m in self.maps],
            "meta": self.meta,
        }


def _mode_product(field: FieldSpec, M: np.ndarray, arr: np.ndarray, leg: int) -> np.ndarray:
    out = field.tensordot(M, arr, axes=([1], [leg]))
    return np.moveaxis(out, 0, leg)


def _check_legs(field: FieldSpec, t: Tensor, source_dims: Sequence[int]):
    if t.field != field:
        raise FieldError(f"tensor over {t.field}, certificate over {field}")
    if tuple(t.dims) != tuple(source_dims):
        raise ShapeError(f"tensor dims {t.dims} do not match source dims {tuple(source_dims)}")


def apply_restriction(r: Restriction, t: Tensor) -> Tensor:
    """``(A_1 ⊗ ... ⊗ A_k) t``."""
    _check_legs(r.field, t, r.source_dims)
    arr = t.data
    for leg, M in enumerate(r.maps):
        arr = _mode_product(r.field, M, arr, leg)
    return Tensor._wrap(arr, r.field)


def restriction_product(r1: Restriction, r2: Restriction, mode: str = "tensor") -> Restriction:
    if r1.field != r2.field:
        raise FieldError("restrictions over different fields")
    if mode == "tensor":
        return Restriction(r1.maps + r2.maps, r1.field)
    if r1.order != r2.order:
        raise ShapeError("Kronecker product needs equal orders")
    f = r1.field
    return Restriction(tuple(f.reduce(np.kron(a, b)) for a, b in zip(r1.maps, r2.maps)), f)


def identity_restriction(dims: Sequence[int], field: FieldSpec = Q) -> Restriction:
    return Restriction(tuple(field.eye(d) for d in dims), field)


# ---------------------------------------------------------------------------
# Degenerations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Degeneration:
    """Leg maps polynomial in eps, a source tensor and the claimed ``(d, e)``.

    ``target`` is optional; when present verification also checks that the
    ``eps^d`` coefficient equals it.
    """

    maps: tuple[np.ndarray, ...]
    source: Tensor
    claimed_d: int
    claimed_e: int
    target: Tensor | None = None
    meta: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self):
        f = self.source.field
        if len(self.maps) != self.source.order:
            raise ShapeError(f"{len(self.maps)} maps for an order-{self.source.order} source")
        for leg, M in enumerate(self.maps):
            if M.ndim != 3 or M.shape[0] < 1:
                raise ShapeError("degeneration maps must be (deg+1, rows, cols) stacks")
            if M.shape[2] != self.source.dims[leg]:
                raise ShapeError(f"map {leg} has {M.shape[2]} columns, source leg has {self.source.dims[leg]}")
        if self.target is not None:
            if self.target.field != f:
                raise FieldError("target over a different field")
            if tuple(self.target.dims) != self.target_dims:
                raise ShapeError(f"target dims {self.target.dims} vs maps {self.target_dims}")
        if self.claimed_d < 0 or self.claimed_e < 0:
            raise CertificateError("claimed degrees must be non-negative")

    @classmethod
    def from_polys(cls, maps, source: Tensor, claimed_d: int, claimed_e: int, target=None, meta=None):
        """Build from matrices whose entries are :class:`Poly` or scalars."""
        f = source.field
        stacks = tuple(poly_matrix_to_stack(m, f) for m in maps)
        return cls(stacks, source, claimed_d, claimed_e, target, dict(meta or {}))

    @property
    def field(self) -> FieldSpec:
        return self.source.field

    @property
    def order(self) -> int:
        return len(self.maps)

    @property
    def source_dims(self) -> tuple[int, ...]:
        return tuple(self.source.dims)

    @property
    def target_dims(self) -> tuple[int, ...]:
        return tuple(M.shape[1] for M in self.maps)

    @property
    def max_entry_degree(self) -> int:
        return max(_stack_degree(M) for M in self.maps)

    def poly_maps(self) -> list[np.ndarray]:
        return [stack_to_poly_matrix(M, self.field) for M in self.maps]

    def evaluate_maps(self, x) -> tuple[np.ndarray, ...]:
        """The scalar matrices ``A_i(x)``."""
        return tuple(_eval_stack(self.field, M, x) for M in self.maps)

    def to_json(self) -> dict:
        f = self.field
        out = {
            "type": "degeneration",
            "field": f.to_json(),
            "source_dims": list(self.source_dims),
            "target_dims": list(self.target_dims),
            "maps": [[[format_poly(p) for p in row] for row in pm] for pm in self.poly_maps()],
            "claimed_d": self.claimed_d,
            "claimed_e": self.claimed_e,
            "meta": self.meta,
        }
        if self.source != unit_tensor_like(self.source_dims, f):
            out["source"] = self.source.to_json()
        return out


def _stack_degree(M: np.ndarray) -> int:
    nz = [a for a in range(M.shape[0]) if np.any(M[a] != 0)]
    return nz[-1] if nz else -1


def _trim_stack(M: np.ndarray) -> np.ndarray:
    deg = _stack_degree(M)
    return M[: max(deg, 0) + 1]


def _eval_stack(field: FieldSpec, M: np.ndarray, x) -> np.ndarray:
    # Horner in the degree axis
    x = field.element(x)
    out = M[-1].copy()
    for a in range(M.shape[0] - 2, -1, -1):
        out = field.reduce(field.scale(out, x) + M[a])
    return out


def poly_matrix_to_stack(matrix, field: FieldSpec) -> np.ndarray:
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    polys = [[p if isinstance(p, Poly) else Poly.constant(p, field) for p in row] for row in matrix]
    top = max((len(p.coeffs) for row in polys for p in row), default=1)
    M = field.zeros((max(top, 1), rows, cols))
    for i, row in enumerate(polys):
        if len(row) != cols:
            raise ShapeError("ragged matrix")
        for j, p in enumerate(row):
            if p.field != field:
                raise FieldError("polynomial over a different field")
            for a, c in enumerate(p.coeffs):
                M[a, i, j] = c
    return M


def stack_to_poly_matrix(M: np.ndarray, field: FieldSpec) -> np.ndarray:
    _, rows, cols = M.shape
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = Poly(list(M[:, i, j]), field)
    return out


def unit_tensor_like(dims: Sequence[int], field: FieldSpec) -> Tensor | None:
    if len(set(dims)) != 1:
        return None
    return unit_tensor(dims[0], len(dims), field)


@dataclass(frozen=True)
class Expansion:
    """Result of applying a degeneration: nonzero ``eps``-coefficients and ``(d, e)``."""

    coefficients: dict
    d: int
    e: int

    @property
    def leading(self) -> Tensor:
        return self.coefficients[self.d]

    @property
    def top(self) -> int:
        return self.d + self.e

    def items(self):
        return sorted(self.coefficients.items())


def apply_degeneration(g: Degeneration, t: Tensor | None = None) -> Expansion:
    """Full eps-expansion of ``(A_1(eps) ⊗ ... ⊗ A_k(eps)) t``.

    ``t`` defaults to the degeneration's own source.  Raises
    :class:`CertificateError` if the result is identically zero.
    """
    t = g.source if t is None else t
    field = g.field
    _check_legs(field, t, g.source_dims)
    layers: dict[int, np.ndarray] = {0: t.data}
    for leg, M in enumerate(g.maps):
        M = _trim_stack(M)
        nxt: dict[int, np.ndarray] = {}
        for deg, arr in layers.items():
            for a in range(M.shape[0]):
                if not np.any(M[a] != 0):
                    continue
                part = _mode_product(field, M[a], arr, leg)
                key = deg + a
                nxt[key] = part if key not in nxt else field.reduce(nxt[key] + part)
        if not nxt:
            raise CertificateError("degeneration maps to the zero tensor")
        layers = nxt
    coeffs = {
        deg: Tensor._wrap(arr, field) for deg, arr in sorted(layers.items()) if np.any(arr != 0)
    }
    if not coeffs:
        raise CertificateError("degeneration maps to the zero tensor")
    d = min(coeffs)
    return Expansion(coeffs, d, max(coeffs) - d)


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    d: int | None
    e: int | None
    message: str
    mismatch: tuple | None = None

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {
            "verified": self.ok,
            "d": self.d,
            "e": self.e,
            "message": self.message,
            "mismatch": list(self.mismatch) if self.mismatch else None,
        }


def _first_mismatch(a: Tensor, b: Tensor) -> tuple | None:
    if a.dims != b.dims:
        return ("dims", list(a.dims), list(b.dims))
    diff = np.argwhere(a.data != b.data)
    if diff.size == 0:
        return None
    idx = tuple(int(i) for i in diff[0])
    f = a.field
    return (",".join(str(i + 1) for i in idx), f.format(a.data[idx]), f.format(b.data[idx]))


def verify(g: Degeneration, target: Tensor | None = None) -> VerificationReport:
    """Recompute ``(d, e)`` and compare with the claims and the target.

    A certificate passes when the valuation equals ``claimed_d``, the error
    degree does not exceed ``claimed_e`` and the ``eps^d`` coefficient equals
    the target (when one is known).
    """
    target = g.target if target is None else target
    try:
        exp = apply_degeneration(g)
    except CertificateError as exc:
        return VerificationReport(False, None, None, str(exc))
    if exp.d != g.claimed_d:
        return VerificationReport(False, exp.d, exp.e, f"approximation degree is {exp.d}, claimed {g.claimed_d}")
    if exp.e > g.claimed_e:
        return VerificationReport(False, exp.d, exp.e, f"error degree is {exp.e}, claimed {g.claimed_e}")
    if target is not None:
        mm = _first_mismatch(exp.leading, target)
        if mm is not None:
            return VerificationReport(False, exp.d, exp.e, "eps^d coefficient differs from target", mm)
    return VerificationReport(True, exp.d, exp.e, "verified")


def verify_restriction(r: Restriction, source: Tensor, target: Tensor) -> VerificationReport:
    try:
        got = apply_restriction(r, source)
    except (ShapeError, FieldError) as exc:
        return VerificationReport(False, None, None, str(exc))
    mm = _first_mismatch(got, target)
    if mm is not None:
        return VerificationReport(False, 0, 0, "restriction image differs from target", mm)
    return VerificationReport(True, 0, 0, "verified")


def verify_decomposition(dec: Decomposition, target: Tensor) -> VerificationReport:
    from .tensorcore import eval_decomposition

    if dec.field != target.field:
        return VerificationReport(False, None, None, "decomposition and target over different fields")
    if tuple(dec.dims) != tuple(target.dims):
        return VerificationReport(False, None, None, f"dims {tuple(dec.dims)} vs {target.dims}")
    mm = _first_mismatch(eval_decomposition(dec), target)
    if mm is not None:
        return VerificationReport(False, None, None, "decomposition sum differs from target", mm)
    return VerificationReport(True, None, None, f"verified {len(dec)} terms")


def _require_verified(g: Degeneration) -> Expansion:
    rep = verify(g)
    if not rep.ok:
        raise CertificateError(f"degeneration does not verify: {rep.message}")
    return apply_degeneration(g)


def degeneration_product(g1: Degeneration, g2: Degeneration, mode: str = "tensor") -> Degeneration:
    """Product certificate; claimed degrees add.

    ``mode="tensor"`` concatenates legs (``⊗``), ``mode="kronecker"`` pairs them
    (``⊠``), with polynomial Kronecker products of the leg maps.
    """
    if g1.field != g2.field:
        raise FieldError("degenerations over different fields")
    f = g1.field
    if mode in ("tensor", "⊗"):
        maps = g1.maps + g2.maps
        source = tensor_product(g1.source, g2.source)
        target = (
            tensor_product(g1.target, g2.target)
            if g1.target is not None and g2.target is not None
            else None
        )
    elif mode in ("kronecker", "⊠"):
        if g1.order != g2.order:
            raise ShapeError(f"orders differ: {g1.order} vs {g2.order}")
        maps = tuple(_stack_kron(f, a, b) for a, b in zip(g1.maps, g2.maps))
        source = kronecker_product(g1.source, g2.source)
        target = (
            kronecker_product(g1.target, g2.target)
            if g1.target is not None and g2.target is not None
            else None
        )
    else:
        raise ValueError(f"unknown product mode {mode!r}")
    return Degeneration(
        maps, source, g1.claimed_d + g2.claimed_d, g1.claimed_e + g2.claimed_e, target,
        {"product": mode, "factors": [g1.meta, g2.meta]},
    )


def _stack_kron(field: FieldSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A, B = _trim_stack(A), _trim_stack(B)
    rows = A.shape[1] * B.shape[1]
    cols = A.shape[2] * B.shape[2]
    out = field.zeros((A.shape[0] + B.shape[0] - 1, rows, cols))
    for a in range(A.shape[0]):
        for b in range(B.shape[0]):
            out[a + b] = field.reduce(out[a + b] + np.kron(A[a], B[b]))
    return out


def truncate_degeneration(g: Degeneration) -> Degeneration:
    """Drop all map coefficients above ``eps^d``; the error degree becomes at most ``(k-1)d``."""
    exp = _require_verified(g)
    d = exp.d
    maps = tuple(M[: d + 1].copy() for M in g.maps)
    out = Degeneration(maps, g.source, d, max(g.order - 1, 0) * d, g.target, dict(g.meta))
    new = apply_degeneration(out)
    if new.d != d or new.leading != exp.leading:
        raise CertificateError("truncation changed the leading coefficient")  # cannot happen
    return replace(out, claimed_e=new.e)


# ---------------------------------------------------------------------------
# From degenerations to restrictions
# ---------------------------------------------------------------------------


def default_alphas(field: FieldSpec, count: int) -> list:
    """``1, 2, ..., count`` (these are the first nonzero residues over a prime field)."""
    if field.is_finite and count > field.cardinality - 1:
        raise FieldError(f"{field} has fewer than {count} nonzero elements")
    return [field.element(j) for j in range(1, count + 1)]


def lagrange_weights(field: FieldSpec, alphas: Sequence) -> list:
    """``β_j = Π_{m≠j} α_m / (α_m − α_j)``, the Lagrange basis evaluated at 0."""
    betas = []
    for j, aj in enumerate(alphas):
        b = field.one()
        for m, am in enumerate(alphas):
            if m != j:
                b = field.mul(b, field.div(am, field.sub(am, aj)))
        betas.append(b)
    return betas


def _check_alphas(field: FieldSpec, alphas: Sequence, needed: int) -> list:
    alphas = [field.element(a) for a in alphas]
    if len(alphas) < needed:
        raise CertificateError(f"need at least {needed} interpolation points, got {len(alphas)}")
    if any(a == field.zero() for a in alphas):
        raise CertificateError("interpolation points must be nonzero")
    if len(set(alphas)) != len(alphas):
        raise CertificateError("interpolation points must be distinct")
    return alphas


def interpolate_to_restriction(g: Degeneration, alphas: Sequence | None = None, check: bool = True) -> Restriction:
    """Restriction from ``source ⊠ ⟨L⟩`` to the ``eps^d`` coefficient (``L = e+1`` by default).

    Leg ``i`` of the result sends basis vector ``u*L + j`` of the grouped
    source to ``A_i(α_j) b_u``; on leg 1 this is scaled by ``β_j α_j^{-d}``.  The field needs at least ``e + 2`` elements.
    """
    field = g.field
    if check:
        exp = _require_verified(g)
        d, e = exp.d, exp.e
    else:
        d, e = g.claimed_d, g.claimed_e
    if field.is_finite and field.cardinality < e + 2:
        raise FieldError(f"|{field}| = {field.cardinality} < e + 2 = {e + 2}; use chi_restriction")
    if alphas is None:
        alphas = default_alphas(field, e + 1)
    alphas = _check_alphas(field, alphas, e + 1)
    L = len(alphas)
    betas = lagrange_weights(field, alphas)
    maps = []
    for leg, M in enumerate(g.maps):
        rows, cols = M.shape[1], M.shape[2]
        B = field.zeros((rows, cols * L))
        for j, (aj, bj) in enumerate(zip(alphas, betas)):
            # the weight β_j α_j^{-d} goes on leg 1 only; repeating β_j on
            # every leg would multiply the j-th summand by β_j^k
            w = field.mul(bj, field.power(field.inv(aj), d)) if leg == 0 else field.one()
            B[:, j::L] = field.scale(_eval_stack(field, M, aj), w)
        maps.append(B)
    return Restriction(tuple(maps), field, {"construction": "lagrange", "points": [field.format(a) for a in alphas]})


def interpolation_source(g: Degeneration, points: int) -> Tensor:
    return kronecker_product(g.source, unit_tensor(points, g.order, g.field))


def chi_restriction(g: Degeneration) -> Restriction:
    """Restriction from ``source ⊠ χ_d(k)`` to the ``eps^d`` coefficient.

    Works over every field; map entries must have degree at most ``d``
    (apply :func:`truncate_degeneration` first).
    """
    exp = _require_verified(g)
    d = exp.d
    if g.max_entry_degree > d:
        raise CertificateError(f"map entries reach degree {g.max_entry_degree} > d = {d}; truncate first")
    field = g.field
    maps = []
    for M in g.maps:
        rows, cols = M.shape[1], M.shape[2]
        B = field.zeros((rows, cols * (d + 1)))
        for a in range(min(d + 1, M.shape[0])):
            B[:, a :: d + 1] = M[a]
        maps.append(B)
    return Restriction(tuple(maps), field, {"construction": "chi", "d": d})


def chi_source(g: Degeneration, d: int) -> Tensor:
    return kronecker_product(g.source, chi_tensor(d, g.order, g.field))


def restriction_decomposition(r: Restriction, source_dec: Decomposition) -> Decomposition:
    """Push a decomposition of the source through the leg maps, dropping zero terms."""
    f = r.field
    terms = []
    for t in source_dec.terms:
        vecs = tuple(f.matmul(M, v.reshape(-1, 1)).reshape(-1) for M, v in zip(r.maps, t.factors))
        st = SimpleTensor(vecs)
        if not st.is_zero():
            terms.append(st)
    return Decomposition(tuple(terms), r.target_dims, f)


def power_decomposition(g: Degeneration, n: int, alphas: Sequence | None = None) -> Decomposition:
    """Decomposition of ``s^{⊗n}`` with at most ``(ne+1) r^n`` terms.

    ``g`` must degenerate a unit tensor ``⟨r⟩`` to ``s`` with error degree
    ``e``.  The n-fold product degeneration is interpolated at ``ne + 1``
    points and the diagonal terms of ``⟨r⟩^{⊗n} ⊠ ⟨ne+1⟩`` are pushed through
    the resulting maps.
    """
    if n < 1:
        raise ValueError("n must be positive")
    exp = _require_verified(g)
    field = g.field
    k = g.order
    r = g.source.dims[0]
    if g.source != unit_tensor_like(g.source_dims, field):
        raise CertificateError("power_decomposition needs a unit-tensor source")
    # the product certificate is checked through the final evaluation instead
    prod = g
    for _ in range(n - 1):
        prod = degeneration_product(prod, g, "tensor")
    prod = replace(prod, claimed_d=n * exp.d, claimed_e=n * exp.e)
    N = n * exp.e + 1
    if field.is_finite and field.cardinality < N + 1:
        raise FieldError(f"|{field}| = {field.cardinality} < ne + 2 = {N + 1}")
    R = interpolate_to_restriction(prod, alphas, check=False)
    L = R.maps[0].shape[1] // r
    terms = []
    for idx in np.ndindex(*(r,) * n):
        for j in range(L):
            vecs = tuple(R.maps[leg][:, idx[leg // k] * L + j] for leg in range(n * k))
            st = SimpleTensor(tuple(np.array(v) for v in vecs))
            if not st.is_zero():
                terms.append(st)
    return Decomposition(tuple(terms), R.target_dims, field)


def power_bound(r: int, e: int, n: int) -> int:
    """``(ne + 1) r^n``."""
    return (n * e + 1) * r**n


# ---------------------------------------------------------------------------
# Certificates for the named families
# ---------------------------------------------------------------------------


def _eps(field: FieldSpec) -> Poly:
    return Poly.monomial(1, field)


def w_certificate(k: int, field: FieldSpec = Q) -> Degeneration:
    """Degeneration ``⟨2⟩ ⊵ W_k`` with ``(d, e) = (1, k-1)``.

    Legs ``1..k-1`` use ``[[1, 1], [eps, 0]]`` and the last leg
    ``[[1, -1], [eps, 0]]``, so that the image of ``⟨2⟩`` is
    ``(b_1 + eps b_2)^{⊗k} - b_1^{⊗k}``.
    """
    from .tensorcore import w_tensor

    one = Poly.constant(1, field)
    zero = Poly.zero(field)
    eps = _eps(field)
    first = [[one, one], [eps, zero]]
    last = [[one, -one], [eps, zero]]
    maps = [first] * (k - 1) + [last]
    return Degeneration.from_polys(
        maps, unit_tensor(2, k, field), 1, k - 1, w_tensor(k, field),
        {"family": "W", "params": {"k": k}},
    )


def strassen_certificate(q: int, k: int = 3, field: FieldSpec = Q) -> Degeneration:
    """Degeneration ``⟨q+1⟩ ⊵ Str_q^k`` with ``(d, e) = (1, 1)``.

    With ``b_i`` for ``i >= 2``:

    * leg 1: ``b_1 -> -b_1``, ``b_i -> b_1 + eps b_i``
    * leg 2: ``b_1 -> Σ_{i>=2} b_i``, ``b_i -> b_i``
    * leg 3: ``b_1 -> b_1``, ``b_i -> b_1 + eps b_i``
    * legs 4..k: everything to ``b_1``

    The ``b_i`` images sum to ``Σ b_1⊗b_i⊗b_1 + eps Str + eps^2 Σ b_i⊗b_i⊗b_i``
    and the ``b_1`` image cancels the constant term.
    """
    from .tensorcore import strassen_tensor

    n = q + 1
    M1 = field.zeros((2, n, n))
    M2 = field.zeros((1, n, n))
    M3 = field.zeros((2, n, n))
    M1[0, 0, 0] = field.element(-1)
    M3[0, 0, 0] = field.one()
    for i in range(1, n):
        M1[0, 0, i] = field.one()
        M1[1, i, i] = field.one()
        M3[0, 0, i] = field.one()
        M3[1, i, i] = field.one()
        M2[0, i, 0] = field.one()
        M2[0, i, i] = field.one()
    rest = field.zeros((1, n, n))
    rest[0, 0, :] = field.one()
    maps = (M1, M2, M3) + (rest,) * (k - 3)
    return Degeneration(
        maps, unit_tensor(n, k, field), 1, 1, strassen_tensor(q, k, field),
        {"family": "Str", "params": {"q": q, "k": k}},
    )


def two_term_w3plus(c, field: FieldSpec = Q) -> Decomposition:
    """``W_3 + c b_2^{⊗3} = (1/(2√c)) ((b_1+√c b_2)^{⊗3} − (b_1−√c b_2)^{⊗3})``."""
    if field.characteristic == 2:
        raise FieldError("the two-term identity needs characteristic != 2")
    c = field.element(c)
    root = field.sqrt(c)
    if root is None:
        raise FieldError(f"{field.format(c)} has no square root in {field}")
    if root == field.zero():
        raise FieldError("c must be nonzero")
    w = field.inv(field.mul(field.element(2), root))
    plus = field.asarray([field.one(), root])
    minus = field.asarray([field.one(), field.neg(root)])
    return Decomposition.from_vectors(
        [
            [field.scale(plus, w), plus, plus],
            [field.scale(minus, field.neg(w)), minus, minus],
        ],
        field,
        (2, 2, 2),
    )


def w3_squared_decomposition(field: FieldSpec | None = None) -> Decomposition:
    """Eight-term decomposition of ``W_3 ⊗ W_3``.

    Uses ``W_3⊗W_3 = (W_3 + z)^{⊗2} − (W_3 + z/2)⊗z − z⊗(W_3 + z/2)`` with
    ``z = b_2^{⊗3}``; the first product has 2·2 terms, the other two have two
    each.  Needs ``√2`` in the field (for example ``Q(√2)`` or ``F_7``).
    """
    field = FieldSpec.quadratic(2) if field is None else field
    z = Decomposition.from_vectors([[basis_vector(2, 2, field)] * 3], field, (2, 2, 2))
    plus1 = two_term_w3plus(1, field)
    half = two_term_w3plus(field.inv(field.element(2)), field)
    return decomposition_sum(
        decomposition_product(plus1, plus1),
        scale_decomposition(decomposition_product(half, z), -1),
        scale_decomposition(decomposition_product(z, half), -1),
    )


def certificate(kind: str, field: FieldSpec = Q, **params):
    """Dispatch by family name: ``"W"``, ``"Str"`` or ``"W3plus"``."""
    if kind == "W":
        return w_certificate(params.get("k", 3), field)
    if kind == "Str":
        return strassen_certificate(params.get("q", 2), params.get("k", 3), field)
    if kind == "W3plus":
        return two_term_w3plus(params.get("c", 1), field)
    raise ValueError(f"unknown certificate family {kind!r}")


def random_degeneration(
    field: FieldSpec,
    rng: np.random.Generator,
    k: int,
    dims: Sequence[int],
    max_degree: int,
    r: int | None = None,
) -> Degeneration:
    """Random maps applied to a random source; the claims are read off the expansion."""
    from .tensorcore import random_tensor

    source = random_tensor(dims, field, rng) if r is None else unit_tensor(r, k, field)
    while source.is_zero():
        source = random_tensor(dims, field, rng)
    while True:
        maps = tuple(
            field.random_array(rng, (max_degree + 1, int(rng.integers(1, 4)), source.dims[i]))
            for i in range(k)
        )
        probe = Degeneration(maps, source, 0, 0)
        try:
            exp = apply_degeneration(probe)
        except CertificateError:
            continue
        return Degeneration(maps, source, exp.d, exp.e, exp.leading)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def certificate_to_json(cert) -> dict:
    if isinstance(cert, Decomposition):
        out = cert.to_json()
        out["type"] = "decomposition"
        out["target_dims"] = list(cert.dims)
        return out
    return cert.to_json()


def certificate_from_json(obj: dict):
    """Parse a certificate; raises ``KeyError``/``ValueError`` on malformed input."""
    kind = obj["type"]
    field = FieldSpec.from_json(obj["field"])
    if kind == "decomposition":
        return Decomposition.from_json(obj)
    maps_raw = obj["maps"]
    source_dims = [int(x) for x in obj["source_dims"]]
    target_dims = [int(x) for x in obj["target_dims"]]
    if len(maps_raw) != len(source_dims) or len(target_dims) != len(source_dims):
        raise ValueError("maps, source_dims and target_dims disagree on the order")
    if kind == "restriction":
        maps = [field.asarray([[field.parse(x) for x in row] for row in m]) for m in maps_raw]
        r = Restriction.of(maps, field, obj.get("meta"))
        if r.source_dims != tuple(source_dims) or r.target_dims != tuple(target_dims):
            raise ValueError("map shapes disagree with the declared dims")
        return r
    if kind == "degeneration":
        if "source" in obj:
            source = Tensor.from_json(obj["source"])
        else:
            source = unit_tensor_like(source_dims, field)
            if source is None:
                raise ValueError("a non-cubic source needs an explicit 'source' tensor")
        polys = [[[parse_poly(x, field) for x in row] for row in m] for m in maps_raw]
        g = Degeneration.from_polys(polys, source, int(obj["claimed_d"]), int(obj["claimed_e"]), None, obj.get("meta"))
        if g.target_dims != tuple(target_dims) or g.source_dims != tuple(source_dims):
            raise ValueError("map shapes disagree with the declared dims")
        return g
    raise ValueError(f"unknown certificate type {kind!r}")


def chi_rank_bound(d: int, k: int) -> int:
    return math.comb(k + d - 1, k - 1)
