"""Dense exact tensors, the product structures and the named tensor families.

Indices are 0-based internally; JSON and docs use 1-based multi-indices so
that ``b_1`` is the first basis vector.  Grouped legs (Kronecker products,
matrix multiplication tensors) use row-major pairing: the pair ``(i, j)``
with ``j`` ranging over ``n`` values maps to ``i * n + j``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .exactfield import FieldMismatchError, FieldSpec

Q = FieldSpec.rationals()


class ShapeError(ValueError):
    pass


class Tensor:
    """Immutable order-k tensor over an exact field."""

    __slots__ = ("field", "data")

    def __init__(self, data, field: FieldSpec = Q):
        arr = field.asarray(data)
        if arr.ndim < 1:
            raise ShapeError("a tensor needs at least one leg")
        if any(d < 1 for d in arr.shape):
            raise ShapeError(f"every leg dimension must be positive, got {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Tensor is immutable")

    @classmethod
    def _wrap(cls, arr: np.ndarray, field: FieldSpec) -> "Tensor":
        # arr must already hold canonical field elements
        if arr.ndim < 1 or any(d < 1 for d in arr.shape):
            raise ShapeError(f"invalid tensor shape {arr.shape}")
        arr = np.array(arr, dtype=field.dtype, copy=True)
        arr.flags.writeable = False
        obj = object.__new__(cls)
        object.__setattr__(obj, "field", field)
        object.__setattr__(obj, "data", arr)
        return obj

    @classmethod
    def zeros(cls, dims: Sequence[int], field: FieldSpec = Q) -> "Tensor":
        return cls._wrap(field.zeros(tuple(dims)), field)

    @classmethod
    def from_entries(cls, dims: Sequence[int], entries, field: FieldSpec = Q) -> "Tensor":
        """Build from ``{(i1, ..., ik): value}`` with 1-based indices."""
        arr = field.zeros(tuple(dims))
        items = entries.items() if hasattr(entries, "items") else entries
        for idx, val in items:
            idx0 = tuple(i - 1 for i in idx)
            if len(idx0) != len(dims) or any(not 0 <= i < d for i, d in zip(idx0, dims)):
                raise ShapeError(f"index {idx} outside dims {tuple(dims)}")
            arr[idx0] = field.add(arr[idx0], field.element(val))
        return cls._wrap(arr, field)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    shape = dims

    @property
    def order(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def nnz(self) -> int:
        return int(np.count_nonzero(self.data != 0))

    def is_zero(self) -> bool:
        return self.nnz() == 0

    def entries(self) -> Iterator[tuple[tuple[int, ...], object]]:
        """Nonzero entries as ``(1-based index, value)`` in row-major order."""
        for idx in zip(*np.nonzero(self.data != 0)):
            idx = tuple(int(i) for i in idx)
            yield tuple(i + 1 for i in idx), self.data[idx]

    def __getitem__(self, idx):
        return self.data[idx]

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return (
            self.field == other.field
            and self.dims == other.dims
            and bool(np.all(self.data == other.data))
        )

    def __hash__(self):
        return hash((self.field, self.dims, tuple(self.data.ravel().tolist())))

    def _binop_check(self, other: "Tensor"):
        if self.field != other.field:
            raise FieldMismatchError(f"{self.field} vs {other.field}")
        if self.dims != other.dims:
            raise ShapeError(f"shape {self.dims} vs {other.dims}")

    def __add__(self, other: "Tensor") -> "Tensor":
        self._binop_check(other)
        return Tensor._wrap(self.field.reduce(self.data + other.data), self.field)

    def __sub__(self, other: "Tensor") -> "Tensor":
        self._binop_check(other)
        return Tensor._wrap(self.field.reduce(self.data - other.data), self.field)

    def __neg__(self) -> "Tensor":
        return Tensor._wrap(self.field.reduce(-self.data), self.field)

    def scale(self, c) -> "Tensor":
        return Tensor._wrap(self.field.scale(self.data, self.field.element(c)), self.field)

    def matrix(self) -> np.ndarray:
        if self.order != 2:
            raise ShapeError("not an order-2 tensor")
        return self.data

    def slices(self, leg: int = 0) -> list[np.ndarray]:
        return [np.take(self.data, i, axis=leg) for i in range(self.dims[leg])]

    def __repr__(self):
        return f"Tensor(dims={self.dims}, nnz={self.nnz()}, field={self.field})"

    # -- JSON -------------------------------------------------------------
    def to_json(self) -> dict:
        f = self.field
        return {
            "field": f.to_json(),
            "dims": list(self.dims),
            "entries": [[",".join(map(str, idx)), f.format(v)] for idx, v in self.entries()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Tensor":
        field = FieldSpec.from_json(obj["field"])
        dims = [int(d) for d in obj["dims"]]
        entries = []
        for key, val in obj.get("entries", []):
            idx = tuple(int(i) for i in str(key).split(","))
            entries.append((idx, field.parse(val)))
        return cls.from_entries(dims, entries, field)


def _check_same_field(*ts: Tensor) -> FieldSpec:
    field = ts[0].field
    for t in ts[1:]:
        if t.field != field:
            raise FieldMismatchError(f"{field} vs {t.field}")
    return field


# ---------------------------------------------------------------------------
# Simple tensors and decompositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimpleTensor:
    """Outer product ``u_1 ⊗ ... ⊗ u_k`` of one vector per leg."""

    factors: tuple[np.ndarray, ...]

    @classmethod
    def of(cls, vectors, field: FieldSpec = Q) -> "SimpleTensor":
        return cls(tuple(field.asarray(v).reshape(-1) for v in vectors))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.factors)

    def is_zero(self) -> bool:
        return any(not np.any(v != 0) for v in self.factors)

    def expand(self, field: FieldSpec) -> Tensor:
        out = self.factors[0]
        for v in self.factors[1:]:
            out = field.reduce(np.multiply.outer(out, v))
        return Tensor._wrap(np.asarray(out, dtype=field.dtype), field)


@dataclass(frozen=True)
class Decomposition:
    """A list of simple tensors whose sum is the represented tensor."""

    terms: tuple[SimpleTensor, ...]
    dims: tuple[int, ...]
    field: FieldSpec = Q

    def __post_init__(self):
        for t in self.terms:
            if t.dims != tuple(self.dims):
                raise ShapeError(f"term dims {t.dims} differ from {tuple(self.dims)}")

    @classmethod
    def from_vectors(cls, terms, field: FieldSpec = Q, dims=None) -> "Decomposition":
        sts = tuple(SimpleTensor.of(vs, field) for vs in terms)
        if dims is None:
            if not sts:
                raise ShapeError("dims required for an empty decomposition")
            dims = sts[0].dims
        return cls(sts, tuple(dims), field)

    def __len__(self):
        return len(self.terms)

    @property
    def rank_bound(self) -> int:
        return len(self.terms)

    def factor_matrices(self) -> list[np.ndarray]:
        """Per-leg matrices of shape ``(dim_i, r)`` (CP format)."""
        r = len(self.terms)
        mats = []
        for leg, d in enumerate(self.dims):
            M = self.field.zeros((d, r))
            for j, t in enumerate(self.terms):
                M[:, j] = t.factors[leg]
            mats.append(M)
        return mats

    def without_zero_terms(self) -> "Decomposition":
        return Decomposition(tuple(t for t in self.terms if not t.is_zero()), self.dims, self.field)

    def to_json(self) -> dict:
        f = self.field
        return {
            "field": f.to_json(),
            "dims": list(self.dims),
            "terms": [[[f.format(x) for x in v] for v in t.factors] for t in self.terms],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Decomposition":
        field = FieldSpec.from_json(obj["field"])
        dims = tuple(int(d) for d in obj["dims"])
        terms = [[[field.parse(x) for x in v] for v in term] for term in obj["terms"]]
        return cls.from_vectors(terms, field, dims)


def eval_decomposition(dec: Decomposition, chunk: int = 4096) -> Tensor:
    """Sum of the outer products of a decomposition."""
    field = dec.field
    dims = tuple(dec.dims)
    r = len(dec.terms)
    if r == 0:
        return Tensor.zeros(dims, field)
    mats = dec.factor_matrices()
    if len(dims) == 1:
        acc = mats[0][:, 0].copy()
        for j in range(1, r):
            acc = field.reduce(acc + mats[0][:, j])
        return Tensor._wrap(acc, field)
    total = None
    # chunk over terms so the Khatri-Rao product stays small
    for start in range(0, r, chunk):
        cols = slice(start, min(r, start + chunk))
        kr = mats[0][:, cols]
        for M in mats[1:-1]:
            kr = field.reduce(kr[:, None, :] * M[None, :, cols]).reshape(-1, kr.shape[1])
        part = field.matmul(kr, mats[-1][:, cols].T)
        total = part if total is None else field.reduce(total + part)
    return Tensor._wrap(total.reshape(dims), field)


def decomposition_product(a: Decomposition, b: Decomposition) -> Decomposition:
    """Termwise product: a decomposition of ``eval(a) ⊗ eval(b)`` with ``|a|·|b|`` terms."""
    if a.field != b.field:
        raise FieldMismatchError(f"{a.field} vs {b.field}")
    terms = tuple(SimpleTensor(s.factors + t.factors) for s in a.terms for t in b.terms)
    return Decomposition(terms, tuple(a.dims) + tuple(b.dims), a.field)


def decomposition_sum(*decs: Decomposition) -> Decomposition:
    dims = tuple(decs[0].dims)
    field = decs[0].field
    terms = []
    for d in decs:
        if tuple(d.dims) != dims or d.field != field:
            raise ShapeError("decompositions must share dims and field")
        terms.extend(d.terms)
    return Decomposition(tuple(terms), dims, field)


def scale_decomposition(dec: Decomposition, c) -> Decomposition:
    """Multiply the represented tensor by ``c`` (absorbed into the first factor)."""
    f = dec.field
    c = f.element(c)
    terms = tuple(
        SimpleTensor((f.scale(t.factors[0], c),) + t.factors[1:]) for t in dec.terms
    )
    return Decomposition(terms, dec.dims, f)


def trivial_decomposition(t: Tensor) -> Decomposition:
    """One term per nonzero entry."""
    f = t.field
    terms = []
    for idx, val in t.entries():
        vecs = []
        for leg, (i, d) in enumerate(zip(idx, t.dims)):
            v = f.zeros(d)
            v[i - 1] = val if leg == 0 else f.one()
            vecs.append(v)
        terms.append(SimpleTensor(tuple(vecs)))
    return Decomposition(tuple(terms), t.dims, f)


# ---------------------------------------------------------------------------
# Products and regrouping
# ---------------------------------------------------------------------------


def tensor_product(a: Tensor, b: Tensor) -> Tensor:
    """``a ⊗ b``: order adds, entry ``(i, j)`` is ``a[i]·b[j]``."""
    field = _check_same_field(a, b)
    return Tensor._wrap(field.reduce(np.multiply.outer(a.data, b.data)), field)


def group_legs(t: Tensor, partition: Sequence[Sequence[int]]) -> Tensor:
    """Merge legs according to an ordered partition of ``range(order)``.

    Within a part the first listed leg is the most significant index.
    """
    flat = [leg for part in partition for leg in part]
    if sorted(flat) != list(range(t.order)) or any(len(p) == 0 for p in partition):
        raise ShapeError(f"{partition!r} is not an ordered partition of {t.order} legs")
    dims = [int(np.prod([t.dims[leg] for leg in part])) for part in partition]
    arr = np.transpose(t.data, flat).reshape(dims)
    return Tensor._wrap(arr, t.field)


def kronecker_product(a: Tensor, b: Tensor) -> Tensor:
    """``a ⊠ b``: legs paired up, dimensions multiply legwise."""
    field = _check_same_field(a, b)
    if a.order != b.order:
        raise ShapeError(f"orders differ: {a.order} vs {b.order}")
    k = a.order
    outer = np.multiply.outer(a.data, b.data)
    perm = [x for i in range(k) for x in (i, k + i)]
    dims = [da * db for da, db in zip(a.dims, b.dims)]
    return Tensor._wrap(field.reduce(np.transpose(outer, perm).reshape(dims)), field)


def kronecker_product_via_grouping(a: Tensor, b: Tensor) -> Tensor:
    """Same as :func:`kronecker_product`, derived as grouping after ``⊗``."""
    if a.order != b.order:
        raise ShapeError(f"orders differ: {a.order} vs {b.order}")
    k = a.order
    return group_legs(tensor_product(a, b), [(i, k + i) for i in range(k)])


def kronecker_power(t: Tensor, n: int) -> Tensor:
    out = t
    for _ in range(n - 1):
        out = kronecker_product(out, t)
    return out


def tensor_power(t: Tensor, n: int) -> Tensor:
    out = t
    for _ in range(n - 1):
        out = tensor_product(out, t)
    return out


def direct_sum_shared_first_leg(ts: Sequence[Tensor]) -> Tensor:
    """Block-diagonal embedding sharing the first leg (``diag_U`` of several tensors)."""
    if not ts:
        raise ShapeError("need at least one summand")
    field = _check_same_field(*ts)
    k = ts[0].order
    d0 = ts[0].dims[0]
    for t in ts:
        if t.order != k:
            raise ShapeError("summands must share their order")
        if t.dims[0] != d0:
            raise ShapeError(f"first legs differ: {t.dims[0]} vs {d0}")
    dims = [d0] + [sum(t.dims[i] for t in ts) for i in range(1, k)]
    out = field.zeros(tuple(dims))
    offsets = [0] * k
    for t in ts:
        sl = (slice(None),) + tuple(
            slice(offsets[i], offsets[i] + t.dims[i]) for i in range(1, k)
        )
        out[sl] = t.data
        for i in range(1, k):
            offsets[i] += t.dims[i]
    return Tensor._wrap(out, field)


# ---------------------------------------------------------------------------
# Named families
# ---------------------------------------------------------------------------


def basis_vector(i: int, n: int, field: FieldSpec = Q) -> np.ndarray:
    """Standard basis vector ``b_i`` of ``F^n`` (1-based ``i``)."""
    v = field.zeros(n)
    v[i - 1] = field.one()
    return v


def unit_tensor(r: int, k: int, field: FieldSpec = Q) -> Tensor:
    """``⟨r⟩`` of order ``k``: ones on the main diagonal."""
    if r < 1 or k < 1:
        raise ShapeError("unit_tensor needs r >= 1 and k >= 1")
    arr = field.zeros((r,) * k)
    for i in range(r):
        arr[(i,) * k] = field.one()
    return Tensor._wrap(arr, field)


def unit_decomposition(r: int, k: int, field: FieldSpec = Q) -> Decomposition:
    terms = [[basis_vector(i, r, field)] * k for i in range(1, r + 1)]
    return Decomposition.from_vectors(terms, field, (r,) * k)


def w_tensor(k: int, field: FieldSpec = Q) -> Tensor:
    """``W_k``: a one at every index of ``{1,2}^k`` containing exactly one 2."""
    if k < 3:
        raise ShapeError("W_k is defined for k >= 3")
    entries = []
    for pos in range(k):
        idx = [1] * k
        idx[pos] = 2
        entries.append((tuple(idx), 1))
    return Tensor.from_entries((2,) * k, entries, field)


def w_decomposition(k: int, field: FieldSpec = Q) -> Decomposition:
    """The k-term decomposition of ``W_k`` read off its support."""
    b1, b2 = basis_vector(1, 2, field), basis_vector(2, 2, field)
    terms = [[b2 if leg == pos else b1 for leg in range(k)] for pos in range(k)]
    return Decomposition.from_vectors(terms, field, (2,) * k)


def strassen_tensor(q: int, k: int = 3, field: FieldSpec = Q) -> Tensor:
    """``Str_q^k = Σ_{i=2}^{q+1} b_i⊗b_i⊗b_1⊗b_1^{k-3} + b_1⊗b_i⊗b_i⊗b_1^{k-3}``."""
    if q < 1 or k < 3:
        raise ShapeError("Str_q^k needs q >= 1 and k >= 3")
    tail = (1,) * (k - 3)
    entries = []
    for i in range(2, q + 2):
        entries.append(((i, i, 1) + tail, 1))
        entries.append(((1, i, i) + tail, 1))
    return Tensor.from_entries((q + 1,) * k, entries, field)


def strassen_decomposition(q: int, k: int = 3, field: FieldSpec = Q) -> Decomposition:
    """The 2q-term decomposition of ``Str_q^k`` read off its support."""
    n = q + 1
    b = lambda i: basis_vector(i, n, field)  # noqa: E731
    tail = [b(1)] * (k - 3)
    terms = []
    for i in range(2, q + 2):
        terms.append([b(i), b(i), b(1)] + tail)
        terms.append([b(1), b(i), b(i)] + tail)
    return Decomposition.from_vectors(terms, field, (n,) * k)


def matmul_tensor(n1: int, n2: int, n3: int, field: FieldSpec = Q) -> Tensor:
    """``⟨n1,n2,n3⟩ = Σ (b_i⊗b_j)⊗(b_j⊗b_l)⊗(b_l⊗b_i)``."""
    if min(n1, n2, n3) < 1:
        raise ShapeError("matrix sizes must be positive")
    arr = field.zeros((n1 * n2, n2 * n3, n3 * n1))
    for i in range(n1):
        for j in range(n2):
            for l in range(n3):
                arr[i * n2 + j, j * n3 + l, l * n1 + i] = field.one()
    return Tensor._wrap(arr, field)


def matmul_trivial_decomposition(n1: int, n2: int, n3: int, field: FieldSpec = Q) -> Decomposition:
    return trivial_decomposition(matmul_tensor(n1, n2, n3, field))


def chi_tensor(d: int, k: int, field: FieldSpec = Q) -> Tensor:
    """``χ_d(k)``: ones at exponent tuples ``a ∈ [0..d]^k`` with ``Σa = d``.

    Each leg has dimension ``d + 1`` (index ``a`` lives at position ``a``).
    """
    if d < 0 or k < 1:
        raise ShapeError("chi_tensor needs d >= 0 and k >= 1")
    arr = field.zeros((d + 1,) * k)
    for a in _compositions(d, k):
        arr[a] = field.one()
    return Tensor._wrap(arr, field)


def chi_term_count(d: int, k: int) -> int:
    return math.comb(k + d - 1, k - 1)


def _compositions(d: int, k: int) -> Iterator[tuple[int, ...]]:
    """All ``a ∈ N^k`` with ``Σ a = d`` (weak compositions)."""
    if k == 1:
        yield (d,)
        return
    for first in range(d + 1):
        for rest in _compositions(d - first, k - 1):
            yield (first,) + rest


def strassen7_decomposition(field: FieldSpec = Q) -> Decomposition:
    """Strassen's seven bilinear products as a decomposition of ``⟨2,2,2⟩``.

    Leg 1 indexes ``A[i,j]`` at ``2i+j``, leg 2 ``B[j,l]`` at ``2j+l`` and leg 3
    the transposed product entry ``C[i,l]`` at ``2l+i``.
    """

    def a(**kw):
        v = [0] * 4
        for name, c in kw.items():
            i, j = int(name[1]) - 1, int(name[2]) - 1
            v[2 * i + j] += c
        return v

    def c_out(**kw):
        # product entry C[i,l] sits at leg-3 position 2*l + i
        v = [0] * 4
        for name, c in kw.items():
            i, l = int(name[1]) - 1, int(name[2]) - 1
            v[2 * l + i] += c
        return v

    products = [
        (a(A11=1, A22=1), a(B11=1, B22=1), c_out(C11=1, C22=1)),
        (a(A21=1, A22=1), a(B11=1), c_out(C21=1, C22=-1)),
        (a(A11=1), a(B12=1, B22=-1), c_out(C12=1, C22=1)),
        (a(A22=1), a(B21=1, B11=-1), c_out(C11=1, C21=1)),
        (a(A11=1, A12=1), a(B22=1), c_out(C11=-1, C12=1)),
        (a(A21=1, A11=-1), a(B11=1, B12=1), c_out(C22=1)),
        (a(A12=1, A22=-1), a(B21=1, B22=1), c_out(C11=1)),
    ]
    return Decomposition.from_vectors(products, field, (4, 4, 4))


def matmul_factors(field: FieldSpec = Q) -> tuple[Tensor, Tensor, Tensor]:
    """Three rank-2 tensors whose Kronecker product is ``⟨2,2,2⟩`` up to relabeling.

    They are ``Σ b_i⊗1⊗b_i``, ``Σ b_j⊗b_j⊗1`` and ``Σ 1⊗b_l⊗b_l``.  Their
    product in this order indexes leg 3 by ``(i, l)``; :func:`matmul_tensor`
    uses ``(l, i)``, see :func:`swap_pair_order`.
    """
    e = field.eye(2)
    return (
        Tensor._wrap(e.reshape(2, 1, 2), field),
        Tensor._wrap(e.reshape(2, 2, 1), field),
        Tensor._wrap(e.reshape(1, 2, 2), field),
    )


def swap_pair_order(t: Tensor, leg: int, n_outer: int, n_inner: int) -> Tensor:
    """Relabel a grouped leg from ``(a, b) -> a*n_inner + b`` to ``b*n_outer + a``."""
    if t.dims[leg] != n_outer * n_inner:
        raise ShapeError(f"leg {leg} has dim {t.dims[leg]}, not {n_outer}*{n_inner}")
    arr = np.moveaxis(t.data, leg, 0)
    rest = arr.shape[1:]
    arr = arr.reshape((n_outer, n_inner) + rest).swapaxes(0, 1).reshape((-1,) + rest)
    return Tensor._wrap(np.moveaxis(arr, 0, leg), t.field)


def random_tensor(dims: Sequence[int], field: FieldSpec, rng: np.random.Generator) -> Tensor:
    return Tensor._wrap(field.random_array(rng, tuple(dims)), field)


def random_decomposition(
    dims: Sequence[int], r: int, field: FieldSpec, rng: np.random.Generator
) -> Decomposition:
    terms = [[field.random_array(rng, d) for d in dims] for _ in range(r)]
    return Decomposition.from_vectors(terms, field, tuple(dims))


def all_indices(dims: Sequence[int]) -> Iterator[tuple[int, ...]]:
    return itertools.product(*(range(d) for d in dims))


def strassen_224_decomposition(field: FieldSpec = Q) -> Decomposition:
    """Fourteen terms for ``⟨2,2,4⟩``: Strassen's products on each half of ``B``.

    Column ``l = 2h + l'`` of ``B`` and ``C`` belongs to half ``h``.
    """
    base = strassen7_decomposition(field)
    terms = []
    for h in range(2):
        for st in base.terms:
            u, v, w = st.factors
            v2 = field.zeros(8)
            w2 = field.zeros(8)
            for j in range(2):
                for lp in range(2):
                    v2[4 * j + 2 * h + lp] = v[2 * j + lp]
                    for i in range(2):
                        w2[2 * (2 * h + lp) + i] = w[2 * lp + i]
            terms.append(SimpleTensor((u.copy(), v2, w2)))
    return Decomposition(tuple(terms), (4, 8, 8), field)
