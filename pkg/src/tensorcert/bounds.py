"""Rank and border-rank lower bounds.

Flattenings and generalized flattenings give border-rank lower bounds over
any field.  The substitution method and the brute-force search work over
prime fields only, where every minimum is over a finite set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .exactfield import FieldError, FieldSpec
from .tensorcore import Decomposition, ShapeError, Tensor, eval_decomposition, group_legs, tensor_product


class BudgetExceeded(RuntimeError):
    """The exhaustive search would be larger than the allowed budget."""


class InconsistentBoundsError(ArithmeticError):
    """A lower bound exceeded a verified upper bound."""


# ---------------------------------------------------------------------------
# Flattenings
# ---------------------------------------------------------------------------


def flattening_rank(t: Tensor, row_legs: Sequence[int]) -> int:
    rows = list(row_legs)
    cols = [i for i in range(t.order) if i not in rows]
    if not rows or not cols:
        raise ShapeError("a flattening needs legs on both sides")
    M = group_legs(t, [rows, cols]).data
    return linalg.rank(t.field, M)


def flattening_lower_bound(t: Tensor) -> int:
    """Largest rank among the single-leg-versus-rest flattenings."""
    if t.order < 2:
        raise ShapeError("flattenings need order >= 2")
    return max(flattening_rank(t, [leg]) for leg in range(t.order))


@dataclass(frozen=True)
class FlatteningMap:
    """Linear map from the tensor space of ``dims`` to ``out_shape`` matrices.

    Either a leg grouping (``row_legs``) or an explicit matrix of shape
    ``(rows*cols, prod(dims))`` acting on row-major vectorized tensors.  The
    denominator is the caller's certified maximum rank of the image of a
    simple tensor.
    """

    dims: tuple[int, ...]
    out_shape: tuple[int, int]
    denominator: int = 1
    row_legs: tuple[int, ...] | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.denominator < 1:
            raise ValueError("denominator must be a positive integer")
        if (self.row_legs is None) == (self.matrix is None):
            raise ValueError("give exactly one of row_legs or matrix")
        size = math.prod(self.dims)
        if self.matrix is not None:
            if self.matrix.shape != (self.out_shape[0] * self.out_shape[1], size):
                raise ShapeError(f"matrix shape {self.matrix.shape} vs {self.out_shape} x {size}")
        else:
            rows = math.prod(self.dims[i] for i in self.row_legs)
            if rows * (size // rows) != size or self.out_shape != (rows, size // rows):
                raise ShapeError("row_legs inconsistent with out_shape")

    @classmethod
    def grouping(cls, dims: Sequence[int], row_legs: Sequence[int]) -> "FlatteningMap":
        dims = tuple(dims)
        row_legs = tuple(row_legs)
        if not row_legs or len(row_legs) == len(dims) or sorted(set(row_legs)) != sorted(row_legs):
            raise ShapeError(f"invalid row legs {row_legs}")
        if any(not 0 <= i < len(dims) for i in row_legs):
            raise ShapeError(f"invalid row legs {row_legs}")
        rows = math.prod(dims[i] for i in row_legs)
        return cls(dims, (rows, math.prod(dims) // rows), 1, row_legs)

    @classmethod
    def explicit(cls, dims, out_shape, matrix, denominator: int, field: FieldSpec) -> "FlatteningMap":
        return cls(tuple(dims), tuple(out_shape), int(denominator), None, field.asarray(matrix))

    def apply(self, t: Tensor) -> np.ndarray:
        if tuple(t.dims) != self.dims:
            raise ShapeError(f"tensor dims {t.dims} vs flattening dims {self.dims}")
        if self.row_legs is not None:
            cols = [i for i in range(len(self.dims)) if i not in self.row_legs]
            return group_legs(t, [list(self.row_legs), cols]).data
        vec = t.data.reshape(-1, 1)
        return t.field.matmul(self.matrix, vec).reshape(self.out_shape)

    def as_matrix(self, field: FieldSpec) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        size = math.prod(self.dims)
        M = field.zeros((size, size))
        eye = field.eye(size)
        for j in range(size):
            e = Tensor._wrap(eye[j].reshape(self.dims), field)
            M[:, j] = self.apply(e).reshape(-1)
        return M

    def kron(self, other: "FlatteningMap", field: FieldSpec) -> "FlatteningMap":
        """``F1 ⊠ F2`` on the space of ``t1 ⊗ t2`` (legs of ``t1`` first)."""
        k1 = len(self.dims)
        dims = self.dims + other.dims
        den = self.denominator * other.denominator
        if self.row_legs is not None and other.row_legs is not None:
            rows = self.row_legs + tuple(k1 + i for i in other.row_legs)
            out = FlatteningMap.grouping(dims, rows)
            return FlatteningMap(out.dims, out.out_shape, den, out.row_legs)
        A, B = self.as_matrix(field), other.as_matrix(field)
        r1, c1 = self.out_shape
        r2, c2 = other.out_shape
        K = field.reduce(np.kron(A, B))
        # rows of K are indexed (r1, c1, r2, c2); regroup to (r1, r2, c1, c2)
        perm = np.arange(r1 * c1 * r2 * c2).reshape(r1, c1, r2, c2).transpose(0, 2, 1, 3).reshape(-1)
        return FlatteningMap(dims, (r1 * r2, c1 * c2), den, None, K[perm])


def generalized_flattening_bound(t: Tensor, F: FlatteningMap) -> Fraction:
    """``rank(F(t)) / denominator``, exact."""
    return Fraction(linalg.rank(t.field, F.apply(t)), F.denominator)


@dataclass(frozen=True)
class ProductBound:
    bound: Fraction
    rank1: int
    rank2: int
    product_rank: int

    @property
    def multiplicative(self) -> bool:
        return self.product_rank == self.rank1 * self.rank2


def flattening_product_bound(t1: Tensor, F1: FlatteningMap, t2: Tensor, F2: FlatteningMap) -> ProductBound:
    """Border-rank lower bound for ``t1 ⊗ t2`` from two flattenings.

    Also evaluates ``F1 ⊠ F2`` on ``t1 ⊗ t2`` and checks that its rank is the
    product of the two ranks, raising ``ArithmeticError`` otherwise.
    """
    if t1.field != t2.field:
        raise FieldError("tensors over different fields")
    f = t1.field
    r1 = linalg.rank(f, F1.apply(t1))
    r2 = linalg.rank(f, F2.apply(t2))
    F12 = F1.kron(F2, f)
    r12 = linalg.rank(f, F12.apply(tensor_product(t1, t2)))
    if r12 != r1 * r2:
        raise ArithmeticError(f"rank of the product flattening is {r12}, expected {r1}*{r2}")
    return ProductBound(Fraction(r1, F1.denominator) * Fraction(r2, F2.denominator), r1, r2, r12)


# ---------------------------------------------------------------------------
# Substitution method
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubstitutionResult:
    value: int
    method: str  # "substitution" or "fallback"
    nodes: int

    def __int__(self):
        return self.value


def _strip_zero_slices(arr: np.ndarray) -> np.ndarray:
    for leg in range(arr.ndim):
        other = tuple(i for i in range(arr.ndim) if i != leg)
        keep = np.any(arr != 0, axis=other)
        if not keep.all():
            arr = np.compress(keep, arr, axis=leg)
    return arr


def _slice_rank_upper(field: FieldSpec, arr: np.ndarray) -> int:
    best = None
    for leg in range(3):
        s = sum(linalg.rank(field, np.take(arr, i, axis=leg)) for i in range(arr.shape[leg]))
        best = s if best is None else min(best, s)
    return best


def _flat3(field: FieldSpec, arr: np.ndarray) -> int:
    return max(linalg.rank(field, np.moveaxis(arr, leg, 0).reshape(arr.shape[leg], -1)) for leg in range(3))


def substitution_lower_bound(t: Tensor, max_nodes: int = 200_000) -> SubstitutionResult:
    """Rank lower bound by exhaustive slice substitution over a prime field.

    For a leg and a nonzero basis slice ``M_s``, every rank-``r``
    decomposition yields scalars ``c`` with
    ``rank(Σ_{j≠s} e_j ⊗ (M_j + c_j M_s)) <= r - 1``; minimizing over all
    ``c`` and maximizing over ``(leg, s)`` gives the bound, combined with
    flattenings at every node.  When the node budget is exhausted the
    flattening bound is returned with method ``"fallback"``.
    """
    field = t.field
    if not field.is_finite:
        raise FieldError("the substitution method enumerates scalars and needs a finite field")
    if t.order != 3:
        raise ShapeError("substitution_lower_bound handles order-3 tensors")
    p = field.p
    memo: dict = {}
    counter = [0]

    class _Stop(Exception):
        pass

    def rec(arr: np.ndarray) -> int:
        arr = _strip_zero_slices(arr)
        if arr.size == 0 or not np.any(arr != 0):
            return 0
        key = (arr.shape, arr.tobytes())
        if key in memo:
            return memo[key]
        counter[0] += 1
        if counter[0] > max_nodes:
            raise _Stop
        if min(arr.shape) == 1:
            leg = arr.shape.index(1)
            val = linalg.rank(field, np.take(arr, 0, axis=leg))
            memo[key] = val
            return val
        best = _flat3(field, arr)
        upper = _slice_rank_upper(field, arr)
        for leg in range(3):
            if best >= upper:
                break
            n = arr.shape[leg]
            moved = np.moveaxis(arr, leg, 0)
            for s in range(n):
                if best >= upper:
                    break
                Ms = moved[s]
                others = [j for j in range(n) if j != s]
                rest = moved[others]
                running = None
                for c in itertools.product(range(p), repeat=n - 1):
                    cv = np.asarray(c, dtype=np.int64).reshape(-1, 1, 1)
                    sub = np.mod(rest + cv * Ms[None], p)
                    v = rec(np.moveaxis(sub, 0, leg))
                    running = v if running is None else min(running, v)
                    if 1 + running <= best:
                        break
                if 1 + running > best:
                    best = 1 + running
        memo[key] = best
        return best

    data = np.asarray(t.data, dtype=np.int64)
    try:
        return SubstitutionResult(rec(data), "substitution", counter[0])
    except _Stop:
        return SubstitutionResult(flattening_lower_bound(t), "fallback", counter[0])


# ---------------------------------------------------------------------------
# Brute force
# ---------------------------------------------------------------------------


def projective_points(p: int, n: int) -> np.ndarray:
    """Nonzero vectors of ``F_p^n`` whose first nonzero coordinate is 1."""
    pts = []
    for lead in range(n):
        for tail in itertools.product(range(p), repeat=n - lead - 1):
            pts.append((0,) * lead + (1,) + tail)
    return np.asarray(pts, dtype=np.int64).reshape(-1, n)


def simple_tensor_atoms(p: int, dims: Sequence[int]) -> np.ndarray:
    """All projective simple tensors of the given dims, flattened row-major."""
    atoms = projective_points(p, dims[0])
    for d in dims[1:]:
        pts = projective_points(p, d)
        atoms = (atoms[:, None, :, None] * pts[None, :, None, :]).reshape(len(atoms) * len(pts), -1) % p
    return atoms


def _echelon_mod_p(rows: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    R = np.array(rows, dtype=np.int64) % p
    pivots = []
    r = 0
    for c in range(R.shape[1]):
        if r == R.shape[0]:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            R[[r, pr]] = R[[pr, r]]
        R[r] = R[r] * pow(int(R[r, c]), -1, p) % p
        others = np.flatnonzero(R[:, c])
        others = others[others != r]
        if others.size:
            R[others] = (R[others] - np.outer(R[others, c], R[r])) % p
        pivots.append(c)
        r += 1
    return R[:r], pivots


def _reduce_mod(vecs: np.ndarray, basis: np.ndarray, pivots: list[int], p: int) -> np.ndarray:
    """Reduce rows of ``vecs`` modulo the reduced echelon ``basis``."""
    out = np.array(vecs, dtype=np.int64) % p
    for row, c in zip(basis, pivots):
        coef = out[:, c].copy()
        nz = np.flatnonzero(coef)
        if nz.size:
            out[nz] = (out[nz] - np.outer(coef[nz], row)) % p
    return out


def _projective_normalize(vecs: np.ndarray, p: int) -> np.ndarray:
    """Scale each nonzero row so its first nonzero entry is 1."""
    out = vecs.copy()
    nz_rows = np.flatnonzero(np.any(out != 0, axis=1))
    if nz_rows.size:
        first = np.argmax(out[nz_rows] != 0, axis=1)
        lead = out[nz_rows, first]
        inv = np.array([0] + [pow(x, -1, p) for x in range(1, p)], dtype=np.int64)
        out[nz_rows] = out[nz_rows] * inv[lead][:, None] % p
    return out


def brute_force_rank(t: Tensor, rmax: int, budget: int = 5_000_000) -> int | None:
    """Exact rank over a prime field by exhaustive search, or ``None`` if above ``rmax``.

    Let ``S`` be the span of the slices along the smallest leg.  Then
    ``rank(t) <= r`` iff some ``Ω ⊇ S`` of dimension ``r`` is spanned by the
    simple tensors it contains, and such an ``Ω`` can be taken to be ``S``
    plus ``r - dim S`` projective simple tensors.  Choices only matter
    modulo the span built so far, so candidates are deduplicated by their
    projective class at every level.
    """
    field = t.field
    if not field.is_finite:
        raise FieldError("brute force needs a finite field")
    p = field.p
    if t.is_zero():
        return 0
    if t.order == 1:
        return 1 if rmax >= 1 else None
    if t.order == 2:
        r = linalg.rank(field, t.data)
        return r if r <= rmax else None
    leg = int(np.argmin(t.dims))
    rest_dims = [d for i, d in enumerate(t.dims) if i != leg]
    slices = np.moveaxis(np.asarray(t.data, dtype=np.int64), leg, 0).reshape(t.dims[leg], -1)
    S, S_piv = _echelon_mod_p(slices, p)
    s = len(S)
    n_atoms = math.prod((p**d - 1) // (p - 1) for d in rest_dims)
    if n_atoms > budget:
        raise BudgetExceeded(f"{n_atoms} simple tensors exceed the budget {budget}")
    atoms = simple_tensor_atoms(p, rest_dims)
    for r in range(s, rmax + 1):
        if _spanned_extension(atoms, S, S_piv, r - s, r, p, budget):
            return r
    return None


def _classes(vecs: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Projective classes of the nonzero rows: (representatives, label per row, -1 for zero)."""
    norm = _projective_normalize(vecs, p)
    zero = ~np.any(norm != 0, axis=1)
    labels = np.full(len(vecs), -1, dtype=np.int64)
    if (~zero).any():
        reps, inv = np.unique(norm[~zero], axis=0, return_inverse=True)
        labels[~zero] = inv.reshape(-1)
    else:
        reps = norm[:0]
    return reps, labels


def _spanned_extension(atoms, basis, pivots, k, target_dim, p, budget) -> bool:
    """Is there an extension of span(basis) by ``k`` atoms spanned by its atoms?"""
    red = _reduce_mod(atoms, basis, pivots, p) if len(basis) else atoms % p
    inside = ~np.any(red != 0, axis=1)
    if k == 0:
        if len(basis) == 0:
            return True
        return _span_dim(atoms[inside], p) == target_dim
    reps, labels = _classes(red, p)
    if k == 1:
        # Ω is fixed by the class of the new atom; its atoms are the ones
        # already inside plus the ones in that class
        base_atoms = atoms[inside]
        for c in range(len(reps)):
            members = atoms[labels == c]
            if _span_dim(np.concatenate([base_atoms, members]), p) == target_dim:
                return True
        return False
    if len(reps) ** k > budget:
        raise BudgetExceeded(f"about {len(reps)}^{k} extensions exceed the budget {budget}")
    # the next atom only matters through its class modulo the current span
    for c in range(len(reps)):
        rep = atoms[np.flatnonzero(labels == c)[0]]
        nb, npiv = _echelon_mod_p(np.concatenate([basis, rep[None]]) if len(basis) else rep[None], p)
        if _spanned_extension(atoms, nb, npiv, k - 1, target_dim, p, budget):
            return True
    return False


def _span_dim(vecs: np.ndarray, p: int) -> int:
    if len(vecs) == 0:
        return 0
    return len(_echelon_mod_p(vecs, p)[1])


@lru_cache(maxsize=8)
def gf2_rank_table(dims: tuple[int, ...]) -> np.ndarray:
    """Rank of every tensor over ``F_2`` with the given dims, by breadth-first search.

    The tensor with row-major entries ``x_i`` has code ``Σ x_i 2^i``; sums of
    simple tensors are XORs of codes.  Entry 255 would mean unreachable, which
    cannot happen because the simple tensors span the space.
    """
    size = math.prod(dims)
    if size > 24:
        raise BudgetExceeded(f"2^{size} tensors is too many for a table")
    atoms = simple_tensor_atoms(2, list(dims))
    weights = (1 << np.arange(size, dtype=np.int64))
    codes = (atoms * weights).sum(axis=1)
    dist = np.full(1 << size, 255, dtype=np.uint8)
    dist[0] = 0
    frontier = np.array([0], dtype=np.int64)
    r = 0
    while frontier.size:
        r += 1
        nxt = []
        for start in range(0, frontier.size, 4096):
            cand = (frontier[start : start + 4096, None] ^ codes[None, :]).reshape(-1)
            cand = np.unique(cand)
            cand = cand[dist[cand] == 255]
            dist[cand] = r
            nxt.append(cand)
        frontier = np.concatenate(nxt) if nxt else np.array([], dtype=np.int64)
    return dist


def gf2_code(t: Tensor) -> int:
    bits = np.asarray(t.data, dtype=np.int64).reshape(-1)
    return int((bits << np.arange(bits.size, dtype=np.int64)).sum())


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class RankBoundReport:
    upper: int | None
    lower: Fraction
    methods: list = dc_field(default_factory=list)

    def __post_init__(self):
        if self.upper is not None and self.lower > self.upper:
            raise InconsistentBoundsError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    @property
    def lower_int(self) -> int:
        return math.ceil(self.lower)

    @property
    def determined(self) -> bool:
        return self.upper is not None and self.lower_int == self.upper

    def to_json(self) -> dict:
        lo = self.lower
        return {
            "upper": self.upper,
            "lower": f"{lo.numerator}/{lo.denominator}",
            "lower_int": self.lower_int,
            "methods": self.methods,
            "determined": self.determined,
        }


LOWER_METHODS = ("flattening", "substitution", "pencil", "brute_force")


def certify_rank(
    t: Tensor,
    dec: Decomposition | None = None,
    lower_methods: Iterable[str] = ("flattening",),
    rmax: int | None = None,
) -> RankBoundReport:
    """Bracket the rank of ``t``: upper from a verified decomposition, lower from the methods.

    ``"pencil"`` gives the exact rank of a ``2 x n x m`` tensor over a finite
    field (and the rank over ``C``, a lower bound, over ``Q``); the other lower
    methods are described at their functions.
    """
    methods = []
    upper = None
    if dec is not None:
        if dec.field != t.field or tuple(dec.dims) != tuple(t.dims) or eval_decomposition(dec) != t:
            raise ValueError("decomposition does not evaluate to the tensor")
        upper = len(dec)
        methods.append({"method": "decomposition", "bound": "upper", "value": upper})
    lower = Fraction(0)
    for m in lower_methods:
        exact = None
        if m == "flattening":
            v = Fraction(flattening_lower_bound(t))
            tag = "flattening"
        elif m == "substitution":
            res = substitution_lower_bound(t)
            v, tag = Fraction(res.value), res.method
        elif m == "pencil":
            from .pencil import pencil_rank_of_tensor

            v, tag = Fraction(pencil_rank_of_tensor(t)), "pencil"
            if t.field.is_finite:
                exact = int(v)
        elif m == "brute_force":
            cap = rmax if rmax is not None else (upper if upper is not None else sum(t.dims))
            r = brute_force_rank(t, cap)
            if r is None:
                v, tag = Fraction(cap + 1), "brute_force"
            else:
                v, tag = Fraction(r), "brute_force"
                exact = r
        else:
            raise ValueError(f"unknown lower-bound method {m!r}")
        methods.append({"method": tag, "bound": "lower", "value": str(v)})
        lower = max(lower, v)
        if exact is not None and (upper is None or exact < upper):
            upper = exact
            methods.append({"method": tag, "bound": "upper", "value": exact})
    return RankBoundReport(upper, lower, methods)
