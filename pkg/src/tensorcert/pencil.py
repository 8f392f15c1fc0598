"""Matrix pencils: Kronecker canonical form and the exact rank formula.

A tensor ``t`` of shape ``(2, n, m)`` is the pencil ``b_1⊗S_1 + b_2⊗S_2``
with slices ``S_i = t[i]``.  Under ``(A, B, C)`` the slices become
``Σ_j A_ij B S_j C^T``.

Canonical blocks (slices listed as ``(K_1, K_2)``):

* ``L_ε``: ``ε x (ε+1)``, ``([I | 0], [0 | I])``
* ``N_η``: ``(η+1) x η``, ``([I ; 0], [0 ; I])``
* regular: ``(I, F)`` with ``F`` block diagonal of companion matrices
* infinite (only over tiny fields, see below): ``(J, I)``, ``J`` nilpotent

Minimal indices are read off kernel dimensions of block Toeplitz matrices,
which works over every field.  Invariant factors come from a polynomial
Smith form.  When some point ``(a:b)`` makes ``a S_1 + b S_2`` attain the
normal rank it is moved to the first slice, so the regular part has the
``(I, F)`` shape; over ``F_q`` with few points this can fail, and the
regular part then also carries infinite elementary divisors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import linalg
from .exactfield import FieldError, FieldSpec, Poly, format_poly, poly_gcd, poly_powmod
from .tensorcore import ShapeError, Tensor, direct_sum_shared_first_leg, kronecker_product


class FormulaNotApplicable(FieldError):
    """The rank formula is not established for this pencil over this field."""


# ---------------------------------------------------------------------------
# Blocks
# ---------------------------------------------------------------------------


def l_block(eps: int, field: FieldSpec = FieldSpec.rationals()) -> Tensor:
    """``L_ε = b_1⊗Σ_{i≤ε} b_i⊗b_i + b_2⊗Σ_{i≤ε} b_i⊗b_{i+1}``, shape ``(2, ε, ε+1)``."""
    if eps < 1:
        raise ShapeError("explicit L blocks need eps >= 1")
    arr = field.zeros((2, eps, eps + 1))
    for i in range(eps):
        arr[0, i, i] = field.one()
        arr[1, i, i + 1] = field.one()
    return Tensor._wrap(arr, field)


def n_block(eta: int, field: FieldSpec = FieldSpec.rationals()) -> Tensor:
    """``N_η = b_1⊗Σ_{i≤η} b_i⊗b_i + b_2⊗Σ_{i≤η} b_{i+1}⊗b_i``, shape ``(2, η+1, η)``."""
    if eta < 1:
        raise ShapeError("explicit N blocks need eta >= 1")
    arr = field.zeros((2, eta + 1, eta))
    for i in range(eta):
        arr[0, i, i] = field.one()
        arr[1, i + 1, i] = field.one()
    return Tensor._wrap(arr, field)


def companion(p: Poly) -> np.ndarray:
    """Companion matrix with ones on the superdiagonal and ``-c_j`` in the last row.

    ``x^2`` gives ``[[0, 1], [0, 0]]``.
    """
    f = p.field
    p = p.monic()
    d = int(p.degree)
    C = f.zeros((d, d))
    for i in range(d - 1):
        C[i, i + 1] = f.one()
    for j in range(d):
        C[d - 1, j] = f.neg(p.coefficient(j))
    return C


def nilpotent_block(a: int, field: FieldSpec) -> np.ndarray:
    J = field.zeros((a, a))
    for i in range(a - 1):
        J[i, i + 1] = field.one()
    return J


def regular_block(invariant_factors, field: FieldSpec, infinite_indices=()) -> Tensor | None:
    """``b_1⊗I + b_2⊗F`` (plus ``b_1⊗J + b_2⊗I`` for infinite divisors), or ``None`` if empty."""
    mats = [(field.eye(int(p.degree)), companion(p)) for p in invariant_factors if p.degree > 0]
    mats += [(nilpotent_block(a, field), field.eye(a)) for a in infinite_indices if a > 0]
    if not mats:
        return None
    parts = [Tensor._wrap(np.stack([K1, K2]), field) for K1, K2 in mats]
    return direct_sum_shared_first_leg(parts)


# ---------------------------------------------------------------------------
# Polynomial helpers
# ---------------------------------------------------------------------------


def _x(field: FieldSpec) -> Poly:
    return Poly.monomial(1, field, var="x")


def _const(c, field: FieldSpec) -> Poly:
    return Poly.constant(c, field, var="x")


def linear_pencil(field: FieldSpec, K1: np.ndarray, K2: np.ndarray, sign: int = -1) -> list[list[Poly]]:
    """The polynomial matrix ``x K1 + sign * K2``."""
    n, m = K1.shape
    s = field.element(sign)
    return [
        [Poly([field.mul(s, K2[i, j]), K1[i, j]], field, "x") for j in range(m)]
        for i in range(n)
    ]


# Residue-list polynomials mod p (low degree first, no trailing zeros); the
# Smith form below is the hot loop of exhaustive pencil scans.


def _ptrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _psub(a, b, p):
    n = max(len(a), len(b))
    return _ptrim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)])


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _ptrim(out)


def _pdivmod(a, b, p):
    r = list(a)
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(r) >= len(b):
        c = r[-1] * inv % p
        s = len(r) - len(b)
        q[s] = c
        for i, y in enumerate(b):
            r[s + i] = (r[s + i] - c * y) % p
        _ptrim(r)
    return _ptrim(q), r


def _smith_mod_p(A: list[list[list[int]]], p: int) -> list[list[int]]:
    n = len(A)
    m = len(A[0]) if n else 0
    diag = []
    k = 0
    while k < min(n, m):
        cands = [(len(A[i][j]), i, j) for i in range(k, n) for j in range(k, m) if A[i][j]]
        if not cands:
            break
        _, i, j = min(cands)
        A[k], A[i] = A[i], A[k]
        for row in A:
            row[k], row[j] = row[j], row[k]
        while True:
            piv = A[k][k]
            clean = True
            for i in range(k + 1, n):
                if A[i][k]:
                    q, r = _pdivmod(A[i][k], piv, p)
                    A[i] = [_psub(a, _pmul(q, b, p), p) for a, b in zip(A[i], A[k])]
                    clean = clean and not r
            for j in range(k + 1, m):
                if A[k][j]:
                    q, r = _pdivmod(A[k][j], piv, p)
                    for row in A:
                        row[j] = _psub(row[j], _pmul(q, row[k], p), p)
                    clean = clean and not r
            if not clean:
                cands = [(len(A[i][k]), i, k) for i in range(k + 1, n) if A[i][k]]
                cands += [(len(A[k][j]), k, j) for j in range(k + 1, m) if A[k][j]]
                _, i, j = min(cands)
                A[k], A[i] = A[i], A[k]
                for row in A:
                    row[k], row[j] = row[j], row[k]
                continue
            bad = next(
                (i for i in range(k + 1, n) for j in range(k + 1, m) if A[i][j] and _pdivmod(A[i][j], piv, p)[1]),
                None,
            )
            if bad is None:
                break
            A[k] = [_psub(a, [(-c) % p for c in b], p) for a, b in zip(A[k], A[bad])]
        inv = pow(A[k][k][-1], -1, p)
        diag.append([c * inv % p for c in A[k][k]])
        k += 1
    return diag


def _pencil_smith(field: FieldSpec, K1: np.ndarray, K2: np.ndarray) -> list[Poly]:
    """Invariant factors of ``x K1 - K2`` (all of them, constants included)."""
    if field.is_finite and field.kind == "prime":
        p = field.characteristic
        n, m = K1.shape
        R = [[_ptrim([-int(K2[i, j]) % p, int(K1[i, j]) % p]) for j in range(m)] for i in range(n)]
        return [Poly._raw(d, field, "x") for d in _smith_mod_p(R, p)]
    return smith_invariant_factors(linear_pencil(field, K1, K2), field)


def smith_invariant_factors(M: list[list[Poly]], field: FieldSpec) -> list[Poly]:
    """Nonzero diagonal of the Smith normal form over ``F[x]`` (monic, a divisibility chain)."""
    if field.is_finite and field.kind == "prime":
        p = field.characteristic
        R = [[_ptrim([int(c) % p for c in e.coeffs]) for e in row] for row in M]
        return [Poly(d, field, M[0][0].var) for d in _smith_mod_p(R, p)]
    A = [list(row) for row in M]
    n = len(A)
    m = len(A[0]) if n else 0
    diag: list[Poly] = []
    k = 0
    while k < min(n, m):
        best = None
        for i in range(k, n):
            for j in range(k, m):
                e = A[i][j]
                if not e.is_zero() and (best is None or e.degree < best[0]):
                    best = (e.degree, i, j)
                    if e.degree == 0:
                        break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, i, j = best
        A[k], A[i] = A[i], A[k]
        for row in A:
            row[k], row[j] = row[j], row[k]
        while True:
            piv = A[k][k]
            clean = True
            for i in range(k + 1, n):
                if not A[i][k].is_zero():
                    q, r = A[i][k].divmod(piv)
                    A[i] = [a - q * b for a, b in zip(A[i], A[k])]
                    if not r.is_zero():
                        clean = False
            for j in range(k + 1, m):
                if not A[k][j].is_zero():
                    q, r = A[k][j].divmod(piv)
                    for row in A:
                        row[j] = row[j] - q * row[k]
                    if not r.is_zero():
                        clean = False
            if not clean:
                # a remainder of lower degree is left in row or column k; make it the pivot
                cands = [(A[i][k].degree, i, k) for i in range(k + 1, n) if not A[i][k].is_zero()]
                cands += [(A[k][j].degree, k, j) for j in range(k + 1, m) if not A[k][j].is_zero()]
                _, i, j = min(cands)
                A[k], A[i] = A[i], A[k]
                for row in A:
                    row[k], row[j] = row[j], row[k]
                continue
            bad = None
            for i in range(k + 1, n):
                for j in range(k + 1, m):
                    if not A[i][j].is_zero() and not piv.divides(A[i][j]):
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            A[k] = [a + b for a, b in zip(A[k], A[bad])]
        diag.append(A[k][k].monic())
        k += 1
    return diag


def squarefree_factorization(f: Poly) -> list[tuple[Poly, int]]:
    """Pairwise coprime ``(g, mult)`` with ``f = lead · Π g^mult`` (handles ``p``-th powers)."""
    field = f.field
    if f.degree <= 0:
        return []
    f = f.monic()
    out = []
    c = poly_gcd(f, f.derivative()) if not f.derivative().is_zero() else f
    w = f // c
    i = 1
    while w.degree > 0:
        y = poly_gcd(w, c)
        fac = w // y
        if fac.degree > 0:
            out.append((fac.monic(), i))
        w = y
        c = c // y
        i += 1
    if c.degree > 0:
        p = field.characteristic
        if p == 0:
            raise ArithmeticError("unreachable in characteristic 0")
        root = Poly([c.coefficient(i) for i in range(0, int(c.degree) + 1, p)], field, c.var)
        out += [(g, mult * p) for g, mult in squarefree_factorization(root)]
    return out


def repeated_radical(f: Poly) -> Poly:
    """Product of the distinct irreducible ``g`` with ``g^2 | f``."""
    out = _const(1, f.field).with_var(f.var)
    for g, mult in squarefree_factorization(f):
        if mult >= 2:
            out = out * g
    return out


def _gcd_free_basis(polys: list[Poly]) -> list[Poly]:
    """Pairwise coprime nonconstant polynomials whose products give every input's radical."""
    basis: list[Poly] = []
    for p in polys:
        if p.degree <= 0:
            continue
        todo = [p]
        while todo:
            q = todo.pop()
            if q.degree <= 0:
                continue
            for idx, b in enumerate(basis):
                g = poly_gcd(q, b)
                if g.degree > 0:
                    basis.pop(idx)
                    basis += [x for x in (g, b // g) if x.degree > 0]
                    todo += [q // g]
                    break
            else:
                basis.append(q.monic())
    # second pass until stable
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(range(len(basis)), 2):
            g = poly_gcd(basis[a], basis[b])
            if g.degree > 0:
                x, y = basis[a], basis[b]
                basis = [v for i, v in enumerate(basis) if i not in (a, b)]
                basis += [v for v in (g, x // g, y // g) if v.degree > 0]
                changed = True
                break
    return basis


def m_of_F(invariant_factors) -> int:
    """Largest number of Jordan blocks of size at least two sharing one eigenvalue.

    For each irreducible ``g`` this count is ``#{i : g^2 | p_i}``; it is taken
    over a gcd-free basis of the repeated radicals, so no factorization into
    irreducibles is needed.
    """
    reps = [repeated_radical(p) for p in invariant_factors if p.degree > 0]
    basis = _gcd_free_basis(reps)
    best = 0
    for g in basis:
        best = max(best, sum(1 for r in reps if r.degree > 0 and poly_gcd(g, r).degree > 0))
    return best


def splits_into_distinct_linear(p: Poly) -> bool:
    """``p | x^q - x`` over ``F_q``."""
    f = p.field
    if not f.is_finite:
        raise FieldError("splitting test is for finite fields")
    if p.degree <= 0:
        return True
    x = Poly.monomial(1, f, var=p.var)
    return ((poly_powmod(x, f.cardinality, p) - x) % p).is_zero()


def delta_of_B(invariant_factors, infinite_indices=()) -> int:
    """Invariant divisors that are not products of distinct non-associated linear forms.

    The homogeneous divisor is ``y^a · p(x, y)``; it splits into distinct
    linear forms iff ``a <= 1`` and ``p | x^q - x``.  ``infinite_indices``
    gives the exponents ``a`` aligned with the largest invariant factors.
    """
    count = 0
    for p, a in _homogeneous_divisors(invariant_factors, infinite_indices):
        if not (a <= 1 and (p is None or splits_into_distinct_linear(p))):
            count += 1
    return count


def _homogeneous_divisors(invariant_factors, infinite_indices):
    """Pairs ``(p, a)`` for the nontrivial divisors ``y^a · p``; ``p`` is ``None`` if constant."""
    fs = [p for p in invariant_factors if p.degree > 0]
    inf = sorted(a for a in infinite_indices if a > 0)
    # align both chains at the top: the largest divisor carries the largest y-power
    length = max(len(fs), len(inf))
    fs = [None] * (length - len(fs)) + fs
    inf = [0] * (length - len(inf)) + inf
    return list(zip(fs, inf))


def formula_block_size(cf: "PencilCanonicalForm") -> int:
    """Largest of the minimal indices and the invariant divisor degrees.

    Over ``F_q`` the rank formula is applied when ``q`` is at least this size.
    It never exceeds ``max(n, m)`` and is unchanged under ``t ↦ diag(t, ..., t)``.
    """
    sizes = list(cf.eps_indices) + list(cf.eta_indices)
    sizes += [(p.degree if p is not None else 0) + a
              for p, a in _homogeneous_divisors(cf.invariant_factors, cf.infinite_indices)]
    return max(sizes, default=0)


# ---------------------------------------------------------------------------
# Canonical form
# ---------------------------------------------------------------------------


@dataclass
class BasisChange:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def apply(self, t: Tensor) -> Tensor:
        f = t.field
        S = [t.data[0], t.data[1]]
        out = []
        for i in range(2):
            K = f.reduce(f.scale(S[0], self.A[i, 0]) + f.scale(S[1], self.A[i, 1]))
            out.append(f.matmul(f.matmul(self.B, K), self.C.T))
        return Tensor._wrap(np.stack(out), f)

    def to_json(self, field: FieldSpec) -> dict:
        fmt = lambda M: [[field.format(x) for x in row] for row in M]  # noqa: E731
        return {"A": fmt(self.A), "B": fmt(self.B), "C": fmt(self.C)}


@dataclass
class PencilCanonicalForm:
    field: FieldSpec
    shape: tuple[int, int]
    zero_rows: int
    zero_cols: int
    eps_indices: list[int]
    eta_indices: list[int]
    invariant_factors: list[Poly]
    infinite_indices: list[int] = dc_field(default_factory=list)
    A: np.ndarray | None = None
    basis_change: BasisChange | None = None

    @property
    def ell(self) -> int:
        return sum(int(p.degree) for p in self.invariant_factors) + sum(self.infinite_indices)

    @property
    def normal_rank(self) -> int:
        return sum(self.eps_indices) + sum(self.eta_indices) + self.ell

    def check_dimensions(self):
        n, m = self.shape
        rows = self.zero_rows + sum(self.eps_indices) + sum(e + 1 for e in self.eta_indices) + self.ell
        cols = self.zero_cols + sum(e + 1 for e in self.eps_indices) + sum(self.eta_indices) + self.ell
        if (rows, cols) != (n, m):
            raise ArithmeticError(f"canonical blocks give {rows}x{cols}, pencil is {n}x{m}")

    def assemble(self) -> Tensor:
        """The canonical tensor ``diag(0, L_ε..., N_η..., M)`` of shape ``(2, n, m)``."""
        f = self.field
        n, m = self.shape
        blocks = [l_block(e, f) for e in self.eps_indices]
        blocks += [n_block(e, f) for e in self.eta_indices]
        reg = regular_block(self.invariant_factors, f, self.infinite_indices)
        if reg is not None:
            blocks.append(reg)
        out = f.zeros((2, n, m))
        if blocks:
            body = direct_sum_shared_first_leg(blocks).data
            out[:, self.zero_rows :, self.zero_cols :] = body
        return Tensor._wrap(out, f)

    def to_json(self) -> dict:
        out = {
            "zero": [self.zero_rows, self.zero_cols],
            "eps": list(self.eps_indices),
            "eta": list(self.eta_indices),
            "invariant_factors": [format_poly(p) for p in self.invariant_factors],
            "infinite": list(self.infinite_indices),
            "ell": self.ell,
        }
        if self.basis_change is not None:
            out["basis_change"] = self.basis_change.to_json(self.field)
        return out


def _as_pencil(t: Tensor) -> tuple[np.ndarray, np.ndarray]:
    if t.order != 3 or t.dims[0] > 2:
        raise ShapeError(f"a pencil has shape (2, n, m) or (1, n, m), got {t.dims}")
    S1 = np.array(t.data[0])
    S2 = np.array(t.data[1]) if t.dims[0] == 2 else t.field.zeros(S1.shape)
    return S1, S2


def _kernel_dims(field: FieldSpec, S1: np.ndarray, S2: np.ndarray, jmax: int) -> list[int]:
    """``dim ker T_j`` for ``j = 0..jmax`` where ``T_j`` encodes ``(S_2 + x S_1) v(x) = 0``, ``deg v <= j``."""
    n, m = S1.shape
    dims = []
    for j in range(jmax + 1):
        T = field.zeros(((j + 2) * n, (j + 1) * m))
        for c in range(j + 1):
            T[c * n : (c + 1) * n, c * m : (c + 1) * m] = S2
            T[(c + 1) * n : (c + 2) * n, c * m : (c + 1) * m] = S1
        dims.append((j + 1) * m - linalg.rank(field, T))
    return dims


def minimal_indices(field: FieldSpec, S1: np.ndarray, S2: np.ndarray, count: int) -> list[int]:
    """The ``count`` right minimal indices, ascending (zeros included)."""
    out: list[int] = []
    if count == 0:
        return out
    n, m = S1.shape
    prev2 = prev1 = 0
    j = 0
    while len(out) < count:
        k = _kernel_dims(field, S1, S2, j)[-1]
        at_most_j = k - prev1  # #{ε <= j}
        exactly = at_most_j - (prev1 - prev2)
        out += [j] * exactly
        prev2, prev1 = prev1, k
        j += 1
        if j > m + 1:
            raise ArithmeticError("minimal index search did not terminate")
    return out


def _projective_points(field: FieldSpec, limit: int):
    """Up to ``limit`` distinct points ``(a:b)``; all ``q+1`` over ``F_q``."""
    yield (field.one(), field.zero())
    yield (field.zero(), field.one())
    count = 2
    for j in itertools.count(1):
        if count >= limit:
            return
        if field.is_finite and j >= field.cardinality:
            return
        yield (field.element(j), field.one())
        count += 1


def _combine(field, S1, S2, a, b):
    return field.reduce(field.scale(S1, a) + field.scale(S2, b))


def kronecker_canonical_form(t: Tensor, basis_change: bool = False, seed: int = 0):
    """Canonical form of a pencil; with ``basis_change=True`` also ``(A, B, C)``.

    Returns ``(form, change)`` where ``change`` is ``None`` unless requested.
    """
    field = t.field
    S1, S2 = _as_pencil(t)
    n, m = S1.shape
    small = min(n, m)
    # normal rank: among small+1 points at least one attains it
    points = list(_projective_points(field, small + 1))
    ranks = [linalg.rank(field, _combine(field, S1, S2, a, b)) for a, b in points]
    if len(points) >= small + 1:
        nrank = max(ranks)
    else:
        nrank = len(_pencil_smith(field, S1, S2))
    eps_all = minimal_indices(field, S1, S2, m - nrank)
    eta_all = minimal_indices(field, S1.T.copy(), S2.T.copy(), n - nrank)
    regular = [pt for pt, r in zip(points, ranks) if r == nrank]
    if regular:
        a, b = regular[0]
        A = field.asarray([[a, b], [0, 1]] if a != 0 else [[a, b], [1, 0]])
        K1 = _combine(field, S1, S2, A[0, 0], A[0, 1])
        K2 = _combine(field, S1, S2, A[1, 0], A[1, 1])
        inv = [p for p in _pencil_smith(field, K1, K2) if p.degree > 0]
        infinite: list[int] = []
    else:
        A = field.eye(2)
        K1, K2 = S1, S2
        inv = [p for p in _pencil_smith(field, K1, K2) if p.degree > 0]
        rev = _pencil_smith(field, K2, K1)
        infinite = sorted(int(p.valuation) for p in rev if p.valuation > 0)
    form = PencilCanonicalForm(
        field,
        (n, m),
        zero_rows=eta_all.count(0),
        zero_cols=eps_all.count(0),
        eps_indices=[e for e in eps_all if e > 0],
        eta_indices=[e for e in eta_all if e > 0],
        invariant_factors=inv,
        infinite_indices=infinite,
        A=A,
    )
    form.check_dimensions()
    change = None
    if basis_change:
        change = _find_basis_change(form, t, K1, K2, seed)
        form.basis_change = change
    return form, change


def _find_basis_change(form: PencilCanonicalForm, t: Tensor, K1, K2, seed: int, tries: int = 400) -> BasisChange:
    """Solve ``K_i Ct = P Z_i`` and pick a solution with ``P``, ``Ct`` invertible."""
    field = form.field
    n, m = form.shape
    Z = form.assemble()
    Z1, Z2 = Z.data[0], Z.data[1]
    blocks = []
    for K, Zi in ((K1, Z1), (K2, Z2)):
        left = field.scale(np.kron(field.eye(n), Zi.T), -1)
        right = np.kron(K, field.eye(m))
        blocks.append(np.concatenate([field.reduce(left), field.asarray(right)], axis=1))
    N = linalg.nullspace(field, np.concatenate(blocks, axis=0))
    if N.shape[1] == 0:
        raise ArithmeticError("no intertwiner between the pencil and its canonical form")
    rng = np.random.default_rng(seed)
    for attempt in range(tries):
        if attempt == 0 and N.shape[1] == 1:
            coef = field.asarray([1])
        else:
            coef = field.random_array(rng, N.shape[1], -5, 5)
        sol = field.matmul(N, coef.reshape(-1, 1)).reshape(-1)
        P = sol[: n * n].reshape(n, n)
        Ct = sol[n * n :].reshape(m, m)
        if linalg.is_invertible(field, P) and linalg.is_invertible(field, Ct):
            change = BasisChange(form.A, linalg.inverse(field, P), Ct.T.copy())
            if change.apply(t) != Z:
                raise ArithmeticError("basis change does not reproduce the canonical form")
            return change
    raise ArithmeticError(f"no invertible basis change found in {tries} random tries")


# ---------------------------------------------------------------------------
# Rank
# ---------------------------------------------------------------------------


def pencil_rank(cf: PencilCanonicalForm, allow_small_field: bool = False) -> int:
    """``Σ(ε_i+1) + Σ(η_i+1) + ℓ`` plus ``m(F)`` (infinite fields) or ``δ(B)`` (finite fields).

    ``m(F)`` counts Jordan blocks over the algebraic closure, so over ``Q`` (and
    ``Q(√D)``) the value is the rank over ``C``.  That is always a lower bound
    for the rank over the base field and equals it when the invariant factors
    split into linear factors there; ``x^2 + 1`` gives 2 over ``C`` but the
    rational rank is 3.

    Over ``F_q`` the count ``δ(B)`` is established for ``q >= n, m``.  The check
    used here is the blockwise form of that condition, ``q >= formula_block_size``
    (every minimal index and invariant divisor degree at most ``q``); it is
    implied by ``q >= n, m`` and is what the multiplicativity argument for
    ``diag(t, ..., t)`` relies on.  Smaller fields raise
    :class:`FormulaNotApplicable` unless ``allow_small_field``.
    """
    singular = sum(e + 1 for e in cf.eps_indices) + sum(e + 1 for e in cf.eta_indices)
    f = cf.field
    if not f.is_finite:
        if cf.infinite_indices:
            raise ArithmeticError("infinite divisors never remain over an infinite field")
        return singular + cf.ell + m_of_F(cf.invariant_factors)
    size = formula_block_size(cf)
    if f.cardinality < size and not allow_small_field:
        raise FormulaNotApplicable(
            f"the finite-field formula needs q >= every block size; here q = {f.cardinality}, block size = {size}"
        )
    return singular + cf.ell + delta_of_B(cf.invariant_factors, cf.infinite_indices)


def pencil_rank_of_tensor(t: Tensor, allow_small_field: bool = False) -> int:
    cf, _ = kronecker_canonical_form(t)
    return pencil_rank(cf, allow_small_field)


@dataclass
class MultiplicativityReport:
    rank_t: int
    r: int
    rank_product: int
    blocks_match: bool

    @property
    def holds(self) -> bool:
        return self.rank_product == self.r * self.rank_t

    def to_json(self) -> dict:
        return {
            "rank_t": self.rank_t,
            "r": self.r,
            "rank_kron": self.rank_product,
            "expected": self.r * self.rank_t,
            "holds": self.holds,
            "direct_sum_matches": self.blocks_match,
            "rank_tensor_product": self.rank_product if self.holds else None,
        }


def diagonal_matrix_tensor(r: int, field: FieldSpec) -> Tensor:
    """``1 ⊗ Σ_{i≤r} b_i⊗b_i`` of shape ``(1, r, r)``."""
    return Tensor._wrap(field.eye(r).reshape(1, r, r), field)


def rank_normal_form_size(s: Tensor) -> int:
    """For ``s`` of shape ``(1, d, d')``: ``s`` is equivalent to ``1 ⊗ Σ_{i≤r} b_i⊗b_i`` padded by zeros."""
    if s.order != 3 or s.dims[0] != 1:
        raise ShapeError("s must have shape (1, d, d')")
    return linalg.rank(s.field, s.data[0])


def pencil_multiplicativity_check(t: Tensor, r: int | None = None, s: Tensor | None = None,
                                  allow_small_field: bool = False) -> MultiplicativityReport:
    """Check ``rank(t ⊠ s) = rank(s) · rank(t)`` through canonical forms.

    ``s`` defaults to ``1 ⊗ Σ_{i≤r} b_i⊗b_i``.  A general ``s`` of shape
    ``(1, d, d')`` is equivalent to that diagonal tensor with ``r = rank(s)``
    plus zero rows and columns, which do not change ranks.  Since grouping
    legs cannot raise rank, ``rank(t⊠s) <= rank(t⊗s) <= rank(t)·rank(s)``,
    so equality here pins ``rank(t⊗s)`` as well.
    """
    field = t.field
    if s is None:
        if r is None:
            raise ValueError("give r or s")
        s = diagonal_matrix_tensor(r, field)
    r = rank_normal_form_size(s)
    rank_t = pencil_rank_of_tensor(t, allow_small_field)
    ts = kronecker_product(t, s)
    rank_ts = pencil_rank_of_tensor(ts, allow_small_field)
    blocks_match = True
    if s.dims[1] == s.dims[2] == r and s == diagonal_matrix_tensor(r, field):
        # t ⊠ diag_r is the r-fold direct sum up to interleaving rows and columns
        ds = direct_sum_shared_first_leg([t] * r).data
        n, m = t.dims[1], t.dims[2]
        perm_r = np.arange(n * r).reshape(n, r).T.reshape(-1)
        perm_c = np.arange(m * r).reshape(m, r).T.reshape(-1)
        blocks_match = bool(np.all(ts.data[:, perm_r][:, :, perm_c] == ds))
    return MultiplicativityReport(rank_t, r, rank_ts, blocks_match)


def random_pencil(field: FieldSpec, rng: np.random.Generator, max_n: int = 4, max_m: int = 4) -> Tensor:
    """A random ``2 x n x m`` tensor with ``1 <= n <= max_n`` and ``1 <= m <= max_m``."""
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    return Tensor._wrap(field.random_array(rng, (2, n, m)), field)
