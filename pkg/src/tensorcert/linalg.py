"""Gaussian elimination over an exact field.

All routines take the :class:`FieldSpec` explicitly and work on numpy arrays
produced by ``field.asarray``.  Pivoting always picks the lowest-index
nonzero entry, so results are deterministic.
"""

from __future__ import annotations

import numpy as np

from .exactfield import DivisionByZeroError, FieldSpec


def _pivot_row(col: np.ndarray, start: int) -> int | None:
    nz = np.flatnonzero(col[start:] != 0)
    return None if nz.size == 0 else start + int(nz[0])


def rref(field: FieldSpec, M: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and the list of pivot columns."""
    R = np.array(M, dtype=field.dtype, copy=True)
    if R.ndim != 2:
        raise ValueError("rref expects a matrix")
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pr = _pivot_row(R[:, c], r)
        if pr is None:
            continue
        if pr != r:
            R[[r, pr]] = R[[pr, r]]
        inv = field.inv(R[r, c])
        R[r] = field.scale(R[r], inv)
        col = R[:, c].copy()
        col[r] = field.zero()
        nz = np.flatnonzero(col != 0)
        if nz.size:
            if field.kind == "prime":
                R[nz] = np.mod(R[nz] - np.outer(col[nz], R[r]), field.p)
            else:
                R[nz] = R[nz] - np.outer(col[nz], R[r])
        pivots.append(c)
        r += 1
    return R, pivots


def rank(field: FieldSpec, M: np.ndarray) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    if field.kind == "prime":
        return _rank_mod_p(M, field.p)
    return len(rref(field, M)[1])


def _rank_mod_p(M: np.ndarray, p: int) -> int:
    # Row echelon without back-substitution; int64 is safe since entries < 2^31.
    R = np.array(M, dtype=np.int64, copy=True)
    if R.shape[0] > R.shape[1]:
        R = R.T.copy()
    rows, cols = R.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        col = R[r:, c]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            R[[r, pr]] = R[[pr, r]]
        inv = pow(int(R[r, c]), -1, p)
        R[r] = R[r] * inv % p
        below = R[r + 1 :, c]
        idx = np.flatnonzero(below)
        if idx.size:
            idx += r + 1
            R[idx] = (R[idx] - np.outer(R[idx, c], R[r])) % p
        r += 1
    return r


def nullspace(field: FieldSpec, M: np.ndarray) -> np.ndarray:
    """Basis of the right kernel, returned as the columns of a matrix."""
    M = np.asarray(M)
    rows, cols = M.shape
    R, pivots = rref(field, M)
    free = [c for c in range(cols) if c not in set(pivots)]
    N = field.zeros((cols, len(free)))
    for k, fc in enumerate(free):
        N[fc, k] = field.one()
        for i, pc in enumerate(pivots):
            N[pc, k] = field.neg(R[i, fc])
    return N


def row_space(field: FieldSpec, M: np.ndarray) -> np.ndarray:
    """Rows forming a basis (reduced echelon) of the row space of ``M``."""
    M = np.asarray(M)
    if M.size == 0:
        return field.zeros((0, M.shape[1] if M.ndim == 2 else 0))
    R, pivots = rref(field, M)
    return R[: len(pivots)]


def column_space(field: FieldSpec, M: np.ndarray) -> np.ndarray:
    """Columns forming a basis of the column space of ``M``."""
    return row_space(field, np.asarray(M).T).T


def solve(field: FieldSpec, A: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution ``x`` of ``A x = b`` (``b`` may be a matrix), or ``None``."""
    A = np.asarray(A)
    b = np.asarray(b)
    vec = b.ndim == 1
    B = b.reshape(-1, 1) if vec else b
    rows, cols = A.shape
    aug = np.concatenate([field.asarray(A), field.asarray(B)], axis=1)
    R, pivots = rref(field, aug)
    if any(pc >= cols for pc in pivots):
        return None
    X = field.zeros((cols, B.shape[1]))
    for i, pc in enumerate(pivots):
        X[pc] = R[i, cols:]
    return X[:, 0] if vec else X


def inverse(field: FieldSpec, M: np.ndarray) -> np.ndarray:
    M = np.asarray(M)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    aug = np.concatenate([field.asarray(M), field.eye(n)], axis=1)
    R, pivots = rref(field, aug)
    if pivots[:n] != list(range(n)):
        raise DivisionByZeroError("matrix is singular")
    return R[:, n:]


def is_invertible(field: FieldSpec, M: np.ndarray) -> bool:
    M = np.asarray(M)
    return M.shape[0] == M.shape[1] and rank(field, M) == M.shape[0]


def preimage(field: FieldSpec, E: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Basis (columns) of ``{x : E x in span(U)}`` where ``U`` has basis columns."""
    n, m = E.shape
    k = U.shape[1] if U.ndim == 2 else 0
    if k == 0:
        return nullspace(field, E)
    K = nullspace(field, np.concatenate([E, field.scale(U, -1)], axis=1))
    return column_space(field, K[:m])


def span_dim(field: FieldSpec, vectors: np.ndarray) -> int:
    return rank(field, vectors)
