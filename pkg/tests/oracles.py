"""Independent reference computations used by the tests."""

import itertools

from tensorcert import transform as tr


def naive_expansion(g: tr.Degeneration) -> dict:
    """Oracle: expand entry by entry with dict polynomials, independent of the library."""
    field = g.field
    src = g.source.data
    polys = [
        [[{a: M[a, i, j] for a in range(M.shape[0]) if M[a, i, j] != 0} for j in range(M.shape[2])]
         for i in range(M.shape[1])]
        for M in g.maps
    ]
    out: dict = {}
    for tgt in itertools.product(*[range(M.shape[1]) for M in g.maps]):
        for s in itertools.product(*[range(n) for n in src.shape]):
            c = src[s]
            if c == 0:
                continue
            acc = {0: c}
            for leg, (i, j) in enumerate(zip(tgt, s)):
                p = polys[leg][i][j]
                nxt: dict = {}
                for a, x in acc.items():
                    for b, y in p.items():
                        nxt[a + b] = field.add(nxt.get(a + b, field.zero()), field.mul(x, y))
                acc = nxt
            for deg, v in acc.items():
                key = (deg, tgt)
                out[key] = field.add(out.get(key, field.zero()), v)
    return {k: v for k, v in out.items() if v != 0}


def expansion_as_dict(exp: tr.Expansion) -> dict:
    return {(deg, idx): v for deg, t in exp.coefficients.items() for idx, v in
            ((tuple(i - 1 for i in idx), v) for idx, v in t.entries())}


def gf2_simple_masks(dims):
    """Bitmasks (row-major positions) of all nonzero simple tensors over F_2."""
    vecs = [[v for v in itertools.product((0, 1), repeat=d) if any(v)] for d in dims]
    out = set()
    for combo in itertools.product(*vecs):
        m = 0
        for idx in itertools.product(*[range(d) for d in dims]):
            if all(combo[leg][idx[leg]] for leg in range(len(dims))):
                pos = 0
                for leg, d in enumerate(dims):
                    pos = pos * d + idx[leg]
                m |= 1 << pos
        out.add(m)
    return sorted(out)


def gf2_ranks(dims) -> dict:
    """Rank of every tensor over F_2, by breadth-first search over XOR sums of simple tensors."""
    atoms = gf2_simple_masks(dims)
    seen = {0: 0}
    frontier = [0]
    r = 0
    while frontier:
        r += 1
        nxt = []
        for x in frontier:
            for a in atoms:
                y = x ^ a
                if y not in seen:
                    seen[y] = r
                    nxt.append(y)
        frontier = nxt
    return seen
