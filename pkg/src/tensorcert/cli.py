"""Command-line entry point: ``tensorcert <subcommand> ...``.

Subcommands
-----------
build       write a named tensor as JSON
verify      check a certificate (restriction, degeneration or decomposition)
bound       bracket the rank of a tensor
pencil      canonical form and rank of a 2 x n x m tensor
experiment  run one of the reproducible end-to-end experiments
export      write a named certificate as JSON

Exit codes: 0 verified / success, 1 invalid (a claim failed), 2 malformed
input.  Randomness only comes from ``--seed`` (default 0), so every report
is reproducible from (name, field, seed).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import bounds, pencil, tensorcore as tc, transform as tr
from .exactfield import FieldError, FieldSpec

EXIT_OK, EXIT_INVALID, EXIT_MALFORMED = 0, 1, 2
DEFAULT_SEED = 0


class UsageError(ValueError):
    """Bad parameters or unreadable input (exit code 2)."""


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _field(args, default: str = "q") -> FieldSpec:
    return FieldSpec.from_string(args.field or default)


def _ints(params, count: int, defaults=()) -> list[int]:
    vals = list(params) + list(defaults)[len(params):]
    if len(vals) < count:
        raise UsageError(f"expected {count} integer parameters, got {len(params)}")
    try:
        return [int(v) for v in vals[:count]]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _load_tensor(path: str) -> tc.Tensor:
    try:
        return tc.Tensor.from_json(_load_json(path))
    except UsageError:
        raise
    except (KeyError, ValueError, TypeError, IndexError, FieldError, tc.ShapeError) as exc:
        raise UsageError(f"{path}: malformed tensor ({exc})") from None


def _emit(args, payload: dict, text: str) -> None:
    """Print the text report (or JSON with ``--json``)."""
    print(json.dumps(payload, indent=2, default=str) if args.json else text)


def _write(args, obj: dict) -> None:
    data = json.dumps(obj, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(data + "\n")
    else:
        print(data)


# ---------------------------------------------------------------------------
# build / export
# ---------------------------------------------------------------------------


def build_tensor(family: str, params, field: FieldSpec) -> tc.Tensor:
    family = family.lower()
    if family == "w":
        (k,) = _ints(params, 1, [3])
        return tc.w_tensor(k, field)
    if family == "unit":
        r, k = _ints(params, 2, [2, 3])
        return tc.unit_tensor(r, k, field)
    if family == "matmul":
        n1, n2, n3 = _ints(params, 3, [2, 2, 2])
        return tc.matmul_tensor(n1, n2, n3, field)
    if family == "chi":
        d, k = _ints(params, 2)
        return tc.chi_tensor(d, k, field)
    if family in ("str", "strassen"):
        q, k = _ints(params, 2, [2, 3])
        return tc.strassen_tensor(q, k, field)
    raise UsageError(f"unknown tensor family {family!r}")


def build_certificate(family: str, params, field: FieldSpec):
    family = family.lower()
    if family == "w":
        (k,) = _ints(params, 1, [3])
        return tr.w_certificate(k, field)
    if family in ("str", "strassen"):
        q, k = _ints(params, 2, [2, 3])
        return tr.strassen_certificate(q, k, field)
    if family == "w3plus":
        c = params[0] if params else "1"
        return tr.two_term_w3plus(field.parse(c), field)
    if family == "w3-squared":
        return tr.w3_squared_decomposition(field)
    if family == "strassen7":
        return tc.strassen7_decomposition(field)
    if family == "matmul-224":
        return tc.strassen_224_decomposition(field)
    if family == "wk-power":
        k, n = _ints(params, 2, [3, 2])
        return tr.power_decomposition(tr.w_certificate(k, field), n)
    raise UsageError(f"unknown certificate family {family!r}")


def cmd_build(args) -> int:
    t = build_tensor(args.family, args.params, _field(args))
    _write(args, t.to_json())
    return EXIT_OK


def cmd_export(args) -> int:
    default = "qsqrt:2" if args.family.lower() == "w3-squared" else "q"
    cert = build_certificate(args.family, args.params, _field(args, default))
    _write(args, tr.certificate_to_json(cert))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def verify_certificate(obj: dict, target: tc.Tensor | None, source: tc.Tensor | None = None) -> tr.VerificationReport:
    """Dispatch to the library verifiers; raises ``UsageError`` on malformed input."""
    try:
        cert = tr.certificate_from_json(obj)
    except (KeyError, ValueError, TypeError, IndexError, FieldError, tc.ShapeError) as exc:
        raise UsageError(f"malformed certificate ({exc})") from None
    if isinstance(cert, tc.Decomposition):
        if target is None:
            raise UsageError("a decomposition needs a target tensor")
        return tr.verify_decomposition(cert, target)
    if isinstance(cert, tr.Restriction):
        if source is None:
            source = tr.unit_tensor_like(cert.source_dims, cert.field)
        if source is None or target is None:
            raise UsageError("a restriction needs a target tensor (and a source unless it is a unit tensor)")
        return tr.verify_restriction(cert, source, target)
    if target is not None and (target.field != cert.field or tuple(target.dims) != cert.target_dims):
        return tr.VerificationReport(False, None, None, f"target {target.dims} over {target.field} does not match the certificate")
    return tr.verify(cert, target)


def cmd_verify(args) -> int:
    obj = _load_json(args.certificate)
    target = _load_tensor(args.tensor) if args.tensor else None
    source = _load_tensor(args.source) if args.source else None
    rep = verify_certificate(obj, target, source)
    text = f"{'VERIFIED' if rep.ok else 'INVALID'}: {rep.message}"
    if rep.d is not None:
        text += f" (d, e) = ({rep.d}, {rep.e})"
    if rep.mismatch is not None:
        idx, got, want = rep.mismatch
        text += f"; first mismatch at [{idx}]: got {got}, expected {want}"
    _emit(args, rep.to_json(), text)
    return EXIT_OK if rep.ok else EXIT_INVALID


# ---------------------------------------------------------------------------
# bound / pencil
# ---------------------------------------------------------------------------


def cmd_bound(args) -> int:
    t = _load_tensor(args.tensor)
    dec = None
    if args.decomposition:
        try:
            dec = tc.Decomposition.from_json(_load_json(args.decomposition))
        except UsageError:
            raise
        except (KeyError, ValueError, TypeError, FieldError, tc.ShapeError) as exc:
            raise UsageError(f"malformed decomposition ({exc})") from None
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = set(methods) - set(bounds.LOWER_METHODS)
    if unknown:
        raise UsageError(f"unknown methods {sorted(unknown)}")
    try:
        rep = bounds.certify_rank(t, dec, methods, args.rmax)
    except ValueError as exc:
        _emit(args, {"error": str(exc)}, f"INVALID: {exc}")
        return EXIT_INVALID
    except (bounds.BudgetExceeded, pencil.FormulaNotApplicable) as exc:
        _emit(args, {"error": str(exc)}, f"not available: {exc}")
        return EXIT_INVALID
    out = rep.to_json()
    text = f"rank in [{out['lower_int']}, {out['upper'] if out['upper'] is not None else '?'}]"
    if rep.determined:
        text += " (determined)"
    _emit(args, out, text)
    return EXIT_OK


def cmd_pencil(args) -> int:
    t = _load_tensor(args.tensor)
    if t.order != 3 or t.dims[0] > 2:
        raise UsageError(f"not a pencil: dims {t.dims}")
    cf, _ = pencil.kronecker_canonical_form(t, basis_change=args.basis_change, seed=args.seed)
    out = cf.to_json()
    try:
        out["rank"] = pencil.pencil_rank(cf, args.allow_small_field)
    except pencil.FormulaNotApplicable as exc:
        out["rank"] = None
        out["rank_note"] = str(exc)
    text = (
        f"zero {out['zero']}, eps {out['eps']}, eta {out['eta']}, "
        f"invariant factors {out['invariant_factors']}, infinite {out['infinite']}; rank {out['rank']}"
    )
    _emit(args, out, text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _claim(claims: list, text: str, ok: bool, **extra) -> bool:
    claims.append({"claim": text, "verified": bool(ok), **extra})
    return bool(ok)


def exp_w3_squared(field: FieldSpec, seed: int, params) -> tuple[list, str]:
    claims: list = []
    dec = tr.w3_squared_decomposition(field)
    w = tc.w_tensor(3, field)
    rep = tr.verify_decomposition(dec, tc.tensor_product(w, w))
    _claim(claims, "decomposition evaluates to W_3 ⊗ W_3", rep.ok)
    _claim(claims, f"{len(dec)} < 9 = rank(W_3)^2", len(dec) < 9, terms=len(dec))
    return claims, f"{len(dec)}-term decomposition {'verified' if rep.ok else 'FAILED'}; {len(dec)} < 9"


def exp_wk_power(field: FieldSpec, seed: int, params) -> tuple[list, str]:
    k, n = _ints(params, 2, [3, 2])
    claims: list = []
    g = tr.w_certificate(k, field)
    dec = tr.power_decomposition(g, n)
    target = tc.tensor_power(tc.w_tensor(k, field), n)
    rep = tr.verify_decomposition(dec, target)
    bound = tr.power_bound(2, k - 1, n)
    _claim(claims, f"decomposition evaluates to W_{k}^⊗{n}", rep.ok)
    _claim(claims, f"{len(dec)} <= {bound} = ({n}·{k - 1}+1)·2^{n}", len(dec) <= bound, terms=len(dec))
    return claims, f"{len(dec)}-term decomposition of W_{k}^⊗{n} {'verified' if rep.ok else 'FAILED'}; bound {bound}"


def exp_strassen_q(field: FieldSpec, seed: int, params) -> tuple[list, str]:
    q, n = _ints(params, 2, [7, 2])
    claims: list = []
    g = tr.strassen_certificate(q, 3, field)
    rep = tr.verify(g)
    _claim(claims, f"⟨{q + 1}⟩ degenerates to Str_{q}^3 with (d, e) = (1, 1)", rep.ok and (rep.d, rep.e) == (1, 1))
    dec = tr.power_decomposition(g, n)
    target = tc.tensor_power(tc.strassen_tensor(q, 3, field), n)
    drep = tr.verify_decomposition(dec, target)
    bound = tr.power_bound(q + 1, 1, n)
    rank_power = (2 * q) ** n
    _claim(claims, f"decomposition evaluates to (Str_{q}^3)^⊗{n}", drep.ok)
    _claim(claims, f"{len(dec)} <= {bound}", len(dec) <= bound, terms=len(dec))
    _claim(claims, f"{len(dec)} < {rank_power} = rank(Str_{q}^3)^{n}", len(dec) < rank_power)
    return claims, f"{len(dec)}-term decomposition {'verified' if drep.ok else 'FAILED'}; {len(dec)} < {rank_power}"


def exp_matmul_224(field: FieldSpec, seed: int, params) -> tuple[list, str]:
    claims: list = []
    t = tc.matmul_tensor(2, 2, 4, field)
    dec = tc.strassen_224_decomposition(field)
    rep = tr.verify_decomposition(dec, t)
    _claim(claims, "14-term decomposition evaluates to ⟨2,2,4⟩", rep.ok and len(dec) == 14)
    flat = bounds.flattening_lower_bound(t)
    _claim(claims, f"flattening lower bound {flat} <= 14", flat <= 14, lower=flat)
    claims.append({
        "claim": "rank(⟨2,2,4⟩) = 14 and the power bound 13",
        "verified": None,
        "note": "cited, not reproduced: needs external certificates (verify them with 'tensorcert verify')",
    })
    return claims, f"⟨2,2,4⟩: rank in [{flat}, 14]; exact value and power bound are cited only"


def exp_pencil_mult(field: FieldSpec, seed: int, params) -> tuple[list, str]:
    (count,) = _ints(params, 1, [100])
    rng = np.random.default_rng(seed)
    claims: list = []
    passed = 0
    for _ in range(count):
        t = pencil.random_pencil(field, rng)
        r = int(rng.integers(2, 4))
        rep = pencil.pencil_multiplicativity_check(t, r=r)
        passed += rep.holds and rep.blocks_match
    _claim(claims, f"rank(t ⊠ diag_r) = r·rank(t) on {count} random pencils", passed == count, passed=passed)
    return claims, f"{passed}/{count} multiplicativity checks passed"


def exp_strassen7(field: FieldSpec, seed: int, params) -> tuple[list, str]:
    claims: list = []
    t = tc.matmul_tensor(2, 2, 2, field)
    rep = tr.verify_decomposition(tc.strassen7_decomposition(field), t)
    _claim(claims, "7-term decomposition evaluates to ⟨2,2,2⟩", rep.ok)
    flat = bounds.flattening_lower_bound(t)
    _claim(claims, f"flattening lower bound {flat}", flat == 4, lower=flat)
    claims.append({"claim": "rank(⟨2,2,2⟩) = 7", "verified": None, "note": "cited; flattenings only reach 4"})
    return claims, f"Strassen decomposition {'verified' if rep.ok else 'FAILED'}; rank in [{flat}, 7]"


def exp_chi_demo(field: FieldSpec, seed: int, params) -> tuple[list, str]:
    d, k = _ints(params, 2, [1, 3])
    if d < 1:
        raise UsageError("d must be positive")
    claims: list = []
    g = tr.w_certificate(k, field)
    for _ in range(d - 1):
        g = tr.degeneration_product(g, tr.w_certificate(k, field), "kronecker")
    g = tr.truncate_degeneration(g)
    R = tr.chi_restriction(g)
    target = g.target
    rep = tr.verify_restriction(R, tr.chi_source(g, d), target)
    _claim(claims, f"χ restriction reproduces W_{k}^⊠{d}", rep.ok)
    terms = tc.chi_term_count(d, k)
    nnz = tc.chi_tensor(d, k, field).nnz()
    _claim(claims, f"χ_{d}({k}) has C({k + d - 1},{k - 1}) = {terms} terms", nnz == terms, terms=nnz)
    return claims, f"χ restriction {'verified' if rep.ok else 'FAILED'} over {field}; {terms} χ terms"


EXPERIMENTS = {
    "w3-squared": (exp_w3_squared, "qsqrt:2"),
    "wk-power": (exp_wk_power, "q"),
    "strassen-q": (exp_strassen_q, "fp:10007"),
    "matmul-224": (exp_matmul_224, "q"),
    "pencil-mult": (exp_pencil_mult, "fp:5"),
    "strassen7": (exp_strassen7, "q"),
    "chi-demo": (exp_chi_demo, "fp:2"),
}


def run_experiment(name: str, field: FieldSpec | None = None, seed: int = DEFAULT_SEED, params=()) -> dict:
    if name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    fn, default = EXPERIMENTS[name]
    field = FieldSpec.from_string(default) if field is None else field
    t0 = time.perf_counter()
    claims, summary = fn(field, seed, list(params))
    return {
        "experiment": name,
        "field": str(field),
        "seed": seed,
        "params": list(params),
        "claims": claims,
        "ok": all(c["verified"] is not False for c in claims),
        "summary": summary,
        "seconds": round(time.perf_counter() - t0, 3),
    }


def cmd_experiment(args) -> int:
    field = None
    if args.rationals:
        field = FieldSpec.rationals()
    elif args.field:
        field = FieldSpec.from_string(args.field)
    report = run_experiment(args.name, field, args.seed, args.params)
    lines = [report["summary"]] + [
        f"  [{'ok' if c['verified'] else ('cited' if c['verified'] is None else 'FAIL')}] {c['claim']}"
        for c in report["claims"]
    ]
    _emit(args, report, "\n".join(lines))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, default=str)
    return EXIT_OK if report["ok"] else EXIT_INVALID


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", help="q | fp:<p> | qsqrt:<D>")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized checks (default 0)")
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--out", help="write the result to this path")

    p = argparse.ArgumentParser(prog="tensorcert", description="Exact tensor rank and border-rank certificates.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="write a named tensor as JSON")
    b.add_argument("family", help="W | unit | matmul | chi | strassen")
    b.add_argument("params", nargs="*")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", parents=[common], help="verify a certificate")
    v.add_argument("certificate")
    v.add_argument("tensor", nargs="?", help="target tensor JSON")
    v.add_argument("--source", help="source tensor JSON for a restriction")
    v.set_defaults(func=cmd_verify)

    bd = sub.add_parser("bound", parents=[common], help="bracket the rank of a tensor")
    bd.add_argument("tensor")
    bd.add_argument("--decomposition", help="decomposition JSON giving the upper bound")
    bd.add_argument("--methods", default="flattening", help="comma list of " + ",".join(bounds.LOWER_METHODS))
    bd.add_argument("--rmax", type=int)
    bd.set_defaults(func=cmd_bound)

    pc = sub.add_parser("pencil", parents=[common], help="canonical form and rank of a pencil")
    pc.add_argument("tensor")
    pc.add_argument("--basis-change", action="store_true")
    pc.add_argument("--allow-small-field", action="store_true",
                    help="evaluate the finite-field formula even when q is below the block size")
    pc.set_defaults(func=cmd_pencil)

    e = sub.add_parser("experiment", parents=[common], help="run a reproducible experiment")
    e.add_argument("name", choices=sorted(EXPERIMENTS))
    e.add_argument("params", nargs="*")
    e.add_argument("--rationals", action="store_true", help="run over Q instead of the default field")
    e.set_defaults(func=cmd_experiment)

    x = sub.add_parser("export", parents=[common], help="write a named certificate as JSON")
    x.add_argument("family", help="W | strassen | w3plus | w3-squared | strassen7 | matmul-224 | wk-power")
    x.add_argument("params", nargs="*")
    x.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_MALFORMED if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, FieldError, tc.ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
