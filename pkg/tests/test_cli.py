"""The command-line layer: exit codes, file formats and experiment reports."""

import json

import pytest

from tensorcert import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_build_families(tmp_path, capsys):
    path = tmp_path / "w3.json"
    assert cli.main(["build", "W", "3", "--out", str(path)]) == 0
    assert len(json.loads(path.read_text())["entries"]) == 3
    code, out = run(capsys, "build", "matmul", "2", "2", "2")
    assert code == 0 and len(json.loads(out)["entries"]) == 8
    code, out = run(capsys, "build", "chi", "2", "3")
    assert code == 0 and len(json.loads(out)["entries"]) == 6
    assert cli.main(["build", "nosuch", "3"]) == 2
    assert cli.main(["build", "W", "x"]) == 2


def test_verify_exit_codes(tmp_path, capsys):
    w3, cert = tmp_path / "w3.json", tmp_path / "cert.json"
    cli.main(["build", "W", "3", "--out", str(w3)])
    cli.main(["export", "W", "3", "--out", str(cert)])
    code, out = run(capsys, "verify", str(cert), str(w3), "--json")
    rep = json.loads(out)
    assert code == 0 and rep["verified"] and (rep["d"], rep["e"]) == (1, 2)

    obj = json.loads(cert.read_text())
    obj["maps"][0][1][0] = "2*eps"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    code, out = run(capsys, "verify", str(bad), str(w3))
    assert code == 1 and "mismatch at [2,1,1]" in out

    trunc = tmp_path / "trunc.json"
    trunc.write_text(cert.read_text()[:80])
    assert cli.main(["verify", str(trunc), str(w3)]) == 2
    obj = json.loads(cert.read_text())
    del obj["maps"]
    bad.write_text(json.dumps(obj))
    assert cli.main(["verify", str(bad), str(w3)]) == 2


def test_verify_decomposition_and_wrong_target(tmp_path, capsys):
    dec, t, other = tmp_path / "dec.json", tmp_path / "t.json", tmp_path / "o.json"
    cli.main(["export", "strassen7", "--out", str(dec)])
    cli.main(["build", "matmul", "2", "2", "2", "--out", str(t)])
    cli.main(["build", "matmul", "2", "2", "2", "--field", "fp:3", "--out", str(other)])
    assert cli.main(["verify", str(dec), str(t)]) == 0
    assert cli.main(["verify", str(dec), str(other)]) == 1
    assert cli.main(["verify", str(dec)]) == 2


def test_bound_and_pencil(tmp_path, capsys):
    t = tmp_path / "w3.json"
    dec = tmp_path / "dec.json"
    cli.main(["build", "W", "3", "--field", "fp:5", "--out", str(t)])
    capsys.readouterr()
    code, out = run(capsys, "bound", str(t), "--methods", "flattening,substitution", "--json")
    rep = json.loads(out)
    assert code == 0 and rep["lower_int"] == 3 and rep["upper"] is None
    code, out = run(capsys, "pencil", str(t), "--json", "--basis-change")
    rep = json.loads(out)
    assert code == 0 and rep["rank"] == 3 and rep["invariant_factors"] == ["1*x^2"]
    assert set(rep) >= {"zero", "eps", "eta", "invariant_factors", "rank", "basis_change"}
    assert cli.main(["bound", str(t), "--methods", "guess"]) == 2
    m = tmp_path / "m.json"
    cli.main(["build", "matmul", "2", "2", "2", "--out", str(m)])
    assert cli.main(["pencil", str(m)]) == 2


@pytest.mark.parametrize(
    "argv,summary",
    [
        (["w3-squared"], "8-term decomposition verified; 8 < 9"),
        (["wk-power", "3", "2"], "20-term decomposition of W_3^⊗2 verified; bound 20"),
        (["strassen-q", "7", "2"], "192-term decomposition verified; 192 < 196"),
        (["pencil-mult", "--seed", "7"], "100/100 multiplicativity checks passed"),
        (["strassen7"], "Strassen decomposition verified; rank in [4, 7]"),
        (["chi-demo", "1", "3"], "χ restriction verified over F_2; 3 χ terms"),
        (["matmul-224"], "⟨2,2,4⟩: rank in [8, 14]; exact value and power bound are cited only"),
    ],
)
def test_experiments(capsys, argv, summary):
    code, out = run(capsys, "experiment", *argv, "--json")
    rep = json.loads(out)
    assert code == 0 and rep["ok"] and rep["summary"] == summary


def test_experiment_reproducible():
    a = cli.run_experiment("pencil-mult", None, 3, ["20"])
    b = cli.run_experiment("pencil-mult", None, 3, ["20"])
    a.pop("seconds"), b.pop("seconds")
    assert a == b


def test_unknown_experiment_and_bad_args():
    assert cli.main(["experiment", "nope"]) == 2
    assert cli.main([]) == 2
    assert cli.main(["experiment", "w3-squared", "--field", "fp:5"]) == 2
