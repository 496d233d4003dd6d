import json
import subprocess
import sys
from pathlib import Path

import pytest

from flagstab import cli
from flagstab.exact_linalg import Subspace
from flagstab.flagkit import GeneralizedFlag
from flagstab.liealg import LieSubalgebra

GOLDEN = Path(__file__).parent / "golden"

SO4 = json.dumps({"kind": "so", "form": {"kind": "split_symmetric", "dim": 4}})
# labels -2, -1, 1, 2 are coordinates 0..3; the flag is 0 ⊂ <e_1> ⊂ <e_1, e_2>
SO4_FLAG = json.dumps({"ambient_dim": 4, "vectors": [[0, 0, 1, 0], [0, 0, 0, 1]]})
SO4_FORM = json.dumps({"kind": "split_symmetric", "dim": 4})
SO5_FORM = json.dumps({"kind": "split_symmetric", "dim": 5})
SO5_FLAG = json.dumps({"ambient_dim": 5, "vectors": [[0, 0, 0, 1, 0], [0, 0, 0, 0, 1]]})


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out) if out else None, err


# -- golden files and determinism ------------------------------------------------


@pytest.mark.parametrize(
    "name,argv",
    [
        ("span.json", ["span", "--input", '{"ambient_dim": 3, "vectors": [[2, 4, 0], [1, 2, 1], [0, 0, 3]]}']),
        ("stab_so4_both.json", ["stab", "--mode", "both", "--flag", SO4_FLAG, "--ambient", SO4]),
        ("twin_so5.json", ["twin", "--flag", SO5_FLAG, "--form", SO5_FORM]),
    ],
)
def test_golden_reports(capsys, name, argv):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert out == (GOLDEN / name).read_text(encoding="utf-8")


def test_reports_are_byte_identical_across_processes(tmp_path):
    flag = tmp_path / "flag.json"
    amb = tmp_path / "amb.json"
    flag.write_text(SO4_FLAG)
    amb.write_text(SO4)
    cmd = [sys.executable, "-m", "flagstab", "stab", "--mode", "both", "--flag", str(flag), "--ambient", str(amb)]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b


def test_metadata_goes_to_a_side_channel(capsys, tmp_path):
    meta = tmp_path / "meta.json"
    argv = ["span", "--input", '{"ambient_dim": 2, "vectors": [[1, 1]]}']
    _, first, _ = run(capsys, *argv, "--metadata", str(meta))
    _, second, _ = run(capsys, *argv)
    assert first == second
    assert "seconds" in json.loads(meta.read_text())


def test_output_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "--output", str(target), "span", "--input", '{"ambient_dim": 2, "vectors": [[1, 1]]}')
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["result"]["subspace"]["dim"] == 1


# -- verbs -----------------------------------------------------------------------


def test_stab_both_reports_equality(capsys):
    code, doc, _ = run_json(capsys, "stab", "--mode", "both", "--flag", SO4_FLAG, "--ambient", SO4)
    assert code == 0
    assert doc["result"]["equal"] is True
    assert doc["result"]["stabilizers"]["brute"]["dim"] == 4
    assert doc["conventions"]["pairing"] == "split_symmetric"


def test_twin_of_a_twinless_flag(capsys):
    code, doc, _ = run_json(capsys, "twin", "--flag", SO5_FLAG, "--form", SO5_FORM)
    assert code == 0
    assert doc["result"]["twin"] == "none"


def test_twin_in_even_dimension(capsys):
    code, doc, _ = run_json(capsys, "twin", "--flag", SO4_FLAG, "--form", SO4_FORM)
    assert code == 0
    T = GeneralizedFlag.from_json(doc["result"]["twin"])
    assert T.support.dim == 2
    assert all(c["pass"] for c in doc["checks"])


def test_perp_and_closure(capsys):
    sub = '{"ambient_dim": 3, "vectors": [[1, 0, 0]]}'
    code, doc, _ = run_json(capsys, "perp", "--subspace", sub, "--form", '{"kind": "standard_dual", "dim": 3}')
    assert code == 0 and doc["result"]["perp"]["dim"] == 2
    code, doc, _ = run_json(capsys, "closure", "--subspace", sub, "--form", SO4_FORM.replace("4", "3"))
    assert code == 0 and doc["result"]["is_closed"] is True


def test_descriptor_mode(capsys):
    desc = json.dumps({"type": "seq", "domain": "positive", "families": ["e(k) - e(k+1) for k >= 1"]})
    pairing = '{"kind": "standard_dual", "domain": "positive"}'
    code, doc, _ = run_json(capsys, "closure", "--descriptor", desc, "--pairing", pairing, "--level", "4")
    assert code == 0
    assert doc["result"]["subspace"]["dim"] == 4
    assert doc["result"]["certificate"] == {"level": 4, "lookahead": 1, "stable": True}
    code, doc, _ = run_json(capsys, "perp", "--descriptor", desc, "--pairing", pairing, "--level", "4")
    assert doc["result"]["subspace"]["dim"] == 0


def test_flag_verb(capsys):
    chain = '{"ambient_dim": 3, "members": [{"vectors": [[1, 0, 0]]}, {"vectors": [[1, 0, 0]]}]}'
    code, doc, _ = run_json(capsys, "flag", "--chain", chain)
    assert code == 0
    assert len(doc["result"]["flag"]["pairs"]) == 2


def test_borel_pass_and_fail(capsys):
    gl3 = '{"kind": "gl", "n": 3}'
    flag = '{"ambient_dim": 3, "vectors": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}'
    code, doc, _ = run_json(capsys, "borel", "--flag", flag, "--ambient", gl3)
    assert code == 0 and doc["result"]["maximal_solvable"] is True
    diagonal = json.dumps([[[1 if (i, j) == (k, k) else 0 for j in range(3)] for i in range(3)] for k in range(3)])
    code, doc, _ = run_json(capsys, "borel", "--generators", diagonal, "--ambient", gl3)
    assert code == 1
    assert doc["pass"] is False


def test_toral_verb(capsys):
    code, doc, _ = run_json(capsys, "toral", "--flag", SO4_FLAG, "--ambient", SO4)
    assert code == 0
    assert doc["result"]["toral"]["dim"] == 2 and doc["result"]["nilpotent"]["dim"] == 2


def test_example_with_check(capsys):
    code, doc, _ = run_json(capsys, "example", "paper_example_2", "--levels", "2..4", "--check", "normalizer-forces-a-zero")
    assert code == 0
    assert [c["name"] for c in doc["checks"]] == [f"normalizer-forces-a-zero @ level {n}" for n in (2, 3, 4)]


def test_limits_verify(capsys):
    code, doc, _ = run_json(
        capsys, "limits-verify", "--scenario", "dense_hyperplane", "--property", "closure-is-full", "--levels", "3..5"
    )
    assert code == 0 and doc["pass"] is True


def test_markdown_layout(capsys):
    code, out, _ = run(capsys, "--format", "markdown", "example", "paper_example_1", "--levels", "2", "--check", "stabilizer-is-borel")
    assert code == 0
    headings = [line for line in out.splitlines() if line.startswith("## ")]
    assert headings == ["## Conventions", "## Inputs", "## Result", "## Checks", "## Witnesses"]
    assert "| stabilizer-is-borel @ level 2 | pass |" in out


def test_format_after_the_verb(capsys):
    code, out, _ = run(capsys, "span", "--input", '{"ambient_dim": 1, "vectors": [[1]]}', "--format", "markdown")
    assert code == 0 and out.startswith("# flagstab span")


# -- errors ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "argv,field",
    [
        (["span", "--input", '{"ambient_dim": 2, "vectors": [[0.5, 1]]}'], None),
        (["span", "--input", '{"vectors": [[1]]}'], "input"),
        (["span", "--input", "{not json"], "input"),
        (["span", "--input", '{"ambient_dim": 2, "basis": [[2, 0]]}'], "basis"),
        (["stab", "--flag", SO4_FLAG, "--ambient", '{"kind": "so", "form": {"kind": "split_symplectic", "dim": 4}}'], "form"),
        (["frobnicate"], "arguments"),
        (["perp", "--form", SO4_FORM], "subspace"),
    ],
)
def test_input_errors_exit_2_with_json(capsys, argv, field):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    payload = json.loads(err)
    assert payload["exit_code"] == 2
    assert payload["error"]
    if field:
        assert payload["field"] == field


def test_precondition_error_is_an_input_failure(capsys):
    flag = json.dumps({"ambient_dim": 4, "vectors": [[0, 0, 1, 0]]})
    code, _, err = run(capsys, "stab", "--mode", "formula", "--flag", flag, "--ambient", SO4)
    assert code == 2
    assert json.loads(err)["condition"] == "maximal_isotropic_support"


def test_unexpected_failures_exit_3(capsys, monkeypatch):
    def broken(*_args, **_kw):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "stabilizer", broken)
    code, _, err = run(capsys, "stab", "--flag", SO4_FLAG, "--ambient", SO4)
    assert code == 3
    payload = json.loads(err)
    assert payload["invariant"] == "unhandled_exception"


# -- schema round trip -------------------------------------------------------------


def test_emitted_artifacts_reload(capsys):
    _, doc, _ = run_json(capsys, "stab", "--mode", "brute", "--flag", SO4_FLAG, "--ambient", SO4)
    alg = doc["result"]["stabilizers"]["brute"]
    b = LieSubalgebra.from_json({"ambient": json.loads(SO4), "basis": alg["basis"]})
    assert b.dim == 4
    assert LieSubalgebra.from_json(b.to_json()).space == b.space
    _, doc, _ = run_json(capsys, "span", "--input", '{"ambient_dim": 3, "vectors": [[1, 2, 3]]}')
    S = Subspace.from_json(doc["result"]["subspace"])
    code, again, _ = run_json(capsys, "span", "--input", json.dumps(S.to_json()))
    assert code == 0 and again["result"] == doc["result"]
