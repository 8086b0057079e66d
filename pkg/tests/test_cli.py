import io
import json
import subprocess
import sys

import pytest

from qzk import cli
from qzk.config import Config, from_sources
from qzk.reduction import SumSpec
from qzk.theorems import TheoremReport


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_zvalue_example():
    code, out, _ = run("zvalue", "2", "--order", "6")
    assert code == 0
    assert json.loads(out) == {"N": 6, "coeffs": ["0", "1", "3", "4", "7", "6", "12"]}


def test_empty_bracket_is_one():
    code, out, _ = run("bracket", "--order", "3")
    assert code == 0 and json.loads(out)["coeffs"] == ["1", "0", "0", "0"]


def test_bibracket_and_eisenstein():
    _, out, _ = run("bibracket", "2", "1", "--order", "5")
    assert json.loads(out)["coeffs"] == ["0", "1", "4", "6", "12", "10"]
    _, out, _ = run("eisenstein", "4", "--order", "2")
    assert json.loads(out)["coeffs"] == ["1/1440", "1/6", "3/2"]


def test_text_format():
    _, out, _ = run("bracket", "2", "--order", "3", "--format", "text")
    assert out == "q + 3*q^2 + 4*q^3 + O(q^4)\n"


def test_verify_two_variable_trace_lists_fifteen_certificates():
    code, out, _ = run("verify", "--theorem", "lemma31", "--order", "20", "--degree", "4")
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and rep["count"] == 15
    assert all(e["certificate"]["status"] == "member" for e in rep["entries"])


def test_verify_text_report():
    code, out, _ = run("verify", "--theorem", "zids", "--format", "text")
    assert code == 0 and out.startswith("zids: PASS")


def test_verification_failure_exit_code(monkeypatch):
    failing = lambda **kw: TheoremReport("fake", 5, False)
    monkeypatch.setattr(cli, "parse_theorem", lambda t: ("bo", failing, {}))
    assert run("verify", "--theorem", "bo")[0] == 1


@pytest.mark.parametrize("argv,flag", [
    (["zvalue", "1"], "zvalue"),
    (["bracket", "--order", "x"], "--order"),
    (["verify", "--theorem", "thm99"], "--theorem"),
    (["expand", "--trace", "nope"], "--trace"),
    (["bibracket", "2,x"], "s"),
    (["eisenstein", "3"], "eisenstein"),
    (["frobnicate"], "frobnicate"),
    (["relations", "--family", "MD", "--max-weight", "-1"], "--max-weight"),
    (["expand", "--trace", "pn:2", "--order", "6", "--degree", "2", "--ybound", "3", "--y0"], "--ybound"),
    ([], "subcommand"),
])
def test_usage_errors(argv, flag):
    code, out, err = run(*argv)
    assert code == 2 and out == ""
    assert flag in err


def test_oversized_basis_is_a_budget_failure():
    code, _, err = run("relations", "--family", "BD", "--max-weight", "12", "--order", "5")
    assert code == 1 and "budget" in err


def test_expand_coefficient():
    code, out, _ = run("expand", "--trace", "lemma31", "--order", "4", "--degree", "2", "--coeff", "z*w")
    assert code == 0
    assert json.loads(out)["terms"] == {"1": {"N": 4, "coeffs": ["0", "-1", "-3", "-4", "-7"]}}


def test_expand_two_player_y0():
    code, out, _ = run("expand", "--trace", "pn:2", "--order", "6", "--degree", "4", "--y0",
                       "--coeff", "z1_12*z2_12*v1_12*v2_12")
    assert code == 0
    assert json.loads(out)["terms"]["1"]["coeffs"] == ["0", "1", "6", "12", "28", "30", "72"]


def test_reduce_from_file(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(SumSpec.W(((0, 1),), ((0, 1),)).to_json()), encoding="utf-8")
    code, out, _ = run("reduce", "--spec", str(spec), "--certify-steps", "--order", "10")
    rep = json.loads(out)
    assert code == 0 and rep["certificate"]["agree"]
    assert rep["combination"] == [{"factors": [{"s": [3], "r": [1]}], "coeff": "2"}]


def test_reduce_missing_file():
    assert run("reduce", "--spec", "/nonexistent.json")[0] == 2


def test_reduce_malformed_spec(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text("{}", encoding="utf-8")
    code, out, err = run("reduce", "--spec", str(spec))
    assert code == 2 and out == "" and "--spec" in err


def test_relations():
    code, out, _ = run("relations", "--family", "qMZV", "--max-weight", "4")
    rep = json.loads(out)
    assert code == 0 and len(rep["relations"]) == 1 and not rep["weak_evidence"]


def test_output_is_byte_stable():
    argv = ["verify", "--theorem", "thm32:2", "--order", "24", "--degree", "2"]
    assert run(*argv)[1] == run(*argv)[1]


def test_selftest_passes():
    code, out, _ = run("selftest")
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and len(rep["checks"]) >= 10


def test_config_precedence():
    env = {"QZK_ORDER": "7", "QZK_FORMAT": "text", "QZK_PARALLEL": "3"}
    cfg = from_sources({"order": 9, "format": None}, env)
    assert (cfg.order, cfg.format, cfg.parallel) == (9, "text", 3)
    assert from_sources({}, {}) == Config()
    with pytest.raises(ValueError):
        from_sources({}, {"QZK_ORDER": "many"})
    with pytest.raises(ValueError):
        Config(parallel=0)


def test_environment_applies(monkeypatch):
    monkeypatch.setenv("QZK_FORMAT", "text")
    monkeypatch.setenv("QZK_ORDER", "2")
    assert run("bracket", "2") == (0, "q + 3*q^2 + O(q^3)\n", "")
    assert run("bracket", "2", "--order", "1")[1] == "q + O(q^2)\n"


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qzk.cli", "zvalue", "2", "--order", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["coeffs"] == ["0", "1", "3"]
