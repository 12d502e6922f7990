from __future__ import annotations

import io
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from qkpz.cli import parse_word, read_config, run
from qkpz.trees import parse_tree, tree_from_json

SRC = str(Path(__file__).resolve().parent.parent / "src")


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def call_json(*argv):
    code, text = call(*argv, "--json")
    obj = json.loads(text)
    assert set(obj) == {"command", "config", "results"}
    return code, obj


def test_enumerate_two_noises():
    code, obj = call_json("enumerate", "--noises", "2")
    assert code == 0 and obj["command"] == "enumerate"
    assert len(obj["results"]) == 2
    assert obj["config"]["noise_degree"] == "-3/2"


def test_enumerate_output_round_trips():
    code, obj = call_json("enumerate", "--noises", "4")
    assert code == 0 and len(obj["results"]) == 23
    for rec in obj["results"]:
        assert parse_tree(rec["tree"]) == tree_from_json(rec["json"])
        assert rec["symmetry"] >= 1


def test_enumerate_is_byte_stable():
    assert call("enumerate", "--json") == call("enumerate", "--json")


def test_enumerate_parametrised():
    code, obj = call_json("enumerate", "--noises", "2", "-N", "1")
    assert code == 0 and len(obj["results"]) == 6


def test_upsilon_text():
    code, text = call("upsilon", "--nonlinearity", "F", "--tree", "Xi[I(Xi)]")
    assert code == 0
    assert text.splitlines() == ["g*g'", "S = 1"]


def test_upsilon_v_differential():
    code, obj = call_json("upsilon", "--nonlinearity", "V:c", "--tree", "One[I{1}(Xi)]")
    assert code == 0 and obj["results"]["symmetry"] == 1


def test_locality_noise_pair():
    code, obj = call_json("locality", "--tau1", "Xi", "--tau2", "Xi")
    assert code == 0
    res = obj["results"]
    assert res["ok"] and res["graded"] == {"D1": "0", "D2": "0"}
    assert len(res["ledger"]) == 5


def test_locality_failure_exit_code():
    code, _ = call("locality", "--tau1", "N(Xi,Xi)", "--tau2", "Xi")
    assert code == 1


def test_locality_rejects_nonlocal_input():
    assert call("locality", "--tau1", "Xi[I(Xi)]", "--tau2", "Xi")[0] == 2


def test_null_defaults():
    code, obj = call_json("null", "--tau2", "N(Xi,Xi)")
    assert code == 0 and {r["status"] for r in obj["results"]} == {"pass"}
    code, obj = call_json("null", "--k", "1", "--l", "0")
    assert code == 0 and obj["results"][0]["status"] == "out-of-claim"


def test_counterterm_sector2():
    code, obj = call_json("counterterm", "--sector", "2")
    assert code == 0 and obj["results"]["ok"]
    by_c = obj["results"]["counterterm"]["by_constant"]
    assert list(by_c) == ["C(One[Ix(Xi), Ix(Xi)])"]
    code, obj = call_json("counterterm", "--sector", "2", "--mode", "raw")
    assert code == 0 and len(obj["results"]["counterterm"]["terms"]) == 5


def test_counterterm_bad_sector():
    assert call("counterterm", "--sector", "3")[0] == 2


def test_ito_constant():
    code, obj = call_json("ito-constant", "--eps", "0.1", "--eps", "0.01")
    assert code == 0 and obj["results"]["ok"]
    assert [r["eps"] for r in obj["results"]["rows"]] == [0.1, 0.01]
    _, obj = call_json("ito-constant", "--eps", "1", "0.5", "--eps", "0.1")
    assert [r["eps"] for r in obj["results"]["rows"]] == [1.0, 0.5, 0.1]
    assert call("ito-constant", "--eps", "0")[0] == 2
    assert call("ito-constant", "--mollifier", "triangle")[0] == 2


def test_ito_constant_from_file(tmp_path):
    path = tmp_path / "rho.txt"
    path.write_text("-1 0\n0 1\n1 0\n")
    code, obj = call_json("ito-constant", "--mollifier", f"file:{path}")
    assert code == 0
    assert abs(obj["results"]["C1"] - 2 / 3) < 1e-12


def test_coherence_report():
    code, obj = call_json("coherence", "--max-noises", "2")
    assert code == 0 and obj["results"]["ok"]
    code, text = call("coherence", "--max-noises", "1", "--report", "text")
    assert code == 0 and "coefficients agree" in text


def test_parse_tree_and_expr():
    code, obj = call_json("parse", "One[I(Xi), Ix(Xi)]")
    assert code == 0 and obj["results"]["tree"] == "One[Ix(Xi), I(Xi)]"
    code, obj = call_json("parse", "--expr", "q*g")
    assert code == 0 and obj["results"]["json"]["terms"]


def test_parse_error_exit_code(capsys):
    assert call("parse", "One[Ix(Xi")[0] == 2
    assert "tree grammar" in capsys.readouterr().err


def test_calc_subcommand():
    code, obj = call_json("calc", "graft", "--sigma", "Xi", "--tau", "Xi[I(Xi)]", "--alpha", "I{1}")
    assert code == 0 and len(obj["results"]) == 2
    code, obj = call_json("calc", "nabla", "--sigma", "Xi", "--tau", "Xi", "--m", "1")
    assert code == 0 and obj["results"]["single_prefix"] == "d^1(a.)"
    assert call("calc", "star", "--sigma", "Xi", "--tau", "Xi")[0] == 2


def test_usage_errors():
    assert call()[0] == 2
    assert call("bogus")[0] == 2
    assert call("enumerate", "--noise-degree", "-2")[0] == 2


def test_config_file(tmp_path, monkeypatch):
    cfg = tmp_path / "qkpz.cfg"
    cfg.write_text("# defaults\nkappa = 1/50\nformat = json\nmax_noises = 2\n")
    monkeypatch.setenv("QKPZ_CONFIG", str(cfg))
    code, text = call("enumerate", "--noises", "2")
    obj = json.loads(text)
    assert code == 0 and obj["config"]["kappa"] == "1/50" and obj["config"]["max_noises"] == 2
    cfg.write_text("colour = blue\n")
    assert call("enumerate")[0] == 2


def test_read_config_defaults():
    assert read_config(None).max_noises == 3


def test_parse_word():
    w = parse_word("N(Xi, N(Xi,Xi))")
    assert len(w) > 5
    with pytest.raises(Exception):
        parse_word("N(Xi)")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qkpz", "upsilon", "--nonlinearity", "F",
                           "--tree", "Xi[I(Xi)]"], capture_output=True, text=True,
                          env={**os.environ, "PYTHONPATH": SRC})
    assert proc.returncode == 0 and proc.stdout.startswith("g*g'")


def test_config_echo_reflects_flags():
    _, obj = call_json("coherence", "--max-noises", "2")
    assert obj["config"]["max_noises"] == 2 and obj["results"]["max_noises"] == 2
