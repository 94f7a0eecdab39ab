import json

import pytest

from mumod.cli import EXIT_NO, EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE, run_command
from mumod.kripke import KripkeModel, model_check
from mumod.syntax import parse

PHI1 = "(p & <a>p) & mu X.(!p | [a]X)"
PHI2 = "<b>p & mu X.([b]!p | [b]X)"


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({
        "states": ["u", "v"],
        "agents": ["a"],
        "transitions": [["u", "a", "v"]],
        "valuation": {"u": ["p"], "v": []},
        "designated": "u",
    }))
    return path


def test_parse_prints_normal_form(capsys):
    assert run_command(["parse", "--formula", "!(p & <a>q)"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == str(parse("!(p & <a>q)"))


def test_parse_error_is_usage(capsys):
    assert run_command(["parse", "--formula", "p &"]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_unknown_logic_is_usage():
    assert run_command(["sat", "--formula", "p", "--logic", "a:XYZ"]) == EXIT_USAGE


def test_missing_argument_exits_with_usage():
    with pytest.raises(SystemExit) as exc:
        run_command(["sat", "--formula", "p"])
    assert exc.value.code == EXIT_USAGE


def test_sat_writes_witness(tmp_path, capsys):
    out = tmp_path / "w.json"
    assert run_command(["sat", "--formula", PHI1, "--logic", "a:K", "--out", str(out)]) == EXIT_OK
    assert capsys.readouterr().out.startswith("sat")
    m = KripkeModel.load(out)
    assert model_check(m, m.designated, parse(PHI1))


def test_unsat_writes_proof_and_transcript(tmp_path, capsys):
    out, tr = tmp_path / "p.json", tmp_path / "t.txt"
    code = run_command(["sat", "--formula", PHI2, "--logic", "b:K5", "--out", str(out), "--transcript", str(tr)])
    assert code == EXIT_NO
    assert capsys.readouterr().out.startswith("unsat")
    assert len(json.loads(out.read_text())["branches"]) == 3
    assert "closed" in tr.read_text()


def test_sat_unknown_under_tiny_cap(capsys):
    code = run_command(["sat", "--formula", "nu X.(<a>X & <a>p & <a>!p)", "--logic", "a:K", "--prefix-cap", "1"])
    assert code == EXIT_UNKNOWN
    assert capsys.readouterr().out.startswith("unknown")


def test_oracle_engine_and_command():
    assert run_command(["sat", "--engine", "oracle", "--formula", "<a>p", "--logic", "a:K"]) == EXIT_OK
    assert run_command(["oracle", "--formula", "mu X.[a]X", "--logic", "a:T"]) == EXIT_NO


def test_mc(model_file, capsys):
    assert run_command(["mc", "--model", str(model_file), "--formula", "tt"]) == EXIT_OK
    assert run_command(["mc", "--model", str(model_file), "--formula", "<a>p"]) == EXIT_NO
    assert run_command(["mc", "--model", str(model_file), "--formula", "[a]ff", "--state", "v"]) == EXIT_OK
    assert run_command(["mc", "--model", str(model_file), "--formula", "[a]ff", "--state", "1"]) == EXIT_OK
    out = capsys.readouterr().out.split()
    assert out == ["true", "false", "true", "true"]


def test_mc_missing_file_is_usage(tmp_path):
    assert run_command(["mc", "--model", str(tmp_path / "none.json"), "--formula", "p"]) == EXIT_USAGE


def test_closure(model_file, tmp_path):
    out = tmp_path / "c.json"
    assert run_command(["closure", "--model", str(model_file), "--agent", "a",
                        "--condition", "T", "--out", str(out)]) == EXIT_OK
    edges = {tuple(e) for e in json.loads(out.read_text())["transitions"]}
    assert edges == {("u", "a", "u"), ("u", "a", "v"), ("v", "a", "v")}
    assert run_command(["closure", "--model", str(model_file), "--agent", "z", "--condition", "T"]) == EXIT_USAGE


def test_axioms(capsys):
    assert run_command(["axioms", "--condition", "T", "--agent", "a"]) == EXIT_OK
    assert run_command(["axioms", "--condition", "4", "--agent", "b", "--arg", "q"]) == EXIT_OK
    first, second = capsys.readouterr().out.splitlines()
    assert "a" in first and "p" in first
    assert "q" in second and "b" in second


def test_translate(capsys):
    assert run_command(["translate", "--name", "serial", "--agents", "a", "--formula", "<a>p"]) == EXIT_OK
    text = capsys.readouterr().out.strip()
    assert parse(text) is not None
    assert run_command(["translate", "--name", "one-step", "--agents", "a", "--formula", "p"]) == EXIT_USAGE
    assert run_command(["translate", "--name", "serial", "--agents", "a", "--formula", "<b>p",
                        "--all-agents", "a"]) == EXIT_USAGE


def test_crosscheck_jsonl(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    code = run_command(["crosscheck", "--name", "serial", "--agents", "a", "--target", "a:K",
                        "--size", "3", "--out", str(out)])
    assert code == EXIT_OK
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert rows and all(r["classification"] == "agree" for r in rows)
    assert "disagree 0" in capsys.readouterr().err


def test_crosscheck_seed_from_environment(tmp_path, monkeypatch):
    args = ["crosscheck", "--name", "reflexive", "--agents", "a", "--target", "a:K",
            "--size", "2", "--count", "20", "--sample", "10"]
    monkeypatch.setenv("MUMOD_SEED", "5")
    run_command(args + ["--out", str(tmp_path / "1.jsonl")])
    run_command(args + ["--seed", "9", "--out", str(tmp_path / "2.jsonl")])
    def formulas(name):
        return [json.loads(line)["formula"] for line in (tmp_path / name).read_text().splitlines()]
    assert formulas("1.jsonl") == formulas("2.jsonl")
    monkeypatch.delenv("MUMOD_SEED")
    run_command(args + ["--seed", "9", "--out", str(tmp_path / "3.jsonl")])
    assert formulas("3.jsonl") != formulas("1.jsonl")
    monkeypatch.setenv("MUMOD_SEED", "x")
    assert run_command(args) == EXIT_USAGE
