import dataclasses
import json

import pytest
from hypothesis import given, settings

from mumod.formula import Box, build_axiom, negate, prop
from mumod.kripke import check_logic, model_check
from mumod.logic import FrameCondition as C, LogicSpec
from mumod.oracle import SearchBudget, Witness, bounded_sat
from mumod.syntax import parse
from mumod.tableau import (
    Sat,
    TableauBounds,
    TableauError,
    Unknown,
    Unsat,
    applicable_rules,
    check_proof,
    extract_model,
    place,
    run_tableau,
    saturate_branch,
    start_branch,
    tableau_proof,
)

from conftest import formulas

PHI1 = "(p & <a>p) & mu X.(!p | [a]X)"
PHI2 = "<b>p & mu X.([b]!p | [b]X)"


def L(text):
    return LogicSpec.parse(text)


def test_worked_example_is_satisfiable():
    f = parse(PHI1)
    v = run_tableau(f, L("a:K"))
    assert isinstance(v, Sat)
    assert model_check(v.model, 0, f)
    assert v.model.size == 2


def test_worked_example_is_unsatisfiable_in_k5():
    v = run_tableau(parse(PHI2), L("b:K5"))
    assert isinstance(v, Unsat)
    assert check_proof(v.proof)
    assert not v.depends_on_kappa
    assert len(v.proof.branches) == 3


def test_worked_example_is_satisfiable_in_k():
    # without the euclidean condition the b-successor can be a dead end
    assert isinstance(run_tableau(parse(PHI2), L("b:K")), Sat)


def test_transcript_lines():
    v = run_tableau(parse(PHI2), L("b:K5"))
    lines = v.transcript
    assert lines[0].startswith("branch 1")
    assert any("⊢" in line and line.rstrip().endswith("]") for line in lines)
    assert sum(line.strip().startswith("closed:") for line in lines) == 3


def test_proof_json_round_trips_through_json():
    v = run_tableau(parse(PHI2), L("b:K5"))
    data = json.loads(v.proof.dumps())
    assert data["logic"] == "b:K5"
    assert len(data["branches"]) == 3


def test_tampered_proofs_are_rejected():
    proof = run_tableau(parse(PHI2), L("b:K5")).proof
    assert not check_proof(dataclasses.replace(proof, branches=proof.branches[:-1]))
    br = proof.branches[0]
    bad = dataclasses.replace(br, steps=br.steps[:1] + br.steps[2:])
    assert not check_proof(dataclasses.replace(proof, branches=(bad,) + proof.branches[1:]))
    assert not check_proof(dataclasses.replace(proof, spec=L("b:K")))


@pytest.mark.parametrize("logic, sat", [
    ("a:K", True), ("a:K5", True), ("a:K4", True), ("a:B", True),
    ("a:T", False), ("a:D", False), ("a:S5", False),
])
def test_dead_end_formula(logic, sat):
    v = run_tableau(parse("mu X.[a]X"), L(logic))
    assert isinstance(v, Sat if sat else Unsat)


@pytest.mark.parametrize("cond, logic", [("T", "a:T"), ("B", "a:B"), ("4", "a:K4"), ("5", "a:K5"), ("D", "a:D")])
def test_axioms_are_valid_in_their_logic(cond, logic):
    ax = build_axiom(C(cond), "a")
    v = tableau_proof(ax, L(logic))
    assert isinstance(v, Unsat) and check_proof(v.proof)
    counter = tableau_proof(ax, L("a:K"))
    assert isinstance(counter, Sat)
    assert model_check(counter.model, 0, negate(ax))


def test_common_knowledge_style_formula():
    f = parse("nu X.(p & [a]X & [b]X) & <a><b>!p")
    assert isinstance(run_tableau(f, L("a:K; b:K")), Unsat)
    g = parse("nu X.(p & [a]X) & <b>!p")
    assert isinstance(run_tableau(g, L("a:S5; b:S5")), Sat)


def test_caps_give_unknown():
    f = parse("nu X.(<a>X & <a>p & <a>!p)")
    v = run_tableau(f, L("a:K"), TableauBounds(prefix_cap=1))
    assert isinstance(v, Unknown)
    assert "cap" in v.reason


def test_bounds_validation_and_defaults():
    with pytest.raises(TableauError):
        TableauBounds(kappa=0)
    b = TableauBounds().resolve(parse("p"))
    assert b.kappa == 8 and b.prefix_cap == 16


def test_input_errors():
    with pytest.raises(TableauError):
        run_tableau(parse("[b]p"), L("a:K"))
    with pytest.raises(TableauError):
        run_tableau(parse("mu X.[a]X").body, L("a:K"))


def test_branch_inspection():
    f = parse("[a]p & <a>q")
    b = start_branch(f, L("a:T"))
    rules = {r.rule for r in applicable_rules(b)}
    assert "and" in rules
    assert saturate_branch(b) in ("open", "split", "closed", "saturated")
    child = place(b, [("a", prop("q"))], Box("a", prop("p")))
    assert child != 0
    assert Box("a", prop("p")) in b.formulas_at(child)


def test_extract_model_from_open_branch():
    f = parse("p & <a>q")
    b = start_branch(f, L("a:K"))
    saturate_branch(b)
    m = extract_model(b)
    assert model_check(m, 0, f)


def test_extract_model_refuses_closed_branch():
    b = start_branch(parse("p & !p"), L("a:K"))
    saturate_branch(b)
    assert b.is_closed
    with pytest.raises(TableauError):
        extract_model(b)


@pytest.mark.parametrize("logic", ["a:K", "a:D", "a:T", "a:B", "a:K4", "a:S4", "a:K5", "a:S5", "a:KD45"])
@settings(max_examples=40, deadline=None)
@given(f=formulas(max_size=7, agents=("a",), props=("p",)))
def test_agrees_with_oracle(logic, f):
    spec = L(logic)
    v = run_tableau(f, spec)
    if isinstance(v, Sat):
        assert model_check(v.model, 0, f) and check_logic(v.model, spec)
    elif isinstance(v, Unsat):
        assert check_proof(v.proof)
        assert not isinstance(bounded_sat(f, spec, SearchBudget(3)), Witness)


@settings(max_examples=40, deadline=None)
@given(formulas(max_size=7))
def test_two_agents_agree_with_oracle(f):
    spec = L("a:K4; b:T")
    v = run_tableau(f, spec)
    if isinstance(v, Sat):
        assert model_check(v.model, 0, f) and check_logic(v.model, spec)
    elif isinstance(v, Unsat):
        assert not isinstance(bounded_sat(f, spec, SearchBudget(2)), Witness)
