import pytest
from hypothesis import given, settings

from mumod.formula import props
from mumod.kripke import KripkeModel, check_logic, model_check
from mumod.logic import FrameCondition as C, LogicSpec
from mumod.oracle import SearchBudget, Witness, bounded_sat
from mumod.syntax import parse
from mumod.transfer import (
    close_agents,
    follow_labels,
    generated,
    label_of,
    labelled_copies,
    plan,
    strip_props,
    unravel_symmetric,
)
from mumod.translations import LABEL_P, LABEL_Q, SYMMETRY_MARK

from conftest import formulas


def test_generated_submodel():
    m = KripkeModel.build(3, ["a"], [(0, "a", 1), (2, "a", 0)])
    assert generated(m).size == 2


def test_close_agents_only_touches_listed_agents():
    m = KripkeModel.build(2, ["a", "b"], [(0, "a", 1), (0, "b", 1)])
    c = close_agents(m, ["a"], [C.B])
    assert c.relation("a") == {(0, 1), (1, 0)}
    assert c.relation("b") == {(0, 1)}


def test_unravel_marks_return_steps():
    m = KripkeModel.build(2, ["a"], [(0, "a", 1), (1, "a", 0)], [{"p"}, set()])
    u = unravel_symmetric(m, ["a"])
    marked = [s for s in range(u.size) if SYMMETRY_MARK in u.valuation[s]]
    assert marked
    # a marked state copies the state two a-steps back
    for x in marked:
        plain = u.valuation[x] - {SYMMETRY_MARK}
        assert any(u.valuation[s] - {SYMMETRY_MARK} == plain
                   for s in range(u.size) for t in u.successors("a", s) if x in u.successors("a", t))


def test_labelled_copies_cycle_labels():
    m = KripkeModel.build(2, ["a", "b"], [(0, "a", 1), (0, "b", 1)])
    c = labelled_copies(m, ["a"])
    assert label_of(c.valuation[c.designated]) == "p&q"
    for s, a, t in c.transitions:
        ls, lt = label_of(c.valuation[s]), label_of(c.valuation[t])
        assert (lt != ls) if a == "a" else (lt == ls)
    back = strip_props(follow_labels(c, ["a"]), {LABEL_P, LABEL_Q})
    assert back.size == 3  # s1 is reached under two labels


def test_plan_derives_source_logics():
    t = LogicSpec.parse("a:K; b:T")
    assert plan("serial", ["a"], t).source == LogicSpec.parse("a:D; b:T")
    assert plan("transitive", ["a"], LogicSpec.parse("a:T")).source == LogicSpec.parse("a:S4")
    assert plan("one-step", ["a"], LogicSpec.parse("a:K4"), "5").source == LogicSpec.parse("a:K45")
    assert plan("embed", ["a"], LogicSpec.parse("a:TB")).source == LogicSpec.parse("a:K")
    with pytest.raises(ValueError):
        plan("one-step", ["a"], t)
    with pytest.raises(ValueError):
        plan("nope", ["a"], t)


def _forward_ok(p, f, bound=2):
    r = bounded_sat(f, p.source, SearchBudget(bound))
    if not isinstance(r, Witness):
        return
    moved = p.forward(r.model)
    g = p.translate(f)
    assert check_logic(moved, p.target)
    assert model_check(moved, moved.designated, g)


def _backward_ok(p, f, bound=2):
    g = p.translate(f)
    r = bounded_sat(g, p.target, SearchBudget(bound, max_props=len(props(g))))
    if not isinstance(r, Witness):
        return
    moved = p.backward(r.model)
    assert check_logic(moved, p.source)
    assert model_check(moved, moved.designated, f)


AG = ("a",)


@settings(max_examples=60, deadline=None)
@given(formulas(max_size=8, agents=AG, props=("p",), mu=False))
def test_symmetric_forward_map(f):
    _forward_ok(plan("symmetric", ["a"], LogicSpec.parse("a:K")), f)


@settings(max_examples=60, deadline=None)
@given(formulas(max_size=8, agents=AG, props=("p",), mu=False))
def test_symmetric_backward_map(f):
    _backward_ok(plan("symmetric", ["a"], LogicSpec.parse("a:K")), f)


@pytest.mark.parametrize("target", ["a:T", "a:B", "a:D", "a:TB"])
def test_embed_maps_on_examples(target):
    p = plan("embed", ["a"], LogicSpec.parse(target))
    for text in ["<a>p & [a]!p | <a><a>p", "mu X.(p | <a>X)", "nu X.(<a>X & [a]!p)", "[a]ff", "<a>[a]ff"]:
        _forward_ok(p, parse(text))
        _backward_ok(p, parse(text), bound=3)


@settings(max_examples=60, deadline=None)
@given(formulas(max_size=8, agents=AG, props=("p",)))
def test_embed_forward_map(f):
    _forward_ok(plan("embed", ["a"], LogicSpec.parse("a:TB")), f)


@pytest.mark.parametrize("name", ["serial", "reflexive", "transitive"])
@settings(max_examples=40, deadline=None)
@given(f=formulas(max_size=8, agents=AG, props=("p",)))
def test_recursive_translation_maps(name, f):
    p = plan(name, ["a"], LogicSpec.parse("a:K"))
    _forward_ok(p, f)
    _backward_ok(p, f)


@pytest.mark.parametrize("cond, target", [("D", "a:K"), ("T", "a:K"), ("B", "a:T"), ("4", "a:T"), ("5", "a:K4")])
@settings(max_examples=30, deadline=None)
@given(f=formulas(max_size=6, agents=AG, props=("p",), recursion=False))
def test_one_step_maps(cond, target, f):
    p = plan("one-step", ["a"], LogicSpec.parse(target), cond)
    _forward_ok(p, f)


def test_two_agent_transitive_cross_check():
    p = plan("transitive", ["a"], LogicSpec.parse("a:K; b:K"))
    corpus = [parse(t) for t in ("[a]p & <b><a>!p", "<a><a>p & [a]!p", "[a]p & <a><a>!p")]
    rep = p.cross_check(corpus, SearchBudget(3), SearchBudget(3))
    assert rep.summary()["disagree"] == 0


def test_literal_transitive_is_caught_by_cross_check():
    p = plan("transitive", ["a"], LogicSpec.parse("a:K; b:K"), literal=True)
    rep = p.cross_check([parse("[a]p & <b><a>!p")], SearchBudget(3), SearchBudget(3))
    assert rep.summary()["disagree"] == 1
