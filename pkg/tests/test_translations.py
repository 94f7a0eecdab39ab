import warnings

import pytest
from hypothesis import given, settings

from mumod.formula import agents_of, is_closed, props, size
from mumod.logic import FrameCondition as C, LogicSpec
from mumod.oracle import NoModelUpTo, SearchBudget, Witness, bounded_sat
from mumod.syntax import parse
from mumod.translations import (
    LABEL_P,
    LABEL_Q,
    SYMMETRY_MARK,
    TRANSLATION_NAMES,
    TranslationError,
    TranslationRequest,
    closed_signed_subformulas,
    label_formula,
    next_label,
    one_step_depth,
    precondition_problems,
    translate,
    translate_embed_kmu,
    translate_one_step,
    translate_reflexive_mu,
    translate_serial_mu,
    translate_symmetric_mu,
    translate_transitive_mu,
)

from conftest import formulas


def P(text):
    return parse(text, allow_reserved=True)


def test_serial_adds_invariant_seriality():
    assert translate_serial_mu(parse("[a]p"), ["a"], ["a"]) == P("[a]p & nu X.(<a>tt & [a]X)")


def test_serial_uses_every_agent_for_invariance():
    g = translate_serial_mu(parse("[a]p"), ["a"], ["a", "b"])
    assert g == P("[a]p & nu X.(<a>tt & ([a]X & [b]X))")


def test_reflexive_rewrites_modalities():
    f = parse("mu X.[a]X")
    assert translate_reflexive_mu(f, ["a"]) == P("mu X.([a]X & X)")
    assert translate_reflexive_mu(parse("<b>p"), ["a"]) == parse("<b>p")


def test_transitive_uses_agent_local_invariance():
    g = translate_transitive_mu(parse("[a]p"), ["a"], ["a", "b"])
    assert g == P("nu X.([a]p & [a]X)")
    lit = translate_transitive_mu(parse("[a]p"), ["a"], ["a", "b"], literal=True)
    assert lit == P("nu X.([a]p & ([a]X & [b]X))")


def test_literal_transitive_form_is_unsound_with_two_agents():
    # satisfiable in a:K4, b:K but its literal translation is not K-satisfiable
    f = parse("[a]p & <b><a>!p")
    source = LogicSpec.parse("a:K4; b:K")
    target = LogicSpec.parse("a:K; b:K")
    assert isinstance(bounded_sat(f, source), Witness)
    lit = translate_transitive_mu(f, ["a"], ["a", "b"], literal=True)
    assert isinstance(bounded_sat(lit, target), NoModelUpTo)
    good = translate_transitive_mu(f, ["a"], ["a", "b"])
    assert isinstance(bounded_sat(good, target), Witness)


def test_one_step_rejects_recursion():
    with pytest.raises(TranslationError, match="recursion-free"):
        translate_one_step(parse("nu X.[a]X"), ["a"], C.T, ["a"])


def test_one_step_depth():
    f = parse("[a][a]p")
    assert one_step_depth(f, C.T) == 2
    assert one_step_depth(f, C.FOUR) == 2 * size(f)


def test_one_step_t_example():
    g = translate_one_step(parse("[a]p"), ["a"], C.T, ["a"])
    assert model_check_sat(g, "a:K")
    # the T axiom instance for [a]p is part of the translation
    assert "<a>!p | p" in str(g)


def model_check_sat(f, logic):
    return isinstance(bounded_sat(f, LogicSpec.parse(logic)), Witness)


def test_symmetric_rejects_least_fixpoints():
    with pytest.raises(TranslationError, match="outside the scope"):
        translate_symmetric_mu(parse("mu X.[a]X"), ["a"], ["a"])


def test_symmetric_marker_is_reserved():
    with pytest.raises(TranslationError, match="reserved"):
        translate_symmetric_mu(P("_b"), ["a"], ["a"])
    g = translate_symmetric_mu(parse("<a>[a]!p & p"), ["a"], ["a"])
    assert SYMMETRY_MARK in props(g)


def test_symmetric_example_is_unsat_in_k():
    # <a>[a]!p & p is B-unsatisfiable, its translation K-unsatisfiable
    f = parse("p & <a>[a]!p")
    assert isinstance(bounded_sat(f, LogicSpec.parse("a:B")), NoModelUpTo)
    g = translate_symmetric_mu(f, ["a"], ["a"])
    assert isinstance(bounded_sat(g, LogicSpec.parse("a:K"), SearchBudget(3, 3)), NoModelUpTo)


def test_closed_signed_subformulas_are_closed():
    f = parse("nu X.(p & [a]mu Y.(<a>Y | X))")
    subs = closed_signed_subformulas(f)
    assert all(is_closed(g) for g in subs)
    assert f in subs


def test_labels_cycle():
    assert [next_label(x) for x in ("p&q", "p&!q", "!p&q")] == ["p&!q", "!p&q", "p&q"]
    assert next_label("p") == "!p"
    with pytest.raises(ValueError):
        next_label("q")
    assert props(label_formula("p&!q")) == {LABEL_P, LABEL_Q}


def test_embed_example():
    g = translate_embed_kmu(parse("<a>p"), ["a"])
    assert str(g).startswith("_p & _q")
    assert agents_of(g) == {"a"}


def test_embed_refuses_label_names():
    with pytest.raises(TranslationError):
        translate_embed_kmu(P("_p"), ["a"])


@pytest.mark.parametrize("text", ["<a>ff", "<a>p & [a]!p"])
def test_embed_needs_the_root_label(text):
    # K-unsatisfiable; without the root label the translation is T-satisfiable
    f = parse(text)
    t = LogicSpec.parse("a:T")
    assert isinstance(bounded_sat(f, LogicSpec.parse("a:K")), NoModelUpTo)
    assert isinstance(bounded_sat(translate_embed_kmu(f, ["a"]), t, SearchBudget(3, 3)), NoModelUpTo)
    assert isinstance(bounded_sat(translate_embed_kmu(f, ["a"], anchor=False), t, SearchBudget(3, 3)), Witness)


def test_translate_dispatch():
    f = parse("[a]p")
    for name in TRANSLATION_NAMES:
        g = translate(name, f, ["a"], ["a"], "T" if name == "one-step" else None)
        assert is_closed(g)
    with pytest.raises(TranslationError):
        translate("nope", f, ["a"], ["a"])
    with pytest.raises(TranslationError):
        translate("one-step", f, ["a"], ["a"])


def test_request_warns_on_mismatched_logics():
    req = TranslationRequest("serial", ("a",), ("a",), source=LogicSpec.parse("a:T"),
                             target=LogicSpec.parse("a:K"))
    assert precondition_problems(req)
    with pytest.warns(UserWarning):
        req.apply(parse("p"))
    ok = TranslationRequest("serial", ("a",), ("a",), source=LogicSpec.parse("a:D"),
                            target=LogicSpec.parse("a:K"))
    assert precondition_problems(ok) == []
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ok.apply(parse("p"))


def test_one_step_preconditions():
    good = TranslationRequest("one-step", ("a",), ("a",), C.FIVE,
                              LogicSpec.parse("a:K45"), LogicSpec.parse("a:K4"))
    assert precondition_problems(good) == []
    bad = TranslationRequest("one-step", ("a",), ("a",), C.T,
                             LogicSpec.parse("a:S4"), LogicSpec.parse("a:K4"))
    assert precondition_problems(bad)


@settings(max_examples=100, deadline=None)
@given(formulas(max_size=10))
def test_translations_are_closed_and_keep_agents(f):
    agents = ["a", "b"]
    for name in ("serial", "reflexive", "transitive", "embed"):
        g = translate(name, f, ["a"], agents)
        assert is_closed(g)
        assert agents_of(g) <= set(agents)


@settings(max_examples=100, deadline=None)
@given(formulas(max_size=10, recursion=False))
def test_one_step_output_is_recursion_free_and_contains_input(f):
    g = translate("one-step", f, ["a"], ["a", "b"], "B")
    assert g is f or f in g.children()
