import pytest
from hypothesis import given, settings

from mumod.formula import (
    FF,
    TT,
    And,
    Box,
    Diamond,
    Lit,
    Mu,
    Nu,
    Or,
    Var,
    agents_of,
    binders_unique,
    binding_table,
    build_axiom,
    closure_cl,
    conj,
    disj,
    eve,
    free_vars,
    has_mu,
    implies,
    inv,
    inv_d,
    is_closed,
    is_recursion_free,
    modal_depth,
    negate,
    normalize,
    prop,
    props,
    signed_subformulas,
    size,
    subformulas,
    substitute,
    tree_size,
)
from mumod.logic import FrameCondition as C
from mumod.syntax import parse

from conftest import formulas

p, q = prop("p"), prop("q")


def test_hash_consing_gives_identity():
    assert And(p, Box("a", q)) is And(prop("p"), Box("a", prop("q")))
    assert Lit("p", True) is not Lit("p", False)


def test_size_counts_distinct_subformulas():
    f = parse("<a>p & [a]<a>p")
    assert size(f) == 4  # p, <a>p, [a]<a>p, the conjunction
    assert tree_size(f) == 6


def test_subformulas_and_signed():
    f = parse("[a]p | q")
    assert subformulas(f) == {f, Box("a", p), p, q}
    assert negate(q) in signed_subformulas(f)
    assert len(signed_subformulas(f)) == 2 * len(subformulas(f))


def test_modal_depth_and_agents():
    f = parse("[a]<b>p & <a>q")
    assert modal_depth(f) == 2
    assert agents_of(f) == {"a", "b"}
    assert props(f) == {"p", "q"}


def test_free_vars_and_closure():
    body = Or(p, Box("a", Var("X")))
    assert free_vars(body) == {"X"}
    assert is_closed(Mu("X", body))
    assert not is_closed(body)


def test_negate_dualises_every_connective():
    f = parse("mu X.(p & [a]X) | nu Y.(<b>Y | !q)")
    assert negate(f) == parse("nu X.(!p | <a>X) & mu Y.([b]Y & q)")
    assert negate(TT) is FF


@given(formulas())
def test_negate_is_an_involution(f):
    assert negate(negate(f)) is f


def test_conj_disj_units():
    assert conj([]) is TT
    assert disj([]) is FF
    assert conj([p]) is p
    assert conj([p, q]) == And(p, q)


def test_implies_is_nnf():
    assert implies(Box("a", p), p) == Or(Diamond("a", negate(p)), p)


@pytest.mark.parametrize("cond, text", [
    ("D", "<a>tt"),
    ("T", "[a]p -> p"),
    ("B", "<a>[a]p -> p"),
    ("4", "[a]p -> [a][a]p"),
    ("5", "<a>[a]p -> [a]p"),
])
def test_axiom_schemas(cond, text):
    assert build_axiom(C(cond), "a") == parse(text)


def test_axiom_instantiation():
    assert build_axiom(C.T, "b", q) == parse("[b]q -> q")


def test_inv_eve_shapes():
    assert inv(p, ["a", "b"], "X") == Nu("X", And(p, And(Box("a", Var("X")), Box("b", Var("X")))))
    assert eve(p, ["a"], "X") == Mu("X", Or(p, Diamond("a", Var("X"))))


def test_inv_d_levels():
    assert inv_d(p, 0, ["a"]) is p
    assert inv_d(p, 2, ["a"]) == conj([p, Box("a", p), Box("a", Box("a", p))])
    with pytest.raises(ValueError):
        inv_d(p, -1, ["a"])


def test_recursion_flags():
    assert has_mu(parse("nu X.(mu Y.<a>Y & [a]X)"))
    assert not has_mu(parse("nu X.[a]X"))
    assert is_recursion_free(parse("[a]p"))
    assert not is_recursion_free(parse("nu X.[a]X"))


def test_substitute_replaces_free_occurrences():
    f = Mu("X", Or(Var("Y"), Box("a", Var("X"))))
    assert substitute(f, "Y", p) == Mu("X", Or(p, Box("a", Var("X"))))


def test_substitute_refuses_capture():
    f = Mu("X", Or(Var("Y"), Box("a", Var("X"))))
    with pytest.raises(RuntimeError, match="capture"):
        substitute(f, "Y", Var("X"))


def test_normalize_makes_binders_unique():
    twice = And(Mu("X", Box("a", Var("X"))), Nu("X", Diamond("a", Var("X"))))
    assert not binders_unique(twice)
    assert binders_unique(normalize(twice))


def test_binding_table_and_closure():
    f = parse("nu X.(mu Y.(<a>Y | [a]X))")
    bt = binding_table(f)
    assert bt.less("X", "Y") or bt.less("Y", "X")
    inner = f.body.body  # the body of Y, with X and Y free
    closed = closure_cl(inner, bt)
    assert is_closed(closed)


@settings(max_examples=200)
@given(formulas())
def test_normalize_is_idempotent(f):
    assert normalize(f) is f
    assert binders_unique(f)
