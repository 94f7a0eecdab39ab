import pytest
from hypothesis import given, settings

from mumod.formula import FF, TT, And, Box, Diamond, Lit, Mu, Nu, Or, Var, prop
from mumod.syntax import FormulaSyntaxError, UnknownAgentError, parse, parse_many, render

from conftest import formulas

p, q = prop("p"), prop("q")


@pytest.mark.parametrize("text, expected", [
    ("tt", TT),
    ("ff", FF),
    ("p", p),
    ("!p", Lit("p", False)),
    ("p & q", And(p, q)),
    ("p | q & p", Or(p, And(q, p))),
    ("[a]p", Box("a", p)),
    ("<b>!q", Diamond("b", Lit("q", False))),
    ("p -> q", Or(Lit("p", False), q)),
    ("!(p & <a>q)", Or(Lit("p", False), Box("a", Lit("q", False)))),
    ("!!p", p),
    ("!tt", FF),
])
def test_parse_examples(text, expected):
    assert parse(text) is expected


def test_binders_extend_right():
    f = parse("mu X.p | <a>X")
    assert f == Mu("X", Or(p, Diamond("a", Var("X"))))


def test_negated_binder_dualises():
    assert parse("!mu X.(p | [a]X)") == Nu("X", And(Lit("p", False), Diamond("a", Var("X"))))


def test_implication_is_right_associative():
    assert parse("p -> q -> p") == parse("p -> (q -> p)")


def test_worked_example_formula_renders_back():
    text = "p & <a>p & mu X.(!p | [a]X)"
    assert render(parse(text)) == text


@pytest.mark.parametrize("text, message", [
    ("p &", "end of input"),
    ("(p", "end of input"),
    ("mu x.p", "uppercase"),
    ("X", "unbound"),
    ("mu X.!X", "negation"),
    ("_p", "reserved"),
    ("p $ q", "unexpected character"),
    ("p & nu", "recursion variable"),
])
def test_syntax_errors(text, message):
    with pytest.raises(FormulaSyntaxError, match=message):
        parse(text)


def test_error_reports_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse("p & & q")
    assert info.value.pos == 4


def test_reserved_names_can_be_allowed():
    assert parse("_b", allow_reserved=True) == Lit("_b")


def test_unknown_agent():
    with pytest.raises(UnknownAgentError):
        parse("[c]p", agents=["a", "b"])
    assert parse("[a]p", agents=["a"]) == Box("a", p)


def test_parse_many():
    assert parse_many(["p", "q"]) == [p, q]


@settings(max_examples=300)
@given(formulas(max_size=16))
def test_render_parse_round_trip(f):
    assert parse(render(f)) is f
    assert str(f) == render(f)
