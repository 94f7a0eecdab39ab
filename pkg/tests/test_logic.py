import pytest

from mumod.logic import (
    CLOSURE_ORDER,
    FrameCondition as C,
    LogicSpec,
    closure_preserving_order,
    conditions_from_name,
    name_of_conditions,
)


def test_closure_order():
    assert closure_preserving_order() == [C.D, C.T, C.B, C.FOUR, C.FIVE]
    assert tuple(closure_preserving_order()) == CLOSURE_ORDER


@pytest.mark.parametrize("name, conds", [
    ("K", set()),
    ("D", {C.D}),
    ("T", {C.T}),
    ("B", {C.B}),
    ("K4", {C.FOUR}),
    ("K5", {C.FIVE}),
    ("K45", {C.FOUR, C.FIVE}),
    ("KD45", {C.D, C.FOUR, C.FIVE}),
    ("S4", {C.T, C.FOUR}),
    ("S5", {C.T, C.FOUR, C.FIVE}),
    ("TB", {C.T, C.B}),
    ("{D,4}", {C.D, C.FOUR}),
])
def test_named_logics(name, conds):
    assert conditions_from_name(name) == conds


def test_unknown_logic_name():
    with pytest.raises(ValueError):
        conditions_from_name("Q7")


def test_spec_string_round_trip():
    spec = LogicSpec.parse("a:K; b:S5")
    assert spec.agents == ("a", "b")
    assert spec["a"] == set()
    assert spec["b"] == {C.T, C.FOUR, C.FIVE}
    assert LogicSpec.parse(spec.render()) == spec


def test_spec_helpers():
    spec = LogicSpec.uniform(["a", "b"], "K4")
    assert spec.has("b", C.FOUR)
    assert not spec.has("a", C.T)
    assert spec.with_agent("a", [C.T])["a"] == {C.T}
    assert LogicSpec.from_mapping({"a": ["D"]})["a"] == {C.D}


def test_name_of_conditions():
    assert name_of_conditions({C.T, C.FOUR}) in ("S4", "T4", "{T,4}")
    assert conditions_from_name(name_of_conditions({C.D, C.FIVE})) == {C.D, C.FIVE}


def test_frame_condition_parse():
    assert C.parse(" 4 ") is C.FOUR
    assert C.parse("t") is C.T
    with pytest.raises(ValueError):
        C.parse("X")
