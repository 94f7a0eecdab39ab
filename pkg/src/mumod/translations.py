"""Satisfiability-preserving translations between multi-agent logics.

Each translation maps a formula of a logic with more frame conditions to
one of a logic with fewer conditions (or, for :func:`translate_embed_kmu`,
the other way round).  All outputs are closed, in negation normal form and
binder-normalised.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .formula import (
    TT,
    And,
    Box,
    Diamond,
    Fix,
    Formula,
    Lit,
    Modal,
    Mu,
    NameSupply,
    Nu,
    Or,
    Var,
    binding_table,
    box_all,
    build_axiom,
    closure_cl,
    conj,
    diamond_all,
    has_mu,
    implies,
    inv,
    inv_d,
    is_closed,
    is_recursion_free,
    modal_depth,
    negate,
    normalize,
    props,
    signed_subformula_list,
    size,
)
from .logic import FrameCondition, LogicSpec

#: Fresh propositions; user formulas may not mention them.
SYMMETRY_MARK = "_b"
LABEL_P = "_p"
LABEL_Q = "_q"
RESERVED_PROPS = frozenset({SYMMETRY_MARK, LABEL_P, LABEL_Q})

TRANSLATION_NAMES = ("one-step", "serial", "reflexive", "transitive", "symmetric", "embed")


class TranslationError(ValueError):
    pass


def _check_closed(f: Formula) -> None:
    if not is_closed(f):
        raise TranslationError("translations apply to closed formulas")


def _agent_set(A: Iterable[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(A))


def _rewrite_modalities(f: Formula, A: Sequence[str],
                        box_rule: Callable[[str, Formula], Formula],
                        dia_rule: Callable[[str, Formula], Formula]) -> Formula:
    """Bottom-up rewrite of the modalities of agents in ``A``.

    The rules receive the agent and the already translated body; every
    other constructor is rebuilt around translated children.
    """
    A = set(A)
    memo: dict[Formula, Formula] = {}

    def go(h: Formula) -> Formula:
        if h in memo:
            return memo[h]
        match h:
            case And(l, r):
                out = And(go(l), go(r))
            case Or(l, r):
                out = Or(go(l), go(r))
            case Box(a, b) if a in A:
                out = box_rule(a, go(b))
            case Diamond(a, b) if a in A:
                out = dia_rule(a, go(b))
            case Modal(a, b):
                out = type(h)(a, go(b))
            case Fix(x, b):
                out = type(h)(x, go(b))
            case _:
                out = h
        memo[h] = out
        return out

    return go(f)


def closed_signed_subformulas(f: Formula) -> list[Formula]:
    """Signed subformulas of f, each closed by substituting its binders."""
    bt = binding_table(f)
    out: dict[Formula, None] = {}
    for g in signed_subformula_list(f):
        if is_closed(g):
            out.setdefault(g, None)
    for g in signed_subformula_list(f):
        if not is_closed(g):
            # the dual of an open subformula closes to the dual of its closure
            positive = g in set(_subs(f))
            base = g if positive else negate(g)
            closed = closure_cl(base, bt)
            out.setdefault(closed if positive else negate(closed), None)
    return list(out)


def _subs(f: Formula):
    from .formula import subformula_list

    return subformula_list(f)


# --------------------------------------------------- recursion-free logics

def one_step_depth(f: Formula, cond: FrameCondition) -> int:
    md = modal_depth(f)
    return md * size(f) if FrameCondition(cond) is FrameCondition.FOUR else md


def translate_one_step(f: Formula, A: Iterable[str], cond: FrameCondition | str,
                       agents: Sequence[str]) -> Formula:
    """Conjoin bounded invariance of the condition's axiom over signed subformulas."""
    _check_closed(f)
    if not is_recursion_free(f):
        raise TranslationError("the one-step translation is for recursion-free formulas")
    cond = FrameCondition(cond)
    A = _agent_set(A)
    axioms: dict[Formula, None] = {}
    for psi in signed_subformula_list(f):
        for a in A:
            axioms.setdefault(build_axiom(cond, a, psi), None)
    if not axioms:
        return f
    return And(f, inv_d(conj(axioms), one_step_depth(f, cond), agents))


# ------------------------------------------------------ logics with recursion

def translate_serial_mu(f: Formula, A: Iterable[str], agents: Sequence[str]) -> Formula:
    _check_closed(f)
    A = _agent_set(A)
    if not A:
        return f
    return normalize(And(f, inv(conj(Diamond(a, TT) for a in A), agents,
                                var=NameSupply(f).fresh("X"))))


def translate_reflexive_mu(f: Formula, A: Iterable[str]) -> Formula:
    _check_closed(f)
    out = _rewrite_modalities(
        f, _agent_set(A),
        box_rule=lambda a, b: And(Box(a, b), b),
        dia_rule=lambda a, b: Or(Diamond(a, b), b),
    )
    return normalize(out)


def translate_transitive_mu(f: Formula, A: Iterable[str], agents: Sequence[str] | None = None,
                            *, literal: bool = False) -> Formula:
    """Replace modalities of agents in A by their transitive-closure readings.

    By default ``[a]psi`` becomes ``nu X.([a]psi & [a]X)``, invariance along
    ``a`` alone.  With ``literal=True`` the invariance ranges over every
    agent (``[Ag]X``), which is unsound once two agents interact; it is kept
    for comparison.
    """
    _check_closed(f)
    if literal and not agents:
        raise TranslationError("the literal form needs the full agent list")
    supply = NameSupply(f)

    def box_rule(a, b):
        x = supply.fresh("X")
        step = box_all(Var(x), agents) if literal else Box(a, Var(x))
        return Nu(x, And(Box(a, b), step))

    def dia_rule(a, b):
        x = supply.fresh("X")
        step = diamond_all(Var(x), agents) if literal else Diamond(a, Var(x))
        return Mu(x, Or(Diamond(a, b), step))

    return normalize(_rewrite_modalities(f, _agent_set(A), box_rule, dia_rule))


def translate_symmetric_mu(f: Formula, A: Iterable[str], agents: Sequence[str]) -> Formula:
    """Symmetric frames via a fresh marker proposition; least fixed points are rejected."""
    _check_closed(f)
    if has_mu(f):
        raise TranslationError("formula has a mu binder: outside the scope of the symmetric translation")
    if SYMMETRY_MARK in props(f):
        raise TranslationError(f"reserved proposition {SYMMETRY_MARK} occurs in the formula")
    A = _agent_set(A)
    if not A:
        return f
    mark = Lit(SYMMETRY_MARK)
    subs = closed_signed_subformulas(f)
    parts = []
    for a in A:
        parts.append(Box(a, Diamond(a, mark)))
        for psi in subs:
            parts.append(implies(psi, Box(a, Box(a, implies(mark, psi)))))
    return normalize(And(f, inv(conj(parts), agents, var=NameSupply(f, *subs).fresh("X"))))


# ------------------------------------------------------------ embedding K

LABELS_CYCLE3 = "cycle3"
LABELS_CYCLE2 = "cycle2"
LABELS_ALL = "all"


def label_formula(label: str) -> Formula:
    p, q = Lit(LABEL_P), Lit(LABEL_Q)
    table = {
        "p&q": And(p, q),
        "p&!q": And(p, negate(q)),
        "!p&q": And(negate(p), q),
        "p": p,
        "!p": negate(p),
    }
    return table[label]


_NEXT = {"p&q": "p&!q", "p&!q": "!p&q", "!p&q": "p&q", "p": "!p", "!p": "p"}

LABEL_RANGES = {
    LABELS_CYCLE3: ("p&q", "p&!q", "!p&q"),
    LABELS_CYCLE2: ("p", "!p"),
    LABELS_ALL: ("p", "!p", "p&q", "p&!q", "!p&q"),
}


def next_label(label: str) -> str:
    """Successor label: the three conjunctive labels cycle, ``p`` and ``!p`` swap."""
    try:
        return _NEXT[label]
    except KeyError:
        raise ValueError(f"unknown label {label!r}") from None


def translate_embed_kmu(f: Formula, A: Iterable[str], *, labels: str = LABELS_CYCLE3,
                        anchor: bool = True) -> Formula:
    """Embed K^mu into logics whose agents in A may add D, T and B.

    Successor states must carry the next label of the cycle, which rules out
    the self-loops, back edges and padding loops the target frames add.
    """
    _check_closed(f)
    clash = RESERVED_PROPS & {LABEL_P, LABEL_Q} & props(f)
    if clash:
        raise TranslationError(f"reserved propositions {sorted(clash)} occur in the formula")
    labs = LABEL_RANGES[labels]

    def dia_rule(a, b):
        return conj(implies(label_formula(v), Diamond(a, And(label_formula(next_label(v)), b)))
                    for v in labs)

    def box_rule(a, b):
        return conj(implies(label_formula(v), Box(a, implies(label_formula(next_label(v)), b)))
                    for v in labs)

    out = _rewrite_modalities(f, _agent_set(A), box_rule, dia_rule)
    if anchor:
        out = And(label_formula(labs[0] if labels != LABELS_ALL else "p&q"), out)
    return normalize(out)


# --------------------------------------------------------------- registry

@dataclass(frozen=True)
class TranslationRequest:
    """Everything needed to run a named translation and check its preconditions."""

    name: str
    A: tuple[str, ...]
    agents: tuple[str, ...]
    condition: FrameCondition | None = None
    source: LogicSpec | None = None
    target: LogicSpec | None = None
    options: tuple[tuple[str, object], ...] = ()

    def apply(self, f: Formula) -> Formula:
        if self.source is not None and self.target is not None:
            for problem in precondition_problems(self):
                warnings.warn(problem, stacklevel=2)
        return translate(self.name, f, self.A, self.agents, self.condition, **dict(self.options))


def translate(name: str, f: Formula, A: Iterable[str], agents: Sequence[str],
              condition: FrameCondition | str | None = None, **options) -> Formula:
    A = _agent_set(A)
    if name == "one-step":
        if condition is None:
            raise TranslationError("the one-step translation needs a frame condition")
        return translate_one_step(f, A, condition, agents)
    if name == "serial":
        return translate_serial_mu(f, A, agents)
    if name == "reflexive":
        return translate_reflexive_mu(f, A)
    if name == "transitive":
        return translate_transitive_mu(f, A, agents, **options)
    if name == "symmetric":
        return translate_symmetric_mu(f, A, agents)
    if name == "embed":
        return translate_embed_kmu(f, A, **options)
    raise TranslationError(f"unknown translation {name!r}; choose from {', '.join(TRANSLATION_NAMES)}")


_ALLOWED_BASE = {
    "serial": set(),
    "reflexive": {FrameCondition.D},
    "transitive": {FrameCondition.D, FrameCondition.T, FrameCondition.B},
    "symmetric": {FrameCondition.D, FrameCondition.T},
}
_ADDED = {
    "serial": FrameCondition.D,
    "reflexive": FrameCondition.T,
    "transitive": FrameCondition.FOUR,
    "symmetric": FrameCondition.B,
}


def precondition_problems(req: TranslationRequest) -> list[str]:
    """Mismatches between a request's logics and the theorem it relies on."""
    src, tgt = req.source, req.target
    if src is None or tgt is None:
        return []
    problems = []
    A = set(req.A)
    if req.name in ("reflexive", "transitive", "symmetric", "embed") and not A:
        problems.append(f"{req.name}: the agent subset must be non-empty")
    if req.name in _ADDED:
        added = _ADDED[req.name]
        for a in tgt.agents:
            base = tgt[a]
            if req.name != "serial" and not base <= _ALLOWED_BASE[req.name]:
                problems.append(f"{req.name}: target conditions for {a} exceed what the translation supports")
            expected = base | {added} if a in A else base
            if req.name == "serial":
                expected = {added} if a in A else set()
                if base:
                    problems.append(f"serial: target must be K for agent {a}")
            if set(src[a]) != set(expected):
                problems.append(f"{req.name}: source conditions for {a} should be {sorted(map(str, expected))}")
    elif req.name == "one-step":
        from .logic import CLOSURE_ORDER

        x = req.condition
        earlier = set(CLOSURE_ORDER[:CLOSURE_ORDER.index(x)]) if x else set()
        for a in tgt.agents:
            if not set(tgt[a]) <= earlier:
                problems.append(f"one-step: target conditions for {a} must precede {x}")
            expected = set(tgt[a]) | ({x} if a in A else set())
            if set(src[a]) != expected:
                problems.append(f"one-step: source conditions for {a} should be {sorted(map(str, expected))}")
    elif req.name == "embed":
        for a in tgt.agents:
            if set(src[a]):
                problems.append(f"embed: source must be K for agent {a}")
            allowed = {FrameCondition.D, FrameCondition.T, FrameCondition.B} if a in A else set()
            if not set(tgt[a]) <= allowed:
                problems.append(f"embed: target conditions for {a} are outside D, T, B")
    return problems
