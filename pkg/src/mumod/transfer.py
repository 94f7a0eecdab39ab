"""Model transformations behind the satisfiability-preserving translations.

Each translation comes with a *forward* map (a model of the source formula
in the source logic to a candidate model of the translated formula in the
target logic) and a *backward* map.  The cross-checker model checks every
candidate, so these maps only need to be right when the translation is;
a wrong map shows up as a missing transfer, never as a false verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .formula import Formula
from .kripke import KripkeModel, close_for_logic, close_relation_all
from .logic import FrameCondition, LogicSpec
from .oracle import SearchBudget, cross_check_translation, CrossCheckReport
from .translations import (
    LABEL_P,
    LABEL_Q,
    LABEL_RANGES,
    LABELS_CYCLE3,
    SYMMETRY_MARK,
    next_label,
    translate,
)

ModelMap = Callable[[KripkeModel], KripkeModel | None]


def generated(m: KripkeModel) -> KripkeModel:
    """The submodel generated by the designated state."""
    root = m.designated or 0
    keep = m.reachable(root)
    return m.restrict(keep)


def close_agents(m: KripkeModel, agents: Sequence[str], conds: Sequence[FrameCondition]) -> KripkeModel:
    """Close the given agents' relations under all of ``conds``."""
    for a in agents:
        m = m.with_relation(a, close_relation_all(m.relation(a), m.size, conds))
    return m


def unravel_symmetric(m: KripkeModel, A: Sequence[str]) -> KripkeModel:
    """Copy of a model with ``_b`` marking a return step to the parent.

    States are ``(w, origin, mark)``: ``origin`` is the state and agent the
    copy was entered from.  For an agent in A the copy can step back to its
    origin, and that copy carries the marker, so every marked state two
    ``a``-steps away is a copy of the starting state.
    """
    A = set(A)
    root = (m.designated or 0, None, 0)
    index = {root: 0}
    order = [root]
    edges = set()
    i = 0
    while i < len(order):
        w, origin, _ = order[i]
        for a in m.agents:
            targets = []
            for v in sorted(m.successors(a, w)):
                targets.append((v, (w, a) if a in A else None, 0))
            if a in A and origin is not None and origin[1] == a:
                targets.append((origin[0], (w, a), 1))
            for t in targets:
                if t not in index:
                    index[t] = len(order)
                    order.append(t)
                edges.add((i, a, index[t]))
        i += 1
    val = []
    for w, _, mark in order:
        v = set(m.valuation[w])
        if mark:
            v.add(SYMMETRY_MARK)
        val.append(v)
    return KripkeModel.build(len(order), m.agents, edges, val, designated=0)


_LABEL_VALUES = {"p&q": {LABEL_P, LABEL_Q}, "p&!q": {LABEL_P}, "!p&q": {LABEL_Q}, "p": {LABEL_P}, "!p": set()}


def labelled_copies(m: KripkeModel, A: Sequence[str], labels: str = LABELS_CYCLE3) -> KripkeModel:
    """Copies of each state, one per label, with A-steps moving to the next label."""
    A = set(A)
    # the five-label range has no consistent successor assignment; use the cycle
    cycle = list(LABEL_RANGES[labels if labels != "all" else LABELS_CYCLE3])
    pos = {lab: i for i, lab in enumerate(cycle)}
    n, k = m.size, len(cycle)
    edges = set()
    for s, a, t in m.transitions:
        for i, lab in enumerate(cycle):
            j = pos[next_label(lab)] if a in A else i
            edges.add((s * k + i, a, t * k + j))
    val = []
    for s in range(n):
        for lab in cycle:
            val.append(set(m.valuation[s]) | _LABEL_VALUES[lab])
    root = (m.designated or 0) * k
    return generated(KripkeModel.build(n * k, m.agents, edges, val, designated=root))


def label_of(vals: frozenset[str]) -> str | None:
    p, q = LABEL_P in vals, LABEL_Q in vals
    if p and q:
        return "p&q"
    if p:
        return "p&!q"
    if q:
        return "!p&q"
    return None


def follow_labels(m: KripkeModel, A: Sequence[str]) -> KripkeModel:
    """Keep only A-steps that move to the next label of the three-cycle."""
    A = set(A)
    edges = set()
    for s, a, t in m.transitions:
        if a not in A:
            edges.add((s, a, t))
            continue
        ls, lt = label_of(m.valuation[s]), label_of(m.valuation[t])
        if ls is not None and lt == next_label(ls):
            edges.add((s, a, t))
    out = KripkeModel(m.states, m.agents, frozenset(edges), m.valuation, m.designated)
    return generated(out)


def strip_props(m: KripkeModel, names: set[str]) -> KripkeModel:
    return KripkeModel(m.states, m.agents, m.transitions,
                       tuple(v - names for v in m.valuation), m.designated)


@dataclass
class TranslationPlan:
    """A translation with its logics and the model maps used to cross-check it."""

    name: str
    A: tuple[str, ...]
    source: LogicSpec
    target: LogicSpec
    translate: Callable[[Formula], Formula]
    forward: ModelMap | None = None
    backward: ModelMap | None = None
    forward_bound: Callable[[int], int | None] = field(default=lambda n: None)
    backward_bound: Callable[[int], int | None] = field(default=lambda n: None)

    def cross_check(self, corpus, budget_source: SearchBudget, budget_target: SearchBudget) -> CrossCheckReport:
        return cross_check_translation(
            self.name, self.source, self.target, corpus, budget_source, budget_target,
            self.translate, self.forward, self.backward, self.forward_bound, self.backward_bound,
        )


def plan(name: str, A: Sequence[str], target: LogicSpec, condition: FrameCondition | str | None = None,
         **options) -> TranslationPlan:
    """Build the plan for translating into ``target``; the source logic is derived.

    For every translation but ``embed`` the source adds the translation's
    condition to the agents in A; for ``embed`` the source is K for every
    agent.
    """
    A = tuple(dict.fromkeys(A))
    agents = target.agents
    added = {
        "serial": FrameCondition.D,
        "reflexive": FrameCondition.T,
        "transitive": FrameCondition.FOUR,
        "symmetric": FrameCondition.B,
    }
    if name == "one-step":
        if condition is None:
            raise ValueError("the one-step translation needs a frame condition")
        cond = FrameCondition(condition)
    elif name in added:
        cond = added[name]
    elif name == "embed":
        cond = None
    else:
        raise ValueError(f"unknown translation {name!r}")
    if cond is not None:
        source = LogicSpec(tuple((a, target[a] | {cond} if a in A else target[a]) for a in agents))
    else:
        source = LogicSpec(tuple((a, frozenset()) for a in agents))
    fn = lambda f: translate(name, f, A, agents, cond, **options)
    same = lambda n: n
    p = TranslationPlan(name, A, source, target, fn)
    if name in ("one-step", "serial", "reflexive", "transitive"):
        # A model of the source logic already satisfies the translation.
        p.forward = lambda m: m
        p.forward_bound = same
    if name == "one-step":
        p.backward = lambda m: close_agents(generated(m), A, [cond])
    elif name == "serial":
        p.backward = generated
        p.backward_bound = same
    elif name in ("reflexive", "transitive"):
        p.backward = lambda m: close_for_logic(generated(m), source)
        p.backward_bound = same
    elif name == "symmetric":
        p.forward = lambda m: close_for_logic(unravel_symmetric(m, A), target)
        p.backward = lambda m: close_for_logic(
            strip_props(close_agents(generated(m), A, [FrameCondition.B]), {SYMMETRY_MARK}), source)
    elif name == "embed":
        labels = options.get("labels", LABELS_CYCLE3)
        p.forward = lambda m: close_for_logic(labelled_copies(m, A, labels), target)
        p.forward_bound = lambda n: 3 * n
        p.backward = lambda m: strip_props(follow_labels(m, A), {LABEL_P, LABEL_Q})
        p.backward_bound = same
    return p
