"""Finite Kripke models, frame conditions, frame closures and model checking.

The model checker is a direct transcription of the set semantics: least
and greatest fixed points are computed by Knaster-Tarski iteration from
the empty set and from the full state set respectively.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .formula import (
    And,
    Bottom,
    Box,
    Diamond,
    Formula,
    Lit,
    Mu,
    Nu,
    Or,
    Top,
    Var,
    free_vars,
)
from .logic import CLOSURE_ORDER, FrameCondition, LogicSpec

Relation = frozenset[tuple[int, int]]
Environment = Mapping[str, frozenset[int]]


@dataclass(frozen=True)
class KripkeModel:
    """States are referred to by index; ``states`` holds display names."""

    states: tuple[str, ...]
    agents: tuple[str, ...]
    transitions: frozenset[tuple[int, str, int]] = frozenset()
    valuation: tuple[frozenset[str], ...] = ()
    designated: int | None = None

    def __post_init__(self):
        n = len(self.states)
        if n == 0:
            raise ValueError("a model needs at least one state")
        if len(set(self.states)) != n:
            raise ValueError("duplicate state names")
        if len(set(self.agents)) != len(self.agents):
            raise ValueError("duplicate agent names")
        if not self.valuation:
            object.__setattr__(self, "valuation", tuple(frozenset() for _ in range(n)))
        if len(self.valuation) != n:
            raise ValueError("valuation must list every state")
        object.__setattr__(self, "valuation", tuple(frozenset(v) for v in self.valuation))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        agents = set(self.agents)
        for s, a, t in self.transitions:
            if not (0 <= s < n and 0 <= t < n):
                raise ValueError(f"transition ({s}, {a}, {t}) has an invalid endpoint")
            if a not in agents:
                raise ValueError(f"transition uses unknown agent {a!r}")
        if self.designated is not None and not 0 <= self.designated < n:
            raise ValueError("designated state out of range")

    @classmethod
    def build(cls, n: int, agents: Sequence[str], edges: Iterable[tuple[int, str, int]] = (),
              valuation: Mapping[int, Iterable[str]] | Sequence[Iterable[str]] | None = None,
              designated: int | None = 0) -> "KripkeModel":
        """Convenience constructor with states named ``s0 .. s{n-1}``."""
        if valuation is None:
            val = tuple(frozenset() for _ in range(n))
        elif isinstance(valuation, Mapping):
            val = tuple(frozenset(valuation.get(i, ())) for i in range(n))
        else:
            val = tuple(frozenset(v) for v in valuation)
        return cls(tuple(f"s{i}" for i in range(n)), tuple(agents), frozenset(edges), val, designated)

    @property
    def size(self) -> int:
        return len(self.states)

    @cached_property
    def _succ(self) -> dict[str, tuple[frozenset[int], ...]]:
        out = {a: [set() for _ in self.states] for a in self.agents}
        for s, a, t in self.transitions:
            out[a][s].add(t)
        return {a: tuple(frozenset(x) for x in rows) for a, rows in out.items()}

    def successors(self, agent: str, s: int) -> frozenset[int]:
        return self._succ[agent][s]

    def relation(self, agent: str) -> Relation:
        return frozenset((s, t) for s, a, t in self.transitions if a == agent)

    def with_relation(self, agent: str, rel: Iterable[tuple[int, int]]) -> "KripkeModel":
        others = {(s, a, t) for s, a, t in self.transitions if a != agent}
        mine = {(s, agent, t) for s, t in rel}
        return KripkeModel(self.states, self.agents, frozenset(others | mine), self.valuation, self.designated)

    def index(self, state: int | str) -> int:
        if isinstance(state, int):
            if not 0 <= state < self.size:
                raise ValueError(f"state index {state} out of range")
            return state
        try:
            return self.states.index(state)
        except ValueError:
            raise ValueError(f"unknown state {state!r}") from None

    def all_states(self) -> frozenset[int]:
        return frozenset(range(self.size))

    def reachable(self, start: int, agents: Iterable[str] | None = None) -> frozenset[int]:
        """States reachable from ``start`` in zero or more steps."""
        agents = tuple(self.agents if agents is None else agents)
        seen = {start}
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for a in agents:
                for t in self.successors(a, s):
                    if t not in seen:
                        seen.add(t)
                        queue.append(t)
        return frozenset(seen)

    def restrict(self, keep: Iterable[int]) -> "KripkeModel":
        """Submodel on ``keep`` (renumbered in increasing order)."""
        keep = sorted(set(keep))
        index = {old: new for new, old in enumerate(keep)}
        edges = {(index[s], a, index[t]) for s, a, t in self.transitions if s in index and t in index}
        designated = index.get(self.designated) if self.designated is not None else None
        return KripkeModel(tuple(self.states[i] for i in keep), self.agents, frozenset(edges),
                           tuple(self.valuation[i] for i in keep), designated)

    # -- JSON ---------------------------------------------------------------

    def to_json(self) -> dict:
        out = {
            "states": list(self.states),
            "agents": list(self.agents),
            "transitions": [[self.states[s], a, self.states[t]]
                            for s, a, t in sorted(self.transitions, key=lambda e: (e[0], e[1], e[2]))],
            "valuation": {self.states[i]: sorted(v) for i, v in enumerate(self.valuation)},
        }
        if self.designated is not None:
            out["designated"] = self.states[self.designated]
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "KripkeModel":
        allowed = {"states", "agents", "transitions", "valuation", "designated"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown model keys: {sorted(unknown)}")
        for key in ("states", "agents"):
            if key not in data:
                raise ValueError(f"model is missing {key!r}")
        states = tuple(str(s) for s in data["states"])
        index = {s: i for i, s in enumerate(states)}

        def idx(name):
            if name not in index:
                raise ValueError(f"unknown state {name!r}")
            return index[name]

        edges = set()
        for item in data.get("transitions", []):
            if len(item) != 3:
                raise ValueError(f"transition {item!r} is not a triple")
            s, a, t = item
            edges.add((idx(s), str(a), idx(t)))
        val = [set() for _ in states]
        for s, ps in data.get("valuation", {}).items():
            val[idx(s)] = set(ps)
        designated = data.get("designated")
        return cls(states, tuple(data["agents"]), frozenset(edges), tuple(frozenset(v) for v in val),
                   idx(designated) if designated is not None else None)

    @classmethod
    def load(cls, path: str | Path) -> "KripkeModel":
        return cls.from_json(json.loads(Path(path).read_text()))

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


# ---------------------------------------------------------------- frames

def is_serial(rel: Relation, n: int) -> bool:
    heads = {s for s, _ in rel}
    return all(s in heads for s in range(n))


def is_reflexive(rel: Relation, n: int) -> bool:
    return all((s, s) in rel for s in range(n))


def is_symmetric(rel: Relation, n: int = 0) -> bool:
    return all((t, s) in rel for s, t in rel)


def is_transitive(rel: Relation, n: int = 0) -> bool:
    succ = _succ_map(rel)
    return all(succ.get(t, set()) <= succ[s] for s, t in rel)


def is_euclidean(rel: Relation, n: int = 0) -> bool:
    succ = _succ_map(rel)
    return all(succ[s] <= succ.get(t, set()) for s, t in rel)


def _succ_map(rel: Iterable[tuple[int, int]]) -> dict[int, set[int]]:
    succ: dict[int, set[int]] = {}
    for s, t in rel:
        succ.setdefault(s, set()).add(t)
    return succ


_CHECKS = {
    FrameCondition.D: is_serial,
    FrameCondition.T: is_reflexive,
    FrameCondition.B: is_symmetric,
    FrameCondition.FOUR: is_transitive,
    FrameCondition.FIVE: is_euclidean,
}


def relation_has(rel: Iterable[tuple[int, int]], n: int, cond: FrameCondition) -> bool:
    return _CHECKS[FrameCondition(cond)](frozenset(rel), n)


def check_frame_condition(m: KripkeModel, agent: str, cond: FrameCondition) -> bool:
    return relation_has(m.relation(agent), m.size, cond)


def check_logic(m: KripkeModel, spec: LogicSpec) -> bool:
    for agent, conds in spec.items():
        if agent not in m.agents:
            raise ValueError(f"model has no agent {agent!r}")
        if not all(check_frame_condition(m, agent, c) for c in conds):
            return False
    return True


def close_relation(rel: Iterable[tuple[int, int]], n: int, cond: FrameCondition) -> Relation:
    """Least superset of ``rel`` with the condition (D: self-loops at dead ends)."""
    rel = set(rel)
    cond = FrameCondition(cond)
    if cond is FrameCondition.D:
        heads = {s for s, _ in rel}
        rel |= {(s, s) for s in range(n) if s not in heads}
    elif cond is FrameCondition.T:
        rel |= {(s, s) for s in range(n)}
    elif cond is FrameCondition.B:
        rel |= {(t, s) for s, t in rel}
    elif cond is FrameCondition.FOUR:
        succ = _succ_map(rel)
        for k in range(n):
            into = [s for s in range(n) if k in succ.get(s, ())]
            for s in into:
                succ[s] |= succ.get(k, set())
        rel = {(s, t) for s, ts in succ.items() for t in ts}
    else:
        # Saturate: s->t and s->r force t->r.
        changed = True
        while changed:
            changed = False
            succ = _succ_map(rel)
            for ts in succ.values():
                for t in ts:
                    for r in ts:
                        if (t, r) not in rel:
                            rel.add((t, r))
                            changed = True
    return frozenset(rel)


def close_frame(m: KripkeModel, agent: str, cond: FrameCondition) -> KripkeModel:
    return m.with_relation(agent, close_relation(m.relation(agent), m.size, cond))


def close_relation_all(rel: Iterable[tuple[int, int]], n: int, conds: Iterable[FrameCondition]) -> Relation:
    """Close under several conditions at once, in D, T, B, 4, 5 order.

    One pass is not always enough: a transitive relation can lose
    transitivity under euclidean closure, e.g. ``{(0,0),(0,1),(2,1)}``.
    The passes repeat until nothing changes.
    """
    order = [c for c in CLOSURE_ORDER if c in set(conds)]
    rel = frozenset(rel)
    while True:
        nxt = rel
        for cond in order:
            nxt = close_relation(nxt, n, cond)
        if nxt == rel:
            return rel
        rel = nxt


def close_for_logic(m: KripkeModel, spec: LogicSpec) -> KripkeModel:
    """Close every agent's relation under all of its conditions."""
    for agent, conds in spec.items():
        if conds:
            m = m.with_relation(agent, close_relation_all(m.relation(agent), m.size, conds))
    return m


def _pairs(text: str) -> frozenset[tuple[FrameCondition, FrameCondition]]:
    return frozenset((FrameCondition(p[0]), FrameCondition(p[1])) for p in text.split())


#: ``(x, y)`` is listed when every frame with x keeps x after closure under y.
PRESERVED_UNDER_CLOSURE = _pairs("T4 T5 TB TD DT DB D4 D5 4D 45 4T BT BD B4 B5 54 5D")
#: The remaining ordered pairs of distinct conditions.
NOT_PRESERVED_UNDER_CLOSURE = _pairs("4B 5T 5B")


def closure_breaks(rel: Iterable[tuple[int, int]], n: int, x: FrameCondition, y: FrameCondition) -> bool:
    """True when ``rel`` has x but its closure under y does not."""
    rel = frozenset(rel)
    return relation_has(rel, n, x) and not relation_has(close_relation(rel, n, y), n, x)


def non_preservation_witnesses(x: FrameCondition, y: FrameCondition, max_states: int = 3) -> list[Relation]:
    """Smallest relations (fewest states, then fewest edges) that lose x under y-closure."""
    from itertools import combinations, product

    for n in range(1, max_states + 1):
        cells = list(product(range(n), repeat=2))
        for k in range(len(cells) + 1):
            found = [frozenset(c) for c in combinations(cells, k) if closure_breaks(c, n, x, y)]
            if found:
                return found
    return []


# ------------------------------------------------------------- semantics

def eval_set(m: KripkeModel, f: Formula, env: Environment | None = None) -> frozenset[int]:
    """The set of states of ``m`` where ``f`` holds under ``env``."""
    env = dict(env or {})
    missing = free_vars(f) - set(env)
    if missing:
        raise ValueError(f"environment does not bind {sorted(missing)}")
    return _Evaluator(m).eval(f, env)


class _Evaluator:
    def __init__(self, m: KripkeModel):
        self.m = m
        self.full = m.all_states()
        self.cache: dict[Formula, frozenset[int]] = {}

    def eval(self, f: Formula, env: dict[str, frozenset[int]]) -> frozenset[int]:
        closed = not free_vars(f)
        if closed and f in self.cache:
            return self.cache[f]
        out = self._eval(f, env)
        if closed:
            self.cache[f] = out
        return out

    def _eval(self, f: Formula, env: dict[str, frozenset[int]]) -> frozenset[int]:
        m = self.m
        match f:
            case Top():
                return self.full
            case Bottom():
                return frozenset()
            case Lit(name, positive):
                yes = frozenset(i for i in range(m.size) if name in m.valuation[i])
                return yes if positive else self.full - yes
            case Var(x):
                return env[x]
            case And(l, r):
                return self.eval(l, env) & self.eval(r, env)
            case Or(l, r):
                return self.eval(l, env) | self.eval(r, env)
            case Box(a, b):
                inner = self.eval(b, env)
                succ = m._succ.get(a)
                if succ is None:
                    return self.full
                return frozenset(s for s in range(m.size) if succ[s] <= inner)
            case Diamond(a, b):
                inner = self.eval(b, env)
                succ = m._succ.get(a)
                if succ is None:
                    return frozenset()
                return frozenset(s for s in range(m.size) if succ[s] & inner)
            case Mu(x, b) | Nu(x, b):
                current = frozenset() if isinstance(f, Mu) else self.full
                while True:
                    env2 = dict(env)
                    env2[x] = current
                    nxt = self.eval(b, env2)
                    if nxt == current:
                        return current
                    current = nxt
        raise TypeError(f"not a formula: {f!r}")


def model_check(m: KripkeModel, state: int | str, f: Formula) -> bool:
    if free_vars(f):
        raise ValueError("model checking needs a closed formula")
    return m.index(state) in eval_set(m, f)
