"""Bounded satisfiability by exhaustive model enumeration.

Models are enumerated size by size.  For a fixed size ``n`` every frame of
the logic (one relation per agent) is paired with every valuation, and the
formula is evaluated on all of them at once: a state set is an ``n``-bit
integer and a batch of models is a numpy array of such integers.

Only frames in which every state is reachable from state 0 are generated.
Truth at a state depends only on the part of the model reachable from it,
and that part satisfies the same frame conditions, so the restriction does
not change which sizes admit a model.

Every witness is rebuilt as a :class:`~mumod.kripke.KripkeModel` and
re-checked with the set-based model checker before it is returned.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .formula import (
    FF,
    TT,
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
    agents_of,
    free_vars,
    has_mu,
    is_closed,
    is_recursion_free,
    normalize,
    props,
)
from .kripke import KripkeModel, check_logic, model_check
from .logic import FrameCondition, LogicSpec

MAX_STATES_REPRESENTABLE = 7  # n*n relation bits must fit in an int64
_CHUNK = 1 << 18


@dataclass(frozen=True)
class SearchBudget:
    max_states: int = 3
    max_props: int = 3
    enumeration_cap: int = 4_000_000

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")
        if self.enumeration_cap < 1:
            raise ValueError("enumeration_cap must be positive")


@dataclass(frozen=True)
class Witness:
    model: KripkeModel
    state: int = 0

    sat = True

    @property
    def size(self) -> int:
        return self.model.size

    def describe(self) -> str:
        return f"sat ({self.size} states)"


@dataclass(frozen=True)
class NoModelUpTo:
    bound: int

    sat = None

    def describe(self) -> str:
        return f"no model up to {self.bound} states"


@dataclass(frozen=True)
class BudgetExhausted:
    """Search stopped early; sizes up to ``completed`` had no model."""

    completed: int
    reason: str

    sat = None

    def describe(self) -> str:
        return f"budget exhausted after {self.completed} states ({self.reason})"


OracleResult = Witness | NoModelUpTo | BudgetExhausted


class _TooMany(Exception):
    pass


# ------------------------------------------------------------ frames

def _bit(n: int, s: int, t: int) -> int:
    return 1 << (s * n + t)


def _succ_rows(rel: np.ndarray, n: int) -> list[np.ndarray]:
    full = (1 << n) - 1
    return [(rel >> (s * n)) & full for s in range(n)]


@lru_cache(maxsize=None)
def agent_relations(n: int, conds: frozenset[FrameCondition], cap: int) -> np.ndarray:
    """All relations on ``n`` states with the conditions, as bitmasks.

    Bit ``s*n + t`` stands for the edge ``s -> t``.  Reflexivity and
    symmetry are built into the generators; the other conditions filter.
    """
    if n > MAX_STATES_REPRESENTABLE:
        raise _TooMany(f"{n} states exceed the bitmask representation")
    base = 0
    gens = []
    if FrameCondition.T in conds:
        base = sum(_bit(n, s, s) for s in range(n))
    else:
        gens += [_bit(n, s, s) for s in range(n)]
    if FrameCondition.B in conds:
        gens += [_bit(n, s, t) | _bit(n, t, s) for s in range(n) for t in range(s + 1, n)]
    else:
        gens += [_bit(n, s, t) for s in range(n) for t in range(n) if s != t]
    if len(gens) > 40 or (1 << len(gens)) > cap:
        raise _TooMany(f"{1 << len(gens)} candidate relations on {n} states")
    idx = np.arange(1 << len(gens), dtype=np.int64)
    rel = np.full(idx.shape, base, dtype=np.int64)
    for j, g in enumerate(gens):
        rel |= ((idx >> j) & 1) * np.int64(g)
    rows = _succ_rows(rel, n)
    keep = np.ones(rel.shape, dtype=bool)
    if FrameCondition.D in conds:
        for s in range(n):
            keep &= rows[s] != 0
    if FrameCondition.FOUR in conds:
        for s in range(n):
            for t in range(n):
                edge = ((rows[s] >> t) & 1) == 1
                keep &= ~edge | ((rows[t] & ~rows[s]) == 0)
    if FrameCondition.FIVE in conds:
        for s in range(n):
            for t in range(n):
                edge = ((rows[s] >> t) & 1) == 1
                keep &= ~edge | ((rows[s] & ~rows[t]) == 0)
    return rel[keep]


@lru_cache(maxsize=64)
def frames(n: int, spec: LogicSpec, cap: int) -> tuple[np.ndarray, ...]:
    """Aligned per-agent relation arrays of all generated frames of size n.

    Order is lexicographic in the agents' relation indices, first agent
    slowest.
    """
    per_agent = [agent_relations(n, spec[a], cap) for a in spec.agents]
    total = math.prod(len(r) for r in per_agent)
    if total > cap:
        raise _TooMany(f"{total} frames on {n} states")
    grids = np.meshgrid(*[np.arange(len(r)) for r in per_agent], indexing="ij")
    rels = [r[g.ravel()] for r, g in zip(per_agent, grids)]
    if n > 1 and rels:
        full = (1 << n) - 1
        rows = [_succ_rows(r, n) for r in rels]
        reach = np.ones(rels[0].shape, dtype=np.int64)
        for _ in range(n - 1):
            step = np.zeros_like(reach)
            for s in range(n):
                inside = ((reach >> s) & 1) == 1
                for agent_rows in rows:
                    step |= np.where(inside, agent_rows[s], 0)
            reach |= step
        keep = reach == full
        rels = [r[keep] for r in rels]
    return tuple(rels)


def _valuations(n: int, k: int) -> np.ndarray:
    return np.arange(1 << (n * k), dtype=np.int64)


# --------------------------------------------------------- evaluation

class BatchEvaluator:
    """Evaluates formulas on a batch of same-size models at once."""

    def __init__(self, n: int, succ: dict[str, list[np.ndarray]], val: dict[str, np.ndarray], size: int):
        self.n = n
        self.full = np.int64((1 << n) - 1)
        self.succ = succ
        self.val = val
        self.size = size
        self._cache: dict[Formula, np.ndarray] = {}

    def eval(self, f: Formula, env: dict[str, np.ndarray] | None = None) -> np.ndarray:
        return self._eval(f, env or {})

    def _eval(self, f: Formula, env: dict[str, np.ndarray]) -> np.ndarray:
        closed = not free_vars(f)
        if closed and f in self._cache:
            return self._cache[f]
        out = self._compute(f, env)
        if closed:
            self._cache[f] = out
        return out

    def _compute(self, f: Formula, env):
        match f:
            case Top():
                return np.full(self.size, self.full, dtype=np.int64)
            case Bottom():
                return np.zeros(self.size, dtype=np.int64)
            case Lit(name, positive):
                v = self.val.get(name)
                if v is None:
                    v = np.zeros(self.size, dtype=np.int64)
                return v if positive else self.full & ~v
            case Var(x):
                return env[x]
            case And(l, r):
                return self._eval(l, env) & self._eval(r, env)
            case Or(l, r):
                return self._eval(l, env) | self._eval(r, env)
            case Diamond(a, b):
                inner = self._eval(b, env)
                rows = self.succ.get(a)
                out = np.zeros(self.size, dtype=np.int64)
                if rows is None:
                    return out
                for s, row in enumerate(rows):
                    out |= ((row & inner) != 0).astype(np.int64) << s
                return out
            case Box(a, b):
                inner = self._eval(b, env)
                rows = self.succ.get(a)
                if rows is None:
                    return np.full(self.size, self.full, dtype=np.int64)
                out = np.zeros(self.size, dtype=np.int64)
                missing = self.full & ~inner
                for s, row in enumerate(rows):
                    out |= ((row & missing) == 0).astype(np.int64) << s
                return out
            case Mu(x, b) | Nu(x, b):
                cur = (np.zeros(self.size, dtype=np.int64) if isinstance(f, Mu)
                       else np.full(self.size, self.full, dtype=np.int64))
                for _ in range(self.n + 2):
                    nxt = self._eval(b, {**env, x: cur})
                    if np.array_equal(nxt, cur):
                        return cur
                    cur = nxt
                raise AssertionError("fixed-point iteration failed to converge")
        raise TypeError(f"not a formula: {f!r}")


def _model_from_index(n: int, agents: Sequence[str], rels: Sequence[int], prop_names: Sequence[str],
                      valuation: int) -> KripkeModel:
    edges = []
    for a, r in zip(agents, rels):
        for s in range(n):
            for t in range(n):
                if (int(r) >> (s * n + t)) & 1:
                    edges.append((s, a, t))
    val = []
    for s in range(n):
        val.append({p for i, p in enumerate(prop_names) if (int(valuation) >> (i * n + s)) & 1})
    return KripkeModel.build(n, agents, edges, val, designated=0)


def _check_input(f: Formula, spec: LogicSpec, budget: SearchBudget) -> None:
    if not is_closed(f):
        raise ValueError("the oracle decides closed formulas only")
    extra = agents_of(f) - set(spec.agents)
    if extra:
        raise ValueError(f"formula mentions agents {sorted(extra)} missing from the logic")
    if len(props(f)) > budget.max_props:
        raise ValueError(f"formula has {len(props(f))} propositions; budget allows {budget.max_props}")


def bounded_sat_many(formulas: Sequence[Formula], spec: LogicSpec, budget: SearchBudget = SearchBudget(),
                     prop_names: Sequence[str] | None = None) -> list[OracleResult]:
    """Decide many formulas up to the budget, sharing the enumerated models.

    Valuations range over ``prop_names`` (by default the union of the
    formulas' propositions, sorted).  The first witness in canonical order
    (size, then frame, then valuation) is returned for each formula.
    """
    for f in formulas:
        _check_input(f, spec, budget)
    if prop_names is None:
        prop_names = sorted(set().union(*(props(f) for f in formulas))) if formulas else []
    prop_names = list(prop_names)
    missing = set().union(*(props(f) for f in formulas)) - set(prop_names) if formulas else set()
    if missing:
        raise ValueError(f"propositions {sorted(missing)} missing from the valuation list")
    k = len(prop_names)
    results: list[OracleResult | None] = [None] * len(formulas)
    pending = list(range(len(formulas)))
    agents = spec.agents
    for n in range(1, budget.max_states + 1):
        if not pending:
            break
        try:
            if n * k > 40:
                raise _TooMany(f"{n * k} valuation bits")
            fr = frames(n, spec, budget.enumeration_cap)
            nf = len(fr[0]) if fr else 1
            nv = 1 << (n * k)
            if nf * nv > budget.enumeration_cap:
                raise _TooMany(f"{nf * nv} models on {n} states")
        except _TooMany as exc:
            for i in pending:
                results[i] = BudgetExhausted(n - 1, str(exc))
            pending = []
            break
        vals = _valuations(n, k)
        full = (1 << n) - 1
        val_masks = {p: (vals >> (i * n)) & full for i, p in enumerate(prop_names)}
        per_chunk = max(1, _CHUNK // nv)
        for start in range(0, nf, per_chunk):
            if not pending:
                break
            stop = min(nf, start + per_chunk)
            cf = stop - start
            succ = {}
            for a, rel in zip(agents, fr):
                rows = _succ_rows(rel[start:stop], n)
                succ[a] = [np.repeat(r, nv) for r in rows]
            val = {p: np.tile(m, cf) for p, m in val_masks.items()}
            ev = BatchEvaluator(n, succ, val, cf * nv)
            still = []
            for i in pending:
                hits = np.flatnonzero(ev.eval(formulas[i]) & 1)
                if hits.size:
                    j = int(hits[0])
                    fi, vi = start + j // nv, j % nv
                    model = _model_from_index(n, agents, [rel[fi] for rel in fr], prop_names, int(vals[vi]))
                    if not (model_check(model, 0, formulas[i]) and check_logic(model, spec)):
                        raise AssertionError(f"oracle witness for {formulas[i]} failed re-verification")
                    results[i] = Witness(model, 0)
                else:
                    still.append(i)
            pending = still
    for i in pending:
        results[i] = NoModelUpTo(budget.max_states)
    return results  # type: ignore[return-value]


def bounded_sat(f: Formula, spec: LogicSpec, budget: SearchBudget = SearchBudget()) -> OracleResult:
    """Search for a model of ``f`` in the logic's frame class, smallest first."""
    return bounded_sat_many([f], spec, budget)[0]


# -------------------------------------------------------------- corpus

def _var_name(depth: int) -> str:
    return "XYZWVU"[depth] if depth < 6 else f"X{depth}"


@lru_cache(maxsize=None)
def _enumerate(size: int, depth: int, props_: tuple[str, ...], agents: tuple[str, ...],
               allow_fix: bool) -> tuple[Formula, ...]:
    """All formulas of exactly ``size`` symbols using binders 0..depth-1."""
    out: list[Formula] = []
    if size == 1:
        out += [TT, FF]
        for p in props_:
            out += [Lit(p, True), Lit(p, False)]
        out += [Var(_var_name(i)) for i in range(depth)]
        return tuple(out)
    for ls in range(1, size - 1):
        rs = size - 1 - ls
        lefts = _enumerate(ls, depth, props_, agents, allow_fix)
        rights = _enumerate(rs, depth, props_, agents, allow_fix)
        for l in lefts:
            for r in rights:
                out.append(And(l, r))
                out.append(Or(l, r))
    for b in _enumerate(size - 1, depth, props_, agents, allow_fix):
        for a in agents:
            out.append(Box(a, b))
            out.append(Diamond(a, b))
    if allow_fix:
        x = _var_name(depth)
        for b in _enumerate(size - 1, depth + 1, props_, agents, allow_fix):
            out.append(Mu(x, b))
            out.append(Nu(x, b))
    return tuple(out)


def exhaustive_formulas(size_cap: int, agents: Sequence[str], props_: Sequence[str],
                        *, recursion: bool = True) -> list[Formula]:
    """Every closed NNF formula with at most ``size_cap`` symbols, normalised and deduplicated."""
    seen: dict[Formula, None] = {}
    for size in range(1, size_cap + 1):
        for f in _enumerate(size, 0, tuple(props_), tuple(agents), recursion):
            if is_closed(f):
                seen.setdefault(normalize(f), None)
    return list(seen)


def random_formula(rng: random.Random, size: int, agents: Sequence[str], props_: Sequence[str],
                   *, recursion: bool = True, mu: bool = True, _depth: int = 0,
                   _scope: tuple[str, ...] = ()) -> Formula:
    """A random closed formula of roughly ``size`` symbols."""
    if size <= 1:
        choices: list[Formula] = [TT, FF] + [Lit(p, b) for p in props_ for b in (True, False)]
        choices += [Lit(p, b) for p in props_ for b in (True, False)]
        choices += [Var(x) for x in _scope] * 2
        return rng.choice(choices)
    kinds = ["and", "or", "box", "dia"]
    if recursion and size >= 3:
        kinds += ["nu", "mu"] if mu else ["nu"]
    kind = rng.choice(kinds)
    kw = dict(recursion=recursion, mu=mu)
    if kind in ("and", "or"):
        ls = rng.randint(1, size - 2) if size > 2 else 1
        l = random_formula(rng, ls, agents, props_, _depth=_depth, _scope=_scope, **kw)
        r = random_formula(rng, max(1, size - 1 - ls), agents, props_, _depth=_depth, _scope=_scope, **kw)
        return And(l, r) if kind == "and" else Or(l, r)
    if kind in ("box", "dia"):
        body = random_formula(rng, size - 1, agents, props_, _depth=_depth, _scope=_scope, **kw)
        a = rng.choice(list(agents))
        return Box(a, body) if kind == "box" else Diamond(a, body)
    x = _var_name(_depth)
    body = random_formula(rng, size - 1, agents, props_, _depth=_depth + 1, _scope=_scope + (x,), **kw)
    return Mu(x, body) if kind == "mu" else Nu(x, body)


def generate_corpus(size_cap: int, agents: Sequence[str], props_: Sequence[str], seed: int = 0,
                    count: int = 0, *, exhaustive: bool = True, mu_free: bool = False,
                    recursion_free: bool = False, random_size: int | None = None) -> list[Formula]:
    """Exhaustive formulas up to ``size_cap`` symbols plus ``count`` seeded random ones.

    ``mu_free`` drops formulas with a least fixed point; ``recursion_free``
    drops every formula with a binder.  The result is deduplicated and its
    order depends only on the arguments.
    """
    out: dict[Formula, None] = {}
    if exhaustive:
        for f in exhaustive_formulas(size_cap, agents, props_, recursion=not recursion_free):
            out.setdefault(f, None)
    rng = random.Random(seed)
    target = random_size or size_cap
    made = 0
    attempts = 0
    while made < count and attempts < 50 * count + 100:
        attempts += 1
        size = rng.randint(1, target)
        f = normalize(random_formula(rng, size, agents, props_, recursion=not recursion_free, mu=not mu_free))
        if f not in out:
            out.setdefault(f, None)
            made += 1
    corpus = list(out)
    if mu_free:
        corpus = [f for f in corpus if not has_mu(f)]
    if recursion_free:
        corpus = [f for f in corpus if is_recursion_free(f)]
    return corpus


def sample_corpus(corpus: Sequence[Formula], k: int, seed: int = 0) -> list[Formula]:
    """A deterministic sample of ``k`` formulas, kept in corpus order."""
    if k >= len(corpus):
        return list(corpus)
    picks = sorted(random.Random(seed).sample(range(len(corpus)), k))
    return [corpus[i] for i in picks]


# ------------------------------------------------------ cross-checking

@dataclass(frozen=True)
class CrossCheckRecord:
    formula: str
    translated: str
    source_verdict: str
    target_verdict: str
    classification: str
    note: str
    timings: dict

    def to_json(self) -> str:
        return json.dumps({
            "formula": self.formula,
            "translated": self.translated,
            "source_verdict": self.source_verdict,
            "target_verdict": self.target_verdict,
            "classification": self.classification,
            "note": self.note,
            "timings": self.timings,
        })


@dataclass
class CrossCheckReport:
    name: str
    records: list[CrossCheckRecord] = field(default_factory=list)

    def count(self, classification: str) -> int:
        return sum(r.classification == classification for r in self.records)

    def summary(self) -> dict[str, int]:
        return {c: self.count(c) for c in ("agree", "disagree", "inconclusive")}

    def to_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)


def _conclusive_bound(r: OracleResult) -> int:
    if isinstance(r, NoModelUpTo):
        return r.bound
    if isinstance(r, BudgetExhausted):
        return r.completed
    return -1


def classify(source: OracleResult, target: OracleResult,
             forward_bound: int | None, backward_bound: int | None,
             forward_model: KripkeModel | None = None,
             backward_model: KripkeModel | None = None) -> tuple[str, str]:
    """Compare two oracle verdicts for a satisfiability-preserving translation.

    ``forward_bound`` is the size of target model the translation's proof
    guarantees from the source witness (``None`` if no bound is known), and
    ``backward_bound`` likewise in the other direction.  ``*_model`` are
    explicitly transferred, already verified witnesses.
    """
    if isinstance(source, Witness) and isinstance(target, Witness):
        return "agree", "both satisfiable"
    if isinstance(source, Witness) or isinstance(target, Witness):
        forward = isinstance(source, Witness)
        other = target if forward else source
        bound = forward_bound if forward else backward_bound
        moved = forward_model if forward else backward_model
        reach = _conclusive_bound(other)
        if moved is not None and moved.size <= reach:
            return "disagree", f"transferred witness with {moved.size} states missed by a search up to {reach}"
        if bound is not None and bound <= reach:
            return "disagree", f"guaranteed model of at most {bound} states not found up to {reach}"
        if moved is not None:
            return "agree", f"satisfiable via a verified transferred witness ({moved.size} states)"
        return "inconclusive", "a model on the other side may exceed the searched size"
    if isinstance(source, NoModelUpTo) and isinstance(target, NoModelUpTo):
        return "agree", "no model on either side within bounds"
    return "inconclusive", "search budget exhausted"


def cross_check_translation(name: str, source: LogicSpec, target: LogicSpec, corpus: Iterable[Formula],
                            budget_source: SearchBudget, budget_target: SearchBudget,
                            translate: Callable[[Formula], Formula],
                            forward: Callable[[KripkeModel], KripkeModel | None] | None = None,
                            backward: Callable[[KripkeModel], KripkeModel | None] | None = None,
                            forward_bound: Callable[[int], int | None] = lambda n: None,
                            backward_bound: Callable[[int], int | None] = lambda n: None) -> CrossCheckReport:
    """Run the oracle on each formula and its translation and classify the pair.

    ``forward``/``backward`` map a witness on one side to a candidate model
    for the other side; candidates are model checked and only verified
    ones are used.  See :func:`classify` for the classification rules.
    """
    corpus = list(corpus)
    translated = [translate(f) for f in corpus]
    t0 = time.perf_counter()
    src_results = bounded_sat_many(corpus, source, budget_source)
    t_src = (time.perf_counter() - t0) / max(1, len(corpus))
    t0 = time.perf_counter()
    tgt_results = bounded_sat_many(translated, target, budget_target)
    t_tgt = (time.perf_counter() - t0) / max(1, len(corpus))
    report = CrossCheckReport(name)
    for f, g, rs, rt in zip(corpus, translated, src_results, tgt_results):
        fm = bm = None
        if isinstance(rs, Witness) and forward is not None:
            cand = forward(rs.model)
            if cand is not None and model_check(cand, cand.designated or 0, g) and check_logic(cand, target):
                fm = cand
        if isinstance(rt, Witness) and backward is not None:
            cand = backward(rt.model)
            if cand is not None and model_check(cand, cand.designated or 0, f) and check_logic(cand, source):
                bm = cand
        fb = forward_bound(rs.size) if isinstance(rs, Witness) else None
        bb = backward_bound(rt.size) if isinstance(rt, Witness) else None
        cls, note = classify(rs, rt, fb, bb, fm, bm)
        tv = rt.describe()
        if fm is not None and not isinstance(rt, Witness):
            tv += f"; transferred witness with {fm.size} states"
        sv = rs.describe()
        if bm is not None and not isinstance(rs, Witness):
            sv += f"; transferred witness with {bm.size} states"
        report.records.append(CrossCheckRecord(
            str(f), str(g), sv, tv, cls, note,
            {"source_s": round(t_src, 6), "target_s": round(t_tgt, 6)},
        ))
    return report
