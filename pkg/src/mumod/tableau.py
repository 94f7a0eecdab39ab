"""Prefixed tableaux for multi-agent modal logics with fixed points.

A prefix names a prospective state: the empty prefix is the root and
``sigma.<a,phi>`` is the ``a``-successor created to satisfy ``<a>phi``.
Prefixes are interned in a table shared by all branches of one run; a
branch records which prefixes it uses, the formulas at each of them, the
rule instances applied so far and the trace edges between prefixed
formulas.

A branch closes propositionally (``ff``, or ``p`` and ``!p`` at one
prefix) or on a fixed point: for a least-fixed-point variable ``X``, the
trace graph restricted to edges that do not leave an occurrence of an
outer variable ``Y > X`` contains a cycle through an occurrence of ``X``,
or a path visiting ``X`` more than ``kappa`` times.  The second test is
only as good as ``kappa`` and is flagged on the verdict.

An open branch is turned into a model (prefixes as states, closures of the
logic applied) which is model checked before ``Sat`` is reported.  Prefixes
whose formula set repeats an ancestor's are blocked and folded onto the
ancestor; if the folded model fails the check, blocking is lifted and the
branch grows further.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .formula import (
    And,
    Bottom,
    Box,
    Diamond,
    Fix,
    Formula,
    Lit,
    Modal,
    Or,
    Var,
    agents_of,
    binding_table,
    is_closed,
    negate,
    size,
)
from .kripke import KripkeModel, check_logic, close_for_logic, model_check
from .logic import FrameCondition, LogicSpec

D, T, B, FOUR, FIVE = (FrameCondition.D, FrameCondition.T, FrameCondition.B,
                       FrameCondition.FOUR, FrameCondition.FIVE)

Node = tuple[int, Formula]

GENERATING_RULES = ("D", "d", "D5", "D55")
NON_GENERATING_MODAL_RULES = ("t", "b", "b4", "B", "4", "B5", "B55")


class TableauError(ValueError):
    pass


@dataclass(frozen=True)
class TableauBounds:
    """Desk-scale stand-ins for the termination bound.

    ``None`` picks the default for the formula: ``kappa = max(8, |f|)`` and
    ``prefix_cap = max(16, 2|f|)``.
    """

    kappa: int | None = None
    prefix_cap: int | None = None
    node_cap: int = 20_000
    branch_cap: int = 10_000

    def __post_init__(self):
        for name in ("kappa", "prefix_cap", "node_cap", "branch_cap"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise TableauError(f"{name} must be positive")

    def resolve(self, f: Formula) -> "TableauBounds":
        n = size(f)
        return TableauBounds(
            kappa=self.kappa if self.kappa is not None else max(8, n),
            prefix_cap=self.prefix_cap if self.prefix_cap is not None else max(16, 2 * n),
            node_cap=self.node_cap,
            branch_cap=self.branch_cap,
        )


# ------------------------------------------------------------- prefixes

class PrefixTable:
    """Interned prefixes; id 0 is the empty prefix."""

    def __init__(self):
        self.parent: list[int | None] = [None]
        self.step: list[tuple[str, Formula] | None] = [None]
        self.depth: list[int] = [0]
        self._ids: dict[tuple[int, str, Formula], int] = {}

    def child(self, pid: int, agent: str, f: Formula) -> int:
        key = (pid, agent, f)
        cid = self._ids.get(key)
        if cid is None:
            cid = len(self.parent)
            self._ids[key] = cid
            self.parent.append(pid)
            self.step.append((agent, f))
            self.depth.append(self.depth[pid] + 1)
        return cid

    def lookup(self, pid: int, agent: str, f: Formula) -> int | None:
        return self._ids.get((pid, agent, f))

    def last_agent(self, pid: int) -> str | None:
        step = self.step[pid]
        return step[0] if step else None

    def steps(self, pid: int) -> list[tuple[str, Formula]]:
        out = []
        while pid:
            out.append(self.step[pid])
            pid = self.parent[pid]
        return out[::-1]

    def ancestors(self, pid: int) -> Iterator[int]:
        p = self.parent[pid]
        while p is not None:
            yield p
            p = self.parent[p]

    def render(self, pid: int) -> str:
        if pid == 0:
            return "ε"
        return ".".join(f"{a}<{f}>" for a, f in self.steps(pid))

    def from_steps(self, steps: Sequence[tuple[str, Formula]]) -> int:
        pid = 0
        for a, f in steps:
            pid = self.child(pid, a, f)
        return pid


# --------------------------------------------------------------- branch

@dataclass(frozen=True)
class RuleInstance:
    rule: str
    prefix: int
    formula: Formula
    target: int | None
    conclusion: Formula


@dataclass
class Branch:
    """One tableau branch.  Copied on every split."""

    phi: dict[int, dict[Formula, None]] = field(default_factory=dict)
    prefixes: list[int] = field(default_factory=list)
    kids: dict[tuple[int, str], list[int]] = field(default_factory=dict)
    boxes: dict[int, list[Formula]] = field(default_factory=dict)
    queue: deque = field(default_factory=deque)
    ors: deque = field(default_factory=deque)
    modal: deque = field(default_factory=deque)
    gens: list[tuple[int, Formula]] = field(default_factory=list)
    applied: set = field(default_factory=set)
    edges: dict[Node, dict[Node, None]] = field(default_factory=dict)
    dist: dict[str, dict[Node, int]] = field(default_factory=dict)
    pred: dict[str, dict[Node, Node]] = field(default_factory=dict)
    blocked: dict[int, int] = field(default_factory=dict)
    never_block: set = field(default_factory=set)
    steps: list[tuple] = field(default_factory=list)
    closure: dict | None = None
    capped: bool = False
    nodes: int = 0
    choices: list[int] = field(default_factory=list)
    ctx: "_Engine | None" = None

    def copy(self) -> "Branch":
        return Branch(
            phi={k: dict(v) for k, v in self.phi.items()},
            prefixes=list(self.prefixes),
            kids={k: list(v) for k, v in self.kids.items()},
            boxes={k: list(v) for k, v in self.boxes.items()},
            queue=deque(self.queue),
            ors=deque(self.ors),
            modal=deque(self.modal),
            gens=list(self.gens),
            applied=set(self.applied),
            edges={k: dict(v) for k, v in self.edges.items()},
            dist={k: dict(v) for k, v in self.dist.items()},
            pred={k: dict(v) for k, v in self.pred.items()},
            blocked=dict(self.blocked),
            never_block=set(self.never_block),
            steps=list(self.steps),
            closure=self.closure,
            capped=self.capped,
            nodes=self.nodes,
            choices=list(self.choices),
            ctx=self.ctx,
        )

    @property
    def is_closed(self) -> bool:
        return self.closure is not None

    def formulas_at(self, pid: int) -> frozenset[Formula]:
        return frozenset(self.phi.get(pid, ()))

    def has(self, pid: int, f: Formula) -> bool:
        return f in self.phi.get(pid, ())

    def children(self, pid: int, agent: str) -> list[int]:
        return self.kids.get((pid, agent), [])

    def has_children(self, pid: int) -> bool:
        assert self.ctx is not None
        return any(self.kids.get((pid, a)) for a in self.ctx.spec.agents)

    def prefixed_formulas(self) -> Iterator[tuple[str, Formula]]:
        assert self.ctx is not None
        for pid in self.prefixes:
            for f in self.phi[pid]:
                yield self.ctx.table.render(pid), f

    def transcript(self) -> list[str]:
        """``sigma |- phi  [rule]`` lines for every formula the branch gained."""
        assert self.ctx is not None
        render = self.ctx.table.render
        lines = []
        for rule, premise, concl, new in self.steps:
            if new:
                lines.append(f"{render(concl[0])} ⊢ {concl[1]}  [{rule}]")
        if self.closure is not None:
            lines.append(f"closed: {describe_closure(self.closure, render)}")
        else:
            lines.append("open")
        return lines


def describe_closure(closure: dict, render=lambda pid: str(pid)) -> str:
    if closure["kind"] == "propositional":
        return f"{closure['formula']} and its complement at {render(closure['prefix'])}" \
            if closure.get("formula") != "ff" else f"ff at {render(closure['prefix'])}"
    how = "cycle" if closure["cycle"] else f"path with more than {closure['kappa']} occurrences"
    return f"least fixed point {closure['variable']} regenerates ({how})"


# --------------------------------------------------------------- verdicts

@dataclass(frozen=True)
class Sat:
    model: KripkeModel
    transcript: tuple[str, ...]

    status = "sat"


@dataclass(frozen=True)
class Unsat:
    proof: "Proof"

    status = "unsat"

    @property
    def depends_on_kappa(self) -> bool:
        return self.proof.depends_on_kappa

    @property
    def transcript(self) -> tuple[str, ...]:
        return self.proof.transcript()


@dataclass(frozen=True)
class Unknown:
    reason: str
    transcript: tuple[str, ...] = ()

    status = "unknown"


Verdict = Sat | Unsat | Unknown


@dataclass(frozen=True)
class ClosedBranch:
    choices: tuple[int, ...]
    steps: tuple[tuple, ...]
    closure: dict


@dataclass(frozen=True)
class Proof:
    """A closed tableau: every branch with its rule applications and closure evidence."""

    formula: Formula
    spec: LogicSpec
    kappa: int
    branches: tuple[ClosedBranch, ...]
    table: PrefixTable = field(compare=False, repr=False)

    @property
    def depends_on_kappa(self) -> bool:
        return any(b.closure["kind"] == "fixpoint" and not b.closure["cycle"] for b in self.branches)

    def transcript(self) -> tuple[str, ...]:
        render = self.table.render
        lines = []
        for i, br in enumerate(self.branches):
            lines.append(f"branch {i + 1} (choices {list(br.choices)})")
            for rule, premise, concl, new in br.steps:
                if new:
                    lines.append(f"  {render(concl[0])} ⊢ {concl[1]}  [{rule}]")
            lines.append(f"  closed: {describe_closure(br.closure, render)}")
        return tuple(lines)

    def to_json(self) -> dict:
        pref = lambda pid: [[a, str(f)] for a, f in self.table.steps(pid)]
        node = lambda n: None if n is None else {"prefix": pref(n[0]), "formula": str(n[1])}
        branches = []
        for br in self.branches:
            closure = dict(br.closure)
            if "prefix" in closure:
                closure["prefix"] = pref(closure["prefix"])
            if "path" in closure:
                closure["path"] = [node(n) for n in closure["path"]]
            branches.append({
                "choices": list(br.choices),
                "steps": [{"rule": r, "premise": node(p), "conclusion": node(c), "new": new}
                          for r, p, c, new in br.steps],
                "closure": closure,
            })
        return {"formula": str(self.formula), "logic": self.spec.render(), "kappa": self.kappa,
                "branches": branches}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


# ------------------------------------------------------------------ engine

class _Engine:
    def __init__(self, f: Formula, spec: LogicSpec, bounds: TableauBounds):
        if not is_closed(f):
            raise TableauError("the tableau decides closed formulas only")
        extra = agents_of(f) - set(spec.agents)
        if extra:
            raise TableauError(f"formula mentions agents {sorted(extra)} missing from the logic")
        self.f = f
        self.spec = spec
        self.bounds = bounds.resolve(f)
        self.kappa = self.bounds.kappa
        self.bt = binding_table(f)
        self.table = PrefixTable()
        self.mu_vars = [x for x in self.bt.fx if self.bt.is_least(x)]
        self.var_node = {x: Var(x) for x in self.bt.fx}
        self._conds = {a: spec[a] for a in spec.agents}

    def has(self, agent: str, cond: FrameCondition) -> bool:
        return cond in self._conds[agent]

    def flat(self, pid: int, agent: str) -> bool:
        return pid != 0 and self.table.last_agent(pid) == agent and self.has(agent, FIVE)

    # -- building ----------------------------------------------------------

    def initial(self) -> Branch:
        b = Branch(ctx=self)
        b.dist = {x: {} for x in self.mu_vars}
        b.pred = {x: {} for x in self.mu_vars}
        self._enter(b, 0)
        self.add(b, 0, self.f, "root", None)
        return b

    def _enter(self, b: Branch, pid: int) -> None:
        if pid in b.phi:
            return
        b.phi[pid] = {}
        b.prefixes.append(pid)
        if pid == 0:
            return
        parent = self.table.parent[pid]
        agent = self.table.last_agent(pid)
        b.kids.setdefault((parent, agent), []).append(pid)
        node_box = [g for g in b.boxes.get(parent, ()) if g.agent == agent]
        for g in node_box:
            b.modal.append(("B", (parent, g), pid, g.body))
            if self.has(agent, FOUR):
                b.modal.append(("4", (parent, g), pid, g))
        if self.has(agent, FIVE):
            for s in b.kids[(parent, agent)]:
                if s != pid:
                    for g in b.boxes.get(s, ()):
                        if g.agent == agent:
                            b.modal.append(("B55", (s, g), pid, g))

    def add(self, b: Branch, pid: int, f: Formula, rule: str, premise: Node | None) -> None:
        concl = (pid, f)
        if premise is not None:
            self.edge(b, premise, concl)
            if b.closure is not None:
                b.steps.append((rule, premise, concl, f not in b.phi[pid]))
                return
        here = b.phi[pid]
        if f in here:
            b.steps.append((rule, premise, concl, False))
            return
        here[f] = None
        b.nodes += 1
        b.steps.append((rule, premise, concl, True))
        if isinstance(f, Bottom):
            b.closure = {"kind": "propositional", "prefix": pid, "formula": "ff"}
            return
        if isinstance(f, Lit) and negate(f) in here:
            b.closure = {"kind": "propositional", "prefix": pid, "formula": str(f)}
            return
        b.queue.append(concl)

    def edge(self, b: Branch, u: Node, v: Node) -> None:
        out = b.edges.setdefault(u, {})
        if v in out:
            return
        out[v] = None
        for x in self.mu_vars:
            if self._allowed(u, x):
                self._propagate(b, x, u, v)
                if b.closure is not None:
                    return

    def _allowed(self, u: Node, x: str) -> bool:
        g = u[1]
        return not (isinstance(g, Var) and self.bt.less(x, g.name))

    def _weight(self, n: Node, x: str) -> int:
        return 1 if n[1] is self.var_node[x] else 0

    def _propagate(self, b: Branch, x: str, u: Node, v: Node) -> None:
        dist, pred = b.dist[x], b.pred[x]
        stack = [(u, v)]
        while stack:
            a, c = stack.pop()
            new = dist.get(a, self._weight(a, x)) + self._weight(c, x)
            if new <= dist.get(c, self._weight(c, x)):
                continue
            dist[c] = new
            pred[c] = a
            if new > self.kappa:
                b.closure = self._fixpoint_closure(b, x, c)
                return
            if self._allowed(c, x):
                for nxt in b.edges.get(c, ()):
                    stack.append((c, nxt))

    def _fixpoint_closure(self, b: Branch, x: str, end: Node) -> dict:
        cycle = self._find_cycle(b, x)
        if cycle is not None:
            return {"kind": "fixpoint", "variable": x, "cycle": True, "kappa": self.kappa, "path": cycle}
        path = [end]
        pred = b.pred[x]
        count = self._weight(end, x)
        cur = end
        while cur in pred and count <= self.kappa + 1 and len(path) < 100_000:
            cur = pred[cur]
            path.append(cur)
            count += self._weight(cur, x)
        return {"kind": "fixpoint", "variable": x, "cycle": False, "kappa": self.kappa, "path": path[::-1]}

    def _find_cycle(self, b: Branch, x: str) -> list[Node] | None:
        """A cycle of the X-trace graph through an occurrence of X, if any."""
        target = self.var_node[x]
        starts = [(pid, target) for pid in b.prefixes if target in b.phi[pid]]
        for s in starts:
            # iterative DFS for a path from s back to s
            parent: dict[Node, Node | None] = {s: None}
            stack = [s]
            while stack:
                n = stack.pop()
                if not self._allowed(n, x):
                    continue
                for m in b.edges.get(n, ()):
                    if m == s:
                        path = [m, n]
                        while parent[n] is not None:
                            n = parent[n]
                            path.append(n)
                        return path[::-1]
                    if m not in parent:
                        parent[m] = n
                        stack.append(m)
        return None

    # -- saturation --------------------------------------------------------

    def _register(self, b: Branch, node: Node) -> None:
        pid, f = node
        match f:
            case And(l, r):
                b.applied.add(("and", node))
                self.add(b, pid, l, "and", node)
                if b.closure is None:
                    self.add(b, pid, r, "and", node)
            case Or(l, r):
                if l is r:
                    b.applied.add(("or", node))
                    self.add(b, pid, l, "or", node)
                else:
                    b.ors.append(node)
            case Fix(_, body):
                b.applied.add(("fix", node))
                self.add(b, pid, body, "fix", node)
            case Var(x):
                b.applied.add(("X", node))
                self.add(b, pid, self.bt.fx[x], "X", node)
            case Box(a, body):
                b.boxes.setdefault(pid, []).append(f)
                for c in b.children(pid, a):
                    b.modal.append(("B", node, c, body))
                    if self.has(a, FOUR):
                        b.modal.append(("4", node, c, f))
                if self.has(a, T):
                    b.modal.append(("t", node, pid, body))
                if pid != 0 and self.table.last_agent(pid) == a:
                    par = self.table.parent[pid]
                    if self.has(a, B):
                        b.modal.append(("b", node, par, body))
                        if self.has(a, FOUR):
                            b.modal.append(("b4", node, par, f))
                    if self.has(a, FIVE):
                        b.modal.append(("B5", node, par, f))
                        for s in b.children(par, a):
                            if s != pid:
                                b.modal.append(("B55", node, s, f))
                if self.has(a, D):
                    b.gens.append(node)
            case Diamond():
                b.gens.append(node)
            case _:
                pass

    def saturate(self, b: Branch):
        """Run rules until the branch closes, needs a split, or is finished.

        Returns ``("closed",)``, ``("split", node)``, ``("open", model)``
        or ``("unknown", reason)``.
        """
        cap = self.bounds.node_cap
        while True:
            if b.closure is not None:
                return ("closed",)
            if b.nodes > cap:
                return ("unknown", f"node cap {cap} reached")
            if b.queue:
                self._register(b, b.queue.popleft())
                continue
            while b.ors:
                node = b.ors[0]
                if ("or", node) in b.applied:
                    b.ors.popleft()
                    continue
                return ("split", node)
            if b.modal:
                rule, premise, target, concl = b.modal.popleft()
                key = (rule, premise, target)
                if key not in b.applied:
                    b.applied.add(key)
                    self.add(b, target, concl, rule, premise)
                continue
            if self._generate(b):
                continue
            outcome = self._finish(b)
            if outcome is not None:
                return outcome

    def _generate(self, b: Branch) -> bool:
        keep = []
        done = False
        pending = b.gens
        b.gens = keep
        for i, node in enumerate(pending):
            if done:
                keep.append(node)
                continue
            status = self._try_generate(b, node)
            if status in ("applied", "linked"):
                done = True
            elif status == "keep":
                keep.append(node)
        return done

    def _try_generate(self, b: Branch, node: Node) -> str:
        pid, f = node
        a = f.agent
        if isinstance(f, Box):
            if b.children(pid, a):
                return "drop"
            rule, home, target_key = "d", pid, f.body
        else:
            phi = f.body
            if not self.flat(pid, a):
                rule, home = "D", pid
            else:
                sigma = self.table.parent[pid]
                if not self.flat(sigma, a):
                    if b.has(sigma, f):
                        return self._link(b, node, sigma, a, phi)
                    rule, home = "D5", pid
                else:
                    sigma0 = self.table.parent[sigma]
                    if b.has(sigma0, f):
                        return self._link(b, node, sigma0, a, phi)
                    rule, home = "D55", sigma
            target_key = phi
        key = (rule, node)
        if key in b.applied:
            return "drop"
        if rule != "D55" and self._blocked(b, pid):
            return "keep"
        child = self.table.child(home, a, target_key)
        if self.table.depth[child] > self.bounds.prefix_cap:
            b.capped = True
            return "keep"
        b.applied.add(key)
        self._enter(b, child)
        self.add(b, child, target_key, rule, node)
        return "applied"

    def _link(self, b: Branch, node: Node, sigma: int, a: str, phi: Formula) -> str:
        # The diamond is already served by sigma's own successor for phi,
        # which the euclidean closure connects to this prefix.
        child = self.table.lookup(sigma, a, phi)
        if child is None or child not in b.phi or not b.has(child, phi):
            return "keep"
        b.applied.add(("link5", node))
        self.add(b, child, phi, "link5", node)
        return "linked"

    def _blocked(self, b: Branch, pid: int) -> bool:
        if pid in b.blocked:
            anc = b.blocked[pid]
            if b.phi[anc].keys() == b.phi[pid].keys():
                return True
            del b.blocked[pid]
        if pid == 0 or pid in b.never_block or b.has_children(pid):
            return False
        mine = b.phi[pid].keys()
        agent = self.table.last_agent(pid)
        for anc in self.table.ancestors(pid):
            if self.table.last_agent(anc) == agent and b.phi[anc].keys() == mine:
                b.blocked[pid] = anc
                return True
        return False

    def _finish(self, b: Branch):
        # Drop stale blocks; a prefix whose set changed gets its turn again.
        stale = [p for p, anc in b.blocked.items() if b.phi[anc].keys() != b.phi[p].keys()]
        for p in stale:
            del b.blocked[p]
        if stale:
            return None
        waiting = [n for n in b.gens if n[0] not in b.blocked]
        model = self.extract(b)
        if model_check(model, 0, self.f) and check_logic(model, self.spec):
            return ("open", model)
        if b.blocked:
            b.never_block |= set(b.blocked)
            b.blocked.clear()
            return None
        if b.capped:
            return ("unknown", f"prefix cap {self.bounds.prefix_cap} reached")
        if waiting:
            return ("unknown", "diamond obligations could not be discharged")
        return ("unknown", "extracted model failed verification")

    # -- models ------------------------------------------------------------

    def extract(self, b: Branch) -> KripkeModel:
        states = [p for p in b.prefixes if p not in b.blocked]
        index = {p: i for i, p in enumerate(states)}
        edges = set()
        for p in b.prefixes:
            if p == 0:
                continue
            parent = self.table.parent[p]
            agent = self.table.last_agent(p)
            target = b.blocked.get(p, p)
            edges.add((index[parent], agent, index[target]))
        val = []
        for p in states:
            val.append({g.name for g in b.phi[p] if isinstance(g, Lit) and g.positive})
        names = tuple(self.table.render(p) for p in states)
        model = KripkeModel(names, self.spec.agents, frozenset(edges), tuple(frozenset(v) for v in val), 0)
        return close_for_logic(model, self.spec)

    # -- search ------------------------------------------------------------

    def run(self) -> Verdict:
        root = self.initial()
        stack = [root]
        closed: list[Branch] = []
        unknown: list[tuple[Branch, str]] = []
        explored = 0
        while stack:
            b = stack.pop()
            explored += 1
            if explored > self.bounds.branch_cap:
                unknown.append((b, f"branch cap {self.bounds.branch_cap} reached"))
                break
            outcome = self.saturate(b)
            kind = outcome[0]
            if kind == "closed":
                closed.append(b)
            elif kind == "open":
                return Sat(outcome[1], tuple(b.transcript()))
            elif kind == "unknown":
                unknown.append((b, outcome[1]))
            else:
                node = outcome[1]
                pid, f = node
                b.applied.add(("or", node))
                first, second = (f.left, f.right)
                if b.has(pid, second) and not b.has(pid, first):
                    first, second = second, first
                left, right = b, b.copy()
                left.choices.append(0)
                right.choices.append(1)
                self.add(left, pid, first, "or", node)
                self.add(right, pid, second, "or", node)
                stack.append(right)
                stack.append(left)
        if unknown:
            b, reason = unknown[0]
            return Unknown(reason, tuple(b.transcript()))
        branches = tuple(ClosedBranch(tuple(b.choices), tuple(b.steps), b.closure) for b in closed)
        return Unsat(Proof(self.f, self.spec, self.kappa, branches, self.table))


def run_tableau(f: Formula, spec: LogicSpec, bounds: TableauBounds = TableauBounds()) -> Verdict:
    """Decide satisfiability of ``f`` in the logic, within the bounds."""
    return _Engine(f, spec, bounds).run()


def tableau_proof(f: Formula, spec: LogicSpec, bounds: TableauBounds = TableauBounds()) -> Verdict:
    """Look for a closed tableau for the negation of ``f``.

    ``Unsat`` means f is valid (the proof is attached); ``Sat`` carries a
    countermodel of f.
    """
    return run_tableau(negate(f), spec, bounds)


def extract_model(b: Branch, spec: LogicSpec | None = None) -> KripkeModel:
    if b.ctx is None:
        raise TableauError("branch is not attached to a tableau")
    if b.closure is not None:
        raise TableauError("cannot extract a model from a closed branch")
    if spec is not None and spec != b.ctx.spec:
        raise TableauError("branch was built for a different logic")
    return b.ctx.extract(b)


# ------------------------------------------------------- inspection API

def start_branch(f: Formula, spec: LogicSpec, bounds: TableauBounds = TableauBounds()) -> Branch:
    """A fresh branch holding ``ε f`` and nothing derived yet."""
    eng = _Engine(f, spec, bounds)
    b = Branch(ctx=eng)
    b.dist = {x: {} for x in eng.mu_vars}
    b.pred = {x: {} for x in eng.mu_vars}
    eng._enter(b, 0)
    b.phi[0][f] = None
    b.nodes = 1
    return b


def place(b: Branch, steps: Sequence[tuple[str, Formula]], f: Formula) -> int:
    """Put ``f`` at the prefix given by ``steps`` (creating it), without applying rules."""
    assert b.ctx is not None
    pid = 0
    for a, g in steps:
        pid = b.ctx.table.child(pid, a, g)
        if pid not in b.phi:
            b.phi[pid] = {}
            b.prefixes.append(pid)
            b.kids.setdefault((b.ctx.table.parent[pid], a), []).append(pid)
    b.phi[pid].setdefault(f, None)
    return pid


def saturate_branch(b: Branch) -> str:
    """Saturate an inspection branch (no splitting); returns the outcome kind."""
    assert b.ctx is not None
    for pid in list(b.prefixes):
        for f in list(b.phi[pid]):
            b.queue.append((pid, f))
    return b.ctx.saturate(b)[0]


def applicable_rules(b: Branch, spec: LogicSpec | None = None) -> list[RuleInstance]:
    """Every rule instance applicable to the branch that is not yet in its log.

    This is a direct scan of the side conditions, independent of the
    engine's incremental bookkeeping.
    """
    eng = b.ctx
    assert eng is not None
    if spec is not None and spec != eng.spec:
        eng = _Engine(eng.f, spec, eng.bounds)
        eng.table = b.ctx.table
    table = eng.table
    out: list[RuleInstance] = []
    present = set(b.prefixes)

    def kids(pid, a):
        return [c for c in b.kids.get((pid, a), []) if c in present]

    def emit(rule, pid, f, target, concl, key):
        if key not in b.applied:
            out.append(RuleInstance(rule, pid, f, target, concl))

    for pid in b.prefixes:
        for f in b.phi[pid]:
            node = (pid, f)
            match f:
                case And(l, _):
                    emit("and", pid, f, pid, l, ("and", node))
                case Or(l, _):
                    emit("or", pid, f, pid, l, ("or", node))
                case Fix(_, body):
                    emit("fix", pid, f, pid, body, ("fix", node))
                case Var(x):
                    emit("X", pid, f, pid, eng.bt.fx[x], ("X", node))
                case Box(a, body):
                    for c in kids(pid, a):
                        emit("B", pid, f, c, body, ("B", node, c))
                        if eng.has(a, FOUR):
                            emit("4", pid, f, c, f, ("4", node, c))
                    if eng.has(a, T):
                        emit("t", pid, f, pid, body, ("t", node, pid))
                    if pid != 0 and table.last_agent(pid) == a:
                        par = table.parent[pid]
                        if eng.has(a, B):
                            emit("b", pid, f, par, body, ("b", node, par))
                            if eng.has(a, FOUR):
                                emit("b4", pid, f, par, f, ("b4", node, par))
                        if eng.has(a, FIVE):
                            emit("B5", pid, f, par, f, ("B5", node, par))
                            for s in kids(par, a):
                                if s != pid:
                                    emit("B55", pid, f, s, f, ("B55", node, s))
                    if eng.has(a, D):
                        emit("d", pid, f, None, body, ("d", node))
                case Diamond(a, body):
                    if not eng.flat(pid, a):
                        emit("D", pid, f, None, body, ("D", node))
                    else:
                        sigma = table.parent[pid]
                        if not eng.flat(sigma, a):
                            if not b.has(sigma, f):
                                emit("D5", pid, f, None, body, ("D5", node))
                        else:
                            if not b.has(table.parent[sigma], f):
                                emit("D55", pid, f, sigma, body, ("D55", node))
    return out


# ------------------------------------------------------------ re-checking

def check_proof(proof: Proof) -> bool:
    """Replay a proof: every step must be a rule application and every branch closed."""
    bt = binding_table(proof.formula)
    spec = proof.spec
    table = proof.table
    for br in proof.branches:
        phi: dict[int, set[Formula]] = {0: set()}
        edges: dict[Node, set[Node]] = {}
        for rule, premise, concl, _new in br.steps:
            pid, g = concl
            if rule == "root":
                if pid != 0 or g is not proof.formula:
                    return False
            else:
                if premise is None or premise[1] not in phi.get(premise[0], ()):
                    return False
                if not _rule_ok(rule, premise, concl, bt, spec, table, phi):
                    return False
                edges.setdefault(premise, set()).add(concl)
            phi.setdefault(pid, set()).add(g)
        if not _closure_ok(br.closure, phi, edges, bt, proof.kappa):
            return False
    return bool(proof.branches) and _splits_covered(proof.branches)


def _splits(br: ClosedBranch) -> list[tuple]:
    return [(premise, concl) for rule, premise, concl, _ in br.steps
            if rule == "or" and premise[1].left is not premise[1].right]


def _splits_covered(branches: Sequence[ClosedBranch]) -> bool:
    """Every disjunction split in a branch has its other half closed in a sibling branch."""
    splits = [_splits(br) for br in branches]
    if any(len(s) != len(br.choices) for s, br in zip(splits, branches)):
        return False
    seen = {}
    for s, br in zip(splits, branches):
        for i, (premise, concl) in enumerate(s):
            seen[(br.choices[:i], br.choices[i], premise)] = concl
    for (prefix, choice, premise), concl in seen.items():
        other = seen.get((prefix, 1 - choice, premise))
        if other is None or {concl[1], other[1]} != {premise[1].left, premise[1].right}:
            return False
    return True


def _rule_ok(rule, premise, concl, bt, spec, table: PrefixTable, phi) -> bool:
    (p, f), (c, g) = premise, concl
    parent = table.parent

    def has(a, cond):
        return cond in spec[a]

    def flat(pid, a):
        return pid != 0 and table.last_agent(pid) == a and has(a, FIVE)

    def is_child(x, of, a):
        return x != 0 and parent[x] == of and table.last_agent(x) == a

    match rule:
        case "and":
            return isinstance(f, And) and c == p and g in (f.left, f.right)
        case "or":
            return isinstance(f, Or) and c == p and g in (f.left, f.right)
        case "fix":
            return isinstance(f, Fix) and c == p and g is f.body
        case "X":
            return isinstance(f, Var) and c == p and g is bt.fx[f.name]
    if not isinstance(f, Modal):
        return False
    a = f.agent
    if rule in ("B", "4"):
        return isinstance(f, Box) and is_child(c, p, a) and c in phi and \
            (g is f.body if rule == "B" else (g is f and has(a, FOUR)))
    if rule == "t":
        return isinstance(f, Box) and has(a, T) and c == p and g is f.body
    if rule in ("b", "b4", "B5"):
        if not (isinstance(f, Box) and is_child(p, c, a)):
            return False
        if rule == "b":
            return has(a, B) and g is f.body
        if rule == "b4":
            return has(a, B) and has(a, FOUR) and g is f
        return has(a, FIVE) and g is f
    if rule == "B55":
        return isinstance(f, Box) and has(a, FIVE) and p != 0 and table.last_agent(p) == a and \
            is_child(c, parent[p], a) and c != p and c in phi and g is f
    if rule == "d":
        return isinstance(f, Box) and has(a, D) and table.lookup(p, a, f.body) == c and g is f.body
    if rule == "D":
        return isinstance(f, Diamond) and not flat(p, a) and table.lookup(p, a, f.body) == c and g is f.body
    if rule == "D5":
        return isinstance(f, Diamond) and flat(p, a) and not flat(parent[p], a) and \
            f not in phi.get(parent[p], ()) and table.lookup(p, a, f.body) == c and g is f.body
    if rule == "D55":
        return isinstance(f, Diamond) and flat(p, a) and flat(parent[p], a) and \
            f not in phi.get(parent[parent[p]], ()) and table.lookup(parent[p], a, f.body) == c and g is f.body
    if rule == "link5":
        if not (isinstance(f, Diamond) and flat(p, a) and g is f.body):
            return False
        sigma = parent[p] if not flat(parent[p], a) else parent[parent[p]]
        return f in phi.get(sigma, ()) and table.lookup(sigma, a, f.body) == c
    return False


def _closure_ok(closure, phi, edges, bt, kappa) -> bool:
    if closure is None:
        return False
    if closure["kind"] == "propositional":
        here = phi.get(closure["prefix"], set())
        from .formula import FF

        if closure["formula"] == "ff":
            return FF in here
        return any(isinstance(g, Lit) and str(g) == closure["formula"] and negate(g) in here for g in here)
    x = closure["variable"]
    var = Var(x)
    path = closure["path"]
    for u, v in zip(path, path[1:]):
        if v not in edges.get(u, ()):
            return False
        if isinstance(u[1], Var) and bt.less(x, u[1].name):
            return False
    hits = sum(1 for n in path if n[1] is var)
    if closure["cycle"]:
        return len(path) > 1 and path[0] == path[-1] and path[0][1] is var
    return hits > kappa
