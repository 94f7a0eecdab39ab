"""Hash-consed formulas of the multi-agent modal mu-calculus.

Formulas are kept in negation normal form: negation only appears on
propositional literals.  Every node is interned, so structurally equal
formulas are the same Python object and carry the same integer ``uid``.
That makes equality an identity check and lets sets of formulas hash on a
small integer, which the tableau relies on heavily.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .logic import FrameCondition

_TABLE: dict[tuple, "Formula"] = {}
_UIDS = itertools.count()


class Formula:
    __slots__ = ("uid",)
    _fields: tuple[str, ...] = ()

    def __new__(cls, *args):
        if len(args) != len(cls._fields):
            raise TypeError(f"{cls.__name__} takes {len(cls._fields)} arguments")
        key = (cls, args)
        node = _TABLE.get(key)
        if node is None:
            node = object.__new__(cls)
            object.__setattr__(node, "uid", next(_UIDS))
            for name, value in zip(cls._fields, args):
                object.__setattr__(node, name, value)
            _TABLE[key] = node
        return node

    def __setattr__(self, name, value):
        raise AttributeError("formulas are immutable")

    def __hash__(self) -> int:
        return self.uid

    def __eq__(self, other) -> bool:
        return self is other

    def __lt__(self, other: "Formula") -> bool:
        return self.uid < other.uid

    def __reduce__(self):
        return (type(self), tuple(getattr(self, f) for f in self._fields))

    def __str__(self) -> str:
        from .syntax import render

        return render(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({str(self)!r})"

    def children(self) -> tuple["Formula", ...]:
        return ()

    # Operator sugar for building formulas in tests and scripts.
    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return negate(self)


class Top(Formula):
    __slots__ = ()
    __match_args__ = ()


class Bottom(Formula):
    __slots__ = ()
    __match_args__ = ()


class Lit(Formula):
    __slots__ = ("name", "positive")
    _fields = ("name", "positive")
    __match_args__ = ("name", "positive")

    def __new__(cls, name: str, positive: bool = True):
        return super().__new__(cls, name, bool(positive))


class Var(Formula):
    __slots__ = ("name",)
    _fields = ("name",)
    __match_args__ = ("name",)


class Binary(Formula):
    __slots__ = ("left", "right")
    _fields = ("left", "right")
    __match_args__ = ("left", "right")

    def children(self):
        return (self.left, self.right)


class And(Binary):
    __slots__ = ()


class Or(Binary):
    __slots__ = ()


class Modal(Formula):
    __slots__ = ("agent", "body")
    _fields = ("agent", "body")
    __match_args__ = ("agent", "body")

    def children(self):
        return (self.body,)


class Box(Modal):
    __slots__ = ()


class Diamond(Modal):
    __slots__ = ()


class Fix(Formula):
    __slots__ = ("var", "body")
    _fields = ("var", "body")
    __match_args__ = ("var", "body")

    def children(self):
        return (self.body,)


class Mu(Fix):
    __slots__ = ()


class Nu(Fix):
    __slots__ = ()


TT = Top()
FF = Bottom()


def prop(name: str) -> Lit:
    return Lit(name, True)


def neg_prop(name: str) -> Lit:
    return Lit(name, False)


# ---------------------------------------------------------------- builders

def conj(items: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is ``tt``."""
    items = list(items)
    if not items:
        return TT
    out = items[-1]
    for f in reversed(items[:-1]):
        out = And(f, out)
    return out


def disj(items: Iterable[Formula]) -> Formula:
    items = list(items)
    if not items:
        return FF
    out = items[-1]
    for f in reversed(items[:-1]):
        out = Or(f, out)
    return out


def implies(a: Formula, b: Formula) -> Formula:
    return Or(negate(a), b)


def box_all(f: Formula, agents: Sequence[str]) -> Formula:
    """``[Ag]f``, expanded to a conjunction of single-agent boxes."""
    return conj(Box(a, f) for a in agents)


def diamond_all(f: Formula, agents: Sequence[str]) -> Formula:
    return disj(Diamond(a, f) for a in agents)


def inv(f: Formula, agents: Sequence[str], var: str | None = None) -> Formula:
    """``nu X.(f & [Ag]X)``: f holds in every reachable state."""
    x = var or fresh_name("X", all_names(f))
    return Nu(x, And(f, box_all(Var(x), agents)))


def eve(f: Formula, agents: Sequence[str], var: str | None = None) -> Formula:
    """``mu X.(f | <Ag>X)``: f holds in some reachable state."""
    x = var or fresh_name("X", all_names(f))
    return Mu(x, Or(f, diamond_all(Var(x), agents)))


def inv_d(f: Formula, d: int, agents: Sequence[str]) -> Formula:
    """Bounded invariance: the conjunction of ``[Ag]^i f`` for ``i <= d``."""
    if d < 0:
        raise ValueError("depth must be non-negative")
    levels = [f]
    for _ in range(d):
        levels.append(box_all(levels[-1], agents))
    return conj(levels)


def build_axiom(cond: FrameCondition | str, agent: str, arg: Formula | None = None) -> Formula:
    """Axiom schema for a frame condition, instantiated at ``arg``.

    Implications are expanded into negation normal form, so for instance
    the T axiom ``[a]p -> p`` comes out as ``<a>!p | p``.
    """
    cond = FrameCondition(cond) if not isinstance(cond, FrameCondition) else cond
    p = prop("p") if arg is None else arg
    if cond is FrameCondition.D:
        return Diamond(agent, TT)
    if cond is FrameCondition.T:
        return implies(Box(agent, p), p)
    if cond is FrameCondition.B:
        return implies(Diamond(agent, Box(agent, p)), p)
    if cond is FrameCondition.FOUR:
        return implies(Box(agent, p), Box(agent, Box(agent, p)))
    return implies(Diamond(agent, Box(agent, p)), Box(agent, p))


# ------------------------------------------------------------- negation

@lru_cache(maxsize=None)
def negate(f: Formula) -> Formula:
    """Negation normal form dual.

    Recursion variables are left in place: under a dualised binder the
    variable stands for the complement of its old value, so for closed
    formulas the result denotes the complement.
    """
    match f:
        case Top():
            return FF
        case Bottom():
            return TT
        case Lit(name, positive):
            return Lit(name, not positive)
        case Var():
            return f
        case And(l, r):
            return Or(negate(l), negate(r))
        case Or(l, r):
            return And(negate(l), negate(r))
        case Box(a, b):
            return Diamond(a, negate(b))
        case Diamond(a, b):
            return Box(a, negate(b))
        case Mu(x, b):
            return Nu(x, negate(b))
        case Nu(x, b):
            return Mu(x, negate(b))
    raise TypeError(f"not a formula: {f!r}")


# ------------------------------------------------------------- measures

@lru_cache(maxsize=None)
def subformula_list(f: Formula) -> tuple[Formula, ...]:
    """Distinct subformulas in post-order (children before parents)."""
    seen: dict[Formula, None] = {}
    for child in f.children():
        for g in subformula_list(child):
            seen.setdefault(g, None)
    seen.setdefault(f, None)
    return tuple(seen)


def subformulas(f: Formula) -> frozenset[Formula]:
    return frozenset(subformula_list(f))


def signed_subformulas(f: Formula) -> frozenset[Formula]:
    return frozenset(signed_subformula_list(f))


def signed_subformula_list(f: Formula) -> tuple[Formula, ...]:
    """Subformulas followed by the duals of those whose dual is new.

    Duals of open subformulas keep their variables (read against the dual
    environment).
    """
    subs = subformula_list(f)
    seen = dict.fromkeys(subs)
    for g in subs:
        seen.setdefault(negate(g), None)
    return tuple(seen)


def size(f: Formula) -> int:
    """Number of distinct subformulas."""
    return len(subformula_list(f))


@lru_cache(maxsize=None)
def tree_size(f: Formula) -> int:
    """Number of nodes of the syntax tree, i.e. the symbol length."""
    return 1 + sum(tree_size(c) for c in f.children())


@lru_cache(maxsize=None)
def _modal_depth(f: Formula) -> int:
    match f:
        case Top() | Bottom() | Lit():
            return 0
        case Binary(l, r):
            return max(_modal_depth(l), _modal_depth(r))
        case Modal(_, b):
            return 1 + _modal_depth(b)
    raise ValueError("modal depth is only defined for recursion-free formulas")


def modal_depth(f: Formula) -> int:
    return _modal_depth(f)


@lru_cache(maxsize=None)
def free_vars(f: Formula) -> frozenset[str]:
    match f:
        case Var(x):
            return frozenset((x,))
        case Fix(x, b):
            return free_vars(b) - {x}
    out: frozenset[str] = frozenset()
    for c in f.children():
        out |= free_vars(c)
    return out


def is_closed(f: Formula) -> bool:
    return not free_vars(f)


@lru_cache(maxsize=None)
def props(f: Formula) -> frozenset[str]:
    if isinstance(f, Lit):
        return frozenset((f.name,))
    out: frozenset[str] = frozenset()
    for c in f.children():
        out |= props(c)
    return out


@lru_cache(maxsize=None)
def agents_of(f: Formula) -> frozenset[str]:
    out: frozenset[str] = frozenset((f.agent,)) if isinstance(f, Modal) else frozenset()
    for c in f.children():
        out |= agents_of(c)
    return out


@lru_cache(maxsize=None)
def all_names(f: Formula) -> frozenset[str]:
    """Every recursion-variable name occurring in f, bound or free."""
    out: frozenset[str] = frozenset()
    if isinstance(f, Var):
        out = frozenset((f.name,))
    elif isinstance(f, Fix):
        out = frozenset((f.var,))
    for c in f.children():
        out |= all_names(c)
    return out


def has_mu(f: Formula) -> bool:
    return any(isinstance(g, Mu) for g in subformula_list(f))


def is_recursion_free(f: Formula) -> bool:
    return not any(isinstance(g, (Fix, Var)) for g in subformula_list(f))


def binders(f: Formula) -> Iterator[Fix]:
    return (g for g in subformula_list(f) if isinstance(g, Fix))


# --------------------------------------------------------------- naming

def fresh_name(base: str, used: Iterable[str]) -> str:
    used = set(used)
    if base not in used:
        return base
    stem = re.sub(r"\d+$", "", base) or "X"
    for k in itertools.count(1):
        cand = f"{stem}{k}"
        if cand not in used:
            return cand
    raise AssertionError("unreachable")


class NameSupply:
    """Hands out recursion-variable names unused by a given formula."""

    def __init__(self, *formulas: Formula):
        self.used: set[str] = set()
        for f in formulas:
            self.used |= all_names(f)

    def fresh(self, base: str = "X") -> str:
        name = fresh_name(base, self.used)
        self.used.add(name)
        return name


# ----------------------------------------------------------- substitution

def substitute(f: Formula, x: str, g: Formula) -> Formula:
    """Replace the free occurrences of variable ``x`` in ``f`` by ``g``."""
    g_free = free_vars(g)
    memo: dict[Formula, Formula] = {}

    def go(h: Formula) -> Formula:
        if x not in free_vars(h):
            return h
        if h in memo:
            return memo[h]
        match h:
            case Var():
                out = g
            case Binary(l, r):
                out = type(h)(go(l), go(r))
            case Modal(a, b):
                out = type(h)(a, go(b))
            case Fix(y, b):
                if y in g_free:
                    raise RuntimeError(f"substitution would capture {y}; normalize first")
                out = type(h)(y, go(b))
            case _:
                out = h
        memo[h] = out
        return out

    return go(f)


def substitute_prop(f: Formula, name: str, g: Formula) -> Formula:
    """Replace proposition ``name`` by ``g`` (and its negation by the dual)."""
    ng = negate(g)
    memo: dict[Formula, Formula] = {}

    def go(h: Formula) -> Formula:
        if name not in props(h):
            return h
        if h in memo:
            return memo[h]
        match h:
            case Lit(n, pos) if n == name:
                out = g if pos else ng
            case Binary(l, r):
                out = type(h)(go(l), go(r))
            case Modal(a, b):
                out = type(h)(a, go(b))
            case Fix(y, b):
                out = type(h)(y, go(b))
            case _:
                out = h
        memo[h] = out
        return out

    return go(f)


# --------------------------------------------------------- binding table

@dataclass(frozen=True)
class BindingTable:
    """Binding formula of each recursion variable and the induced order."""

    fx: Mapping[str, Fix]
    free: frozenset[str] = frozenset()
    _below: Mapping[str, frozenset[str]] = field(default_factory=dict, repr=False)

    def less(self, x: str, y: str) -> bool:
        """``x < y``: the binder of x is a proper subformula of the binder of y."""
        return x in self._below.get(y, ())

    def order(self) -> set[tuple[str, str]]:
        return {(x, y) for y, xs in self._below.items() for x in xs}

    def is_least(self, x: str) -> bool:
        return isinstance(self.fx[x], Mu)

    def __contains__(self, x: str) -> bool:
        return x in self.fx


def binding_table(f: Formula) -> BindingTable:
    fx: dict[str, Fix] = {}
    for g in binders(f):
        prev = fx.get(g.var)
        if prev is not None and prev is not g:
            raise ValueError(f"recursion variable {g.var} is bound by two different formulas")
        fx[g.var] = g
    below = {}
    for y, gy in fx.items():
        inner = subformulas(gy.body)
        below[y] = frozenset(x for x, gx in fx.items() if x != y and gx in inner)
    return BindingTable(fx=fx, free=free_vars(f), _below=below)


def closure_cl(f: Formula, bt: BindingTable) -> Formula:
    """Close f by substituting binding formulas for its free variables.

    The least free variable (w.r.t. binder containment) is substituted
    first, so inner variables get their binder before outer ones.
    """
    cap = len(bt.fx) + 1
    for _ in range(cap + 1):
        free = free_vars(f)
        if not free:
            return f
        missing = free - set(bt.fx)
        if missing:
            raise ValueError(f"no binder for free variables {sorted(missing)}")
        minimal = [x for x in sorted(free) if not any(bt.less(y, x) for y in free if y != x)]
        x = minimal[0]
        f = substitute(f, x, bt.fx[x])
    raise RuntimeError("closure did not terminate; malformed binding table")


# ---------------------------------------------------------- normalisation

def binders_unique(f: Formula) -> bool:
    try:
        binding_table(f)
    except ValueError:
        return False
    return True


def normalize(f: Formula) -> Formula:
    """Rename binders so that every variable names a single binding formula.

    Identical binders may share a name (they are the same formula); only
    genuinely different binders of the same name get renamed.
    """
    supply = NameSupply(f)
    for _ in range(len(supply.used) + 2):
        if binders_unique(f):
            return f
        f = _normalize_pass(f, supply)
    if not binders_unique(f):
        raise RuntimeError("binder normalisation did not converge")
    return f


def _normalize_pass(f: Formula, supply: NameSupply) -> Formula:
    owner: dict[str, Formula] = {}
    memo: dict[Formula, Formula] = {}

    def go(h: Formula) -> Formula:
        if h in memo:
            return memo[h]
        match h:
            case Binary(l, r):
                out = type(h)(go(l), go(r))
            case Modal(a, b):
                out = type(h)(a, go(b))
            case Fix(x, b):
                nb = go(b)
                out = type(h)(x, nb)
                prev = owner.get(x)
                if prev is None:
                    owner[x] = out
                elif prev is not out:
                    y = supply.fresh(x)
                    out = type(h)(y, substitute(nb, x, Var(y)))
                    owner[y] = out
            case _:
                out = h
        memo[h] = out
        return out

    return go(f)
