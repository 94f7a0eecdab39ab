"""Surface syntax: a recursive-descent parser and a pretty printer.

Grammar (binders extend as far right as possible)::

    formula := "tt" | "ff" | prop | VAR | "!" formula | "(" formula ")"
             | formula ("&" | "|" | "->") formula
             | "[" agent "]" formula | "<" agent ">" formula
             | ("mu" | "nu") VAR "." formula

Precedence, tightest first: unary operators, ``&``, ``|``, ``->``.
``&`` and ``|`` associate to the left, ``->`` to the right.  Propositions
start with a lowercase letter, recursion variables with an uppercase one.
Names starting with ``_`` are reserved for fresh propositions introduced by
the translations.
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence

from .formula import (
    FF,
    TT,
    And,
    Bottom,
    Box,
    Diamond,
    Fix,
    Formula,
    Lit,
    Mu,
    Nu,
    Or,
    Top,
    Var,
    normalize,
)

KEYWORDS = {"tt", "ff", "mu", "nu"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>[!&|()\[\]<>.])
    """,
    re.VERBOSE,
)


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, pos: int | None = None, text: str | None = None):
        self.pos = pos
        self.text = text
        if pos is not None:
            message = f"{message} at position {pos}"
        super().__init__(message)


class UnknownAgentError(FormulaSyntaxError):
    pass


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    """Builds a raw tuple tree; negation is compiled away afterwards."""

    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value: str | None = None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            found = tok[1] or "end of input"
            raise FormulaSyntaxError(f"expected {value!r}, found {found!r}", tok[2], self.text)
        self.i += 1
        return tok

    def parse(self):
        node = self.implication()
        tok = self.peek()
        if tok[0] != "eof":
            raise FormulaSyntaxError(f"unexpected {tok[1]!r}", tok[2], self.text)
        return node

    def implication(self):
        left = self.disjunction()
        if self.peek()[1] == "->":
            pos = self.take()[2]
            return ("imp", left, self.implication(), pos)
        return left

    def disjunction(self):
        node = self.conjunction()
        while self.peek()[1] == "|":
            pos = self.take()[2]
            node = ("or", node, self.conjunction(), pos)
        return node

    def conjunction(self):
        node = self.unary()
        while self.peek()[1] == "&":
            pos = self.take()[2]
            node = ("and", node, self.unary(), pos)
        return node

    def agent(self, close: str):
        kind, value, pos = self.take()
        if kind != "ident":
            raise FormulaSyntaxError("expected an agent name", pos, self.text)
        self.take(close)
        return value, pos

    def unary(self):
        kind, value, pos = self.peek()
        if value == "!":
            self.take()
            return ("not", self.unary(), pos)
        if value == "[":
            self.take()
            agent, apos = self.agent("]")
            return ("box", agent, self.unary(), apos)
        if value == "<":
            self.take()
            agent, apos = self.agent(">")
            return ("dia", agent, self.unary(), apos)
        if kind == "ident" and value in ("mu", "nu"):
            self.take()
            vkind, var, vpos = self.take()
            if vkind != "ident" or not var[0].isupper():
                raise FormulaSyntaxError("expected an uppercase recursion variable", vpos, self.text)
            self.take(".")
            return (value, var, self.implication(), vpos)
        return self.atom()

    def atom(self):
        kind, value, pos = self.take()
        if value == "(":
            node = self.implication()
            self.take(")")
            return node
        if kind != "ident":
            found = value or "end of input"
            raise FormulaSyntaxError(f"unexpected {found!r}", pos, self.text)
        if value == "tt":
            return ("tt",)
        if value == "ff":
            return ("ff",)
        if value in KEYWORDS:
            raise FormulaSyntaxError(f"keyword {value!r} used as an atom", pos, self.text)
        if value[0].isupper():
            return ("var", value, pos)
        return ("prop", value, pos)


def _compile(node, negated: bool, scope: dict[str, bool], text: str,
             agents: frozenset[str] | None, allow_reserved: bool) -> Formula:
    tag = node[0]
    if tag == "tt":
        return FF if negated else TT
    if tag == "ff":
        return TT if negated else FF
    if tag == "prop":
        name, pos = node[1], node[2]
        if name.startswith("_") and not allow_reserved:
            raise FormulaSyntaxError(f"proposition name {name!r} is reserved", pos, text)
        return Lit(name, not negated)
    if tag == "var":
        name, pos = node[1], node[2]
        if name not in scope:
            raise FormulaSyntaxError(f"unbound recursion variable {name}", pos, text)
        if scope[name] != negated:
            raise FormulaSyntaxError(f"recursion variable {name} occurs under negation", pos, text)
        return Var(name)
    if tag == "not":
        return _compile(node[1], not negated, scope, text, agents, allow_reserved)
    if tag in ("and", "or"):
        left = _compile(node[1], negated, scope, text, agents, allow_reserved)
        right = _compile(node[2], negated, scope, text, agents, allow_reserved)
        conj = (tag == "and") != negated
        return And(left, right) if conj else Or(left, right)
    if tag == "imp":
        left = _compile(node[1], not negated, scope, text, agents, allow_reserved)
        right = _compile(node[2], negated, scope, text, agents, allow_reserved)
        return And(left, right) if negated else Or(left, right)
    if tag in ("box", "dia"):
        agent, body, pos = node[1], node[2], node[3]
        if agents is not None and agent not in agents:
            raise UnknownAgentError(f"unknown agent {agent!r}", pos, text)
        inner = _compile(body, negated, scope, text, agents, allow_reserved)
        return Box(agent, inner) if (tag == "box") != negated else Diamond(agent, inner)
    if tag in ("mu", "nu"):
        var, body = node[1], node[2]
        inner_scope = dict(scope)
        inner_scope[var] = negated
        inner = _compile(body, negated, inner_scope, text, agents, allow_reserved)
        least = (tag == "mu") != negated
        return Mu(var, inner) if least else Nu(var, inner)
    raise AssertionError(tag)


def parse(text: str, agents: Iterable[str] | None = None, *, allow_reserved: bool = False) -> Formula:
    """Parse surface syntax into a normalised negation-normal-form formula.

    General negation and implication are compiled away; a negation that
    would land on a recursion variable is rejected.

    >>> str(parse("!(p & <a>q)"))
    '!p | [a]!q'
    """
    tree = _Parser(text).parse()
    agent_set = frozenset(agents) if agents is not None else None
    f = _compile(tree, False, {}, text, agent_set, allow_reserved)
    return normalize(f)


# ---------------------------------------------------------------- render

_PREC_OR, _PREC_AND, _PREC_UNARY = 2, 3, 4


def render(f: Formula) -> str:
    return _render(f, 0, True)


def _render(f: Formula, prec: int, tail: bool) -> str:
    # ``tail`` is true when nothing follows f inside the enclosing group, so
    # a binder there can extend to the right without parentheses.
    match f:
        case Top():
            return "tt"
        case Bottom():
            return "ff"
        case Lit(name, positive):
            return name if positive else "!" + name
        case Var(name):
            return name
        case And(l, r) | Or(l, r):
            p = _PREC_AND if isinstance(f, And) else _PREC_OR
            op = "&" if isinstance(f, And) else "|"
            wrap = prec > p
            inner_tail = True if wrap else tail
            s = f"{_render(l, p, False)} {op} {_render(r, p + 1, inner_tail)}"
            return f"({s})" if wrap else s
        case Box(a, b):
            return f"[{a}]" + _render(b, _PREC_UNARY, tail)
        case Diamond(a, b):
            return f"<{a}>" + _render(b, _PREC_UNARY, tail)
        case Fix(x, b):
            kw = "mu" if isinstance(f, Mu) else "nu"
            body = _render(b, 0, True)
            if isinstance(b, (And, Or)):
                body = f"({body})"
            s = f"{kw} {x}.{body}"
            return s if tail else f"({s})"
    raise TypeError(f"not a formula: {f!r}")


def parse_many(texts: Sequence[str], agents: Iterable[str] | None = None) -> list[Formula]:
    return [parse(t, agents) for t in texts]
