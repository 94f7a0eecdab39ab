"""Frame conditions and multi-agent logic specifications.

A logic assigns every agent a set of frame conditions drawn from
D (serial), T (reflexive), B (symmetric), 4 (transitive) and 5 (euclidean).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Mapping


class FrameCondition(str, enum.Enum):
    D = "D"
    T = "T"
    B = "B"
    FOUR = "4"
    FIVE = "5"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "FrameCondition":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValueError(f"unknown frame condition {text!r}") from None


#: Closing a frame under these conditions in this order never destroys a
#: condition obtained earlier in the sequence.
CLOSURE_ORDER: tuple[FrameCondition, ...] = (
    FrameCondition.D,
    FrameCondition.T,
    FrameCondition.B,
    FrameCondition.FOUR,
    FrameCondition.FIVE,
)


def closure_preserving_order() -> list[FrameCondition]:
    return list(CLOSURE_ORDER)


def sort_conditions(conds: Iterable[FrameCondition]) -> tuple[FrameCondition, ...]:
    conds = set(conds)
    return tuple(c for c in CLOSURE_ORDER if c in conds)


_SPECIAL = {"S4": "T4", "S5": "T45"}


def conditions_from_name(name: str) -> frozenset[FrameCondition]:
    """Resolve a single-agent logic name such as ``K``, ``KD45`` or ``S5``.

    Explicit sets like ``{D,4}`` are accepted as well.
    """
    text = name.strip()
    if text.startswith("{") and text.endswith("}"):
        inner = text[1:-1].strip()
        if not inner:
            return frozenset()
        return frozenset(FrameCondition.parse(c) for c in inner.split(","))
    upper = text.upper()
    upper = _SPECIAL.get(upper, upper)
    if upper.startswith("K"):
        upper = upper[1:]
    conds = set()
    for ch in upper:
        try:
            conds.add(FrameCondition(ch))
        except ValueError:
            raise ValueError(f"unknown logic name {name!r}") from None
    return frozenset(conds)


def name_of_conditions(conds: Iterable[FrameCondition]) -> str:
    ordered = sort_conditions(conds)
    letters = "".join(c.value for c in ordered)
    if letters == "T4":
        return "S4"
    if letters == "T45":
        return "S5"
    if not letters:
        return "K"
    if set(letters) <= {"4", "5"}:
        return "K" + letters
    return letters


@dataclass(frozen=True)
class LogicSpec:
    """Map from agents to frame-condition sets.

    >>> spec = LogicSpec.parse("a:K; b:S5")
    >>> sorted(str(c) for c in spec["b"])
    ['4', '5', 'T']
    """

    entries: tuple[tuple[str, frozenset[FrameCondition]], ...]

    def __post_init__(self):
        names = [a for a, _ in self.entries]
        if not names:
            raise ValueError("a logic needs at least one agent")
        if len(set(names)) != len(names):
            raise ValueError("duplicate agent in logic specification")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Iterable[FrameCondition | str]]) -> "LogicSpec":
        entries = []
        for agent, conds in mapping.items():
            if isinstance(conds, str):
                cset = conditions_from_name(conds)
            else:
                cset = frozenset(c if isinstance(c, FrameCondition) else FrameCondition.parse(c)
                                 for c in conds)
            entries.append((agent, cset))
        return cls(tuple(entries))

    @classmethod
    def uniform(cls, agents: Iterable[str], name: str) -> "LogicSpec":
        conds = conditions_from_name(name)
        return cls(tuple((a, conds) for a in agents))

    @classmethod
    def parse(cls, text: str) -> "LogicSpec":
        """Parse ``"a:K; b:S5"`` or ``"a:{D,4}"``."""
        entries = []
        for part in re.split(r";", text):
            part = part.strip()
            if not part:
                continue
            agent, sep, name = part.partition(":")
            if not sep or not agent.strip():
                raise ValueError(f"bad logic entry {part!r}; expected agent:LOGIC")
            entries.append((agent.strip(), conditions_from_name(name)))
        return cls(tuple(entries))

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.entries)

    def __getitem__(self, agent: str) -> frozenset[FrameCondition]:
        for a, conds in self.entries:
            if a == agent:
                return conds
        raise KeyError(agent)

    def has(self, agent: str, cond: FrameCondition) -> bool:
        return cond in self[agent]

    def items(self):
        return iter(self.entries)

    def with_agent(self, agent: str, conds: Iterable[FrameCondition]) -> "LogicSpec":
        conds = frozenset(conds)
        if agent in self.agents:
            return LogicSpec(tuple((a, conds if a == agent else c) for a, c in self.entries))
        return LogicSpec(self.entries + ((agent, conds),))

    def render(self) -> str:
        return "; ".join(f"{a}:{name_of_conditions(c)}" for a, c in self.entries)

    def __str__(self) -> str:
        return self.render()
