"""Bounded model search.

The oracle enumerates every rooted model up to a state bound whose
frames satisfy the logic and reports a witness, the absence of a model up
to that bound, or an exhausted budget.
"""

from mumod import LogicSpec, SearchBudget, bounded_sat, parse

cases = [
    ("mu X.[a]X", "a:K"),
    ("mu X.[a]X", "a:T"),
    ("<a>p & <a>!p & [a](p | q)", "a:S5"),
    ("<a><a>p & [a]!p", "a:K4"),
    ("<a><a>p & [a]!p", "a:K"),
]
for text, logic in cases:
    r = bounded_sat(parse(text), LogicSpec.parse(logic), SearchBudget(max_states=3))
    print(f"{text:28} {logic:5} {r.describe()}")
