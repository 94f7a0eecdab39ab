"""Satisfiability-preserving translations, checked against the oracle.

Each translation removes a frame condition from agent a: a formula is
satisfiable in the richer logic exactly when its translation is
satisfiable in the poorer one. The cross-check runs bounded model search
on both sides and maps witnesses across to confirm each verdict.
"""

from mumod import LogicSpec, SearchBudget, generate_corpus, parse, plan, size, translate

f = parse("<a>p & [a][a]!p")
for name in ("serial", "reflexive", "transitive"):
    print(f"{name:10}", translate(name, f, ["a"], ["a"]))
# the larger translations are summarised by size
for name, cond in (("embed", None), ("one-step", "4")):
    print(f"{name:10} size {size(f)} -> {size(translate(name, f, ['a'], ['a'], cond))}")

print()
corpus = generate_corpus(4, ["a"], ["p"], seed=0)
for name in ("serial", "reflexive", "transitive"):
    p = plan(name, ["a"], LogicSpec.parse("a:K"))
    rep = p.cross_check(corpus, SearchBudget(3), SearchBudget(3))
    print(f"{name}: {p.source} -> {p.target} on {len(corpus)} formulas:", rep.summary())
