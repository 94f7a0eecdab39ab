"""Parsing, negation normal form and formula size.

Formulas are kept in negation normal form and shared, so a repeated
subformula is stored once. ``size`` counts distinct subformulas and
``tree_size`` counts symbols of the printed tree.
"""

from mumod import negate, parse, size, tree_size
from mumod.formula import inv, normalize, prop

f = parse("!(p & <a>q) | mu X.(q | <b>X)")
print("parsed and pushed to NNF:", f)
print("negation:", negate(f))
print("double negation is the identity:", negate(negate(f)) is f)

# the parser renames clashing binders apart
g = parse("nu X.(p & [a]X) & nu X.(q & [a]X)")
print("\nrepeated binder names become:", g)
print("normalize is idempotent:", normalize(g) is g)

# a balanced tree of conjunctions shares its leaves
h = prop("p")
for _ in range(10):
    h = parse(f"({h}) & ({h})")
print(f"\n10 nested self-conjunctions: size {size(h)}, tree size {tree_size(h)}")

print("\ninvariance of p along a and b:", inv(prop("p"), ["a", "b"]))
