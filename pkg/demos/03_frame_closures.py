"""Frame conditions and their least closures.

Closing a relation under one condition can break another one that held
before. The euclidean frame {(0,1),(1,1)} stops being euclidean once it
is made reflexive, and a transitive frame can lose transitivity when it is
made euclidean. Closing under all conditions together repairs both.
"""

from mumod.kripke import (
    NOT_PRESERVED_UNDER_CLOSURE,
    close_relation,
    close_relation_all,
    is_euclidean,
    is_transitive,
    non_preservation_witnesses,
)
from mumod.logic import FrameCondition as C

for x, y in sorted(NOT_PRESERVED_UNDER_CLOSURE):
    print(f"closing a {x.value} frame under {y.value} can break {x.value}:",
          [sorted(r) for r in non_preservation_witnesses(x, y)])

rel = frozenset({(0, 1), (1, 1)})
refl = close_relation(rel, 2, C.T)
print("\neuclidean frame", sorted(rel), "-> reflexive closure", sorted(refl),
      "euclidean:", is_euclidean(refl, 2))

rel = frozenset({(0, 0), (0, 1), (2, 1)})
euc = close_relation(rel, 3, C.FIVE)
print("transitive frame", sorted(rel), "-> euclidean closure", sorted(euc),
      "transitive:", is_transitive(euc, 3))
both = close_relation_all(rel, 3, [C.FOUR, C.FIVE])
print("joint closure", sorted(both), "transitive:", is_transitive(both, 3),
      "euclidean:", is_euclidean(both, 3))
