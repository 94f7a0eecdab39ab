"""The prefixed tableau on the two worked formulas.

The first formula is satisfiable in K and the tableau returns a model,
which is then model checked. The second is unsatisfiable once agent b is
euclidean; the tableau returns a closed proof that can be re-checked step
by step.
"""

from mumod import LogicSpec, check_proof, model_check, parse, run_tableau

phi1 = parse("(p & <a>p) & mu X.(!p | [a]X)")
v = run_tableau(phi1, LogicSpec.parse("a:K"))
print("phi1 in a:K:", type(v).__name__)
print("  model:", v.model.to_json())
print("  model satisfies phi1:", model_check(v.model, v.model.designated, phi1))

phi2 = parse("<b>p & mu X.([b]!p | [b]X)")
for logic in ("b:K", "b:K5"):
    v = run_tableau(phi2, LogicSpec.parse(logic))
    print(f"\nphi2 in {logic}:", type(v).__name__)
print("  proof re-checks:", check_proof(v.proof))
print("  transcript:")
for line in v.transcript:
    print("   ", line)
