"""Model checking on a small Kripke model.

States u -> v -> w along agent a, with w looping on agent b. Fixed points
are computed by plain iteration over sets of states.
"""

from mumod import KripkeModel, eval_set, model_check, parse

m = KripkeModel.from_json({
    "states": ["u", "v", "w"],
    "agents": ["a", "b"],
    "transitions": [["u", "a", "v"], ["v", "a", "w"], ["w", "b", "w"]],
    "valuation": {"u": [], "v": ["p"], "w": ["q"]},
    "designated": "u",
})

queries = [
    "<a>p",
    "mu X.(q | <a>X)",        # q is reachable along a
    "nu X.(q & <b>X)",        # an infinite b-path through q
    "mu X.[a]X",              # every a-path is finite
    "nu X.(!p & [a]X)",       # p never holds along a
]
for text in queries:
    f = parse(text)
    states = sorted(m.states[s] for s in eval_set(m, f))
    print(f"{text:28} holds at {states}; at u: {model_check(m, m.designated, f)}")
