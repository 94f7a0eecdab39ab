import random

from hypothesis import strategies as st

from mumod.formula import normalize
from mumod.oracle import random_formula

AGENTS = ("a", "b")
PROPS = ("p", "q")


@st.composite
def formulas(draw, max_size=12, agents=AGENTS, props=PROPS, recursion=True, mu=True):
    """Closed normalised formulas built by the seeded corpus generator."""
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, max_size))
    f = random_formula(random.Random(seed), n, agents, props, recursion=recursion, mu=mu)
    return normalize(f)
