"""Multi-agent modal logics with fixed points.

Parsing and normalisation of formulas, Kripke models and frame closures,
satisfiability-preserving translations, a prefixed tableau and a
bounded-search oracle.
"""

from .formula import FF, TT, Formula, negate, size, tree_size
from .kripke import KripkeModel, check_logic, close_for_logic, close_frame, eval_set, model_check
from .logic import FrameCondition, LogicSpec
from .oracle import BudgetExhausted, NoModelUpTo, SearchBudget, Witness, bounded_sat, generate_corpus
from .syntax import FormulaSyntaxError, parse, render
from .tableau import Sat, TableauBounds, Unknown, Unsat, check_proof, run_tableau
from .transfer import plan
from .translations import TRANSLATION_NAMES, TranslationError, translate

__all__ = [
    "FF", "TT", "Formula", "negate", "size", "tree_size",
    "KripkeModel", "check_logic", "close_for_logic", "close_frame", "eval_set", "model_check",
    "FrameCondition", "LogicSpec",
    "BudgetExhausted", "NoModelUpTo", "SearchBudget", "Witness", "bounded_sat", "generate_corpus",
    "FormulaSyntaxError", "parse", "render",
    "Sat", "TableauBounds", "Unknown", "Unsat", "check_proof", "run_tableau",
    "plan",
    "TRANSLATION_NAMES", "TranslationError", "translate",
]
__version__ = "0.1.0"
