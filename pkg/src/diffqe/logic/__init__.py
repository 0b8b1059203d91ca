"""
First-order difference-ring formulas: syntax, parsing, brute-force semantics, translations.
"""

from diffqe.logic.parser import parse, parse_term
from diffqe.logic.prolong import prolong, push_sigma
from diffqe.logic.semantics import eval_formula, realisations, truth_by_degree
from diffqe.logic.syntax import (
    FALSE,
    TRUE,
    Atom,
    Exists,
    Forall,
    Formula,
    Term,
    free_vars,
    from_json,
    quantifier_depth,
    sigma_depth,
    to_json,
    to_text,
)
from diffqe.logic.translate import galois_to_fo, presentation_to_fo

__all__ = [
    "FALSE",
    "TRUE",
    "Atom",
    "Exists",
    "Forall",
    "Formula",
    "Term",
    "eval_formula",
    "free_vars",
    "from_json",
    "galois_to_fo",
    "parse",
    "parse_term",
    "presentation_to_fo",
    "prolong",
    "push_sigma",
    "quantifier_depth",
    "realisations",
    "sigma_depth",
    "to_json",
    "to_text",
    "truth_by_degree",
]
