"""Translate logic-puzzle clues into ASP with a lambda-ASP calculus and solve them."""

__version__ = "0.1.0"

from .terms import (  # noqa: E402
    App, Atom, Cmp, Conj, Const, Lam, Offset, Rule, Term, Var, alpha_eq,
    apply, infer_type, normalize, parse_term, to_text,
)
from .inverse import inverse_l, inverse_r  # noqa: E402
from .asp import PuzzleDomain, parse_program, parse_rule, serialize, serialize_rule  # noqa: E402
from .ccg import LexicalEntry, Lexicon, best_parse, parse_all  # noqa: E402
from .solver import brute_force, solve  # noqa: E402
