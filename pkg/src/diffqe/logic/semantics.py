"""
Brute-force evaluation of formulas over Frobenius difference fields.

Free variables range over F_{q^m}; quantified variables range over the
extension of degree ``witness_degree``, where σ is still x -> x^q. Every
quantifier adds a numpy axis, so a formula is evaluated for all assignments
of its free variables at once.
"""

import logging
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence

import numpy as np

from diffqe.algebra.fields import GENERATOR
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.errors import BudgetExceeded, UnsupportedField, VariableMismatch
from diffqe.logic.syntax import (
    Add,
    And,
    Atom,
    Const,
    Exists,
    Forall,
    Formula,
    Implies,
    Mul,
    Neg,
    Not,
    Or,
    Pow,
    Sigma,
    Sub,
    Term,
    Truth,
    Var,
    free_vars,
    quantifier_depth,
)
from diffqe.points import DiffField, Point

logger = logging.getLogger(__name__)


class _Context:
    """The field of quantified variables and helpers to evaluate in it."""

    def __init__(self, field: DiffField, limits: Limits):
        self.field = field
        self.gf = field.gf
        self.limits = limits
        self._elements = None

    @property
    def elements(self):
        if self._elements is None:
            self._elements = self.field.elements()
        return self._elements

    def constant(self, value: Fraction):
        p = self.gf.characteristic
        if value.denominator % p == 0:
            raise UnsupportedField(f"Constant {value} has a pole at p={p}")
        return self.gf(value.numerator % p) / self.gf(value.denominator % p)

    def lookup(self, name: str, env: Mapping[str, object]):
        if name in env:
            return env[name]
        if name == GENERATOR and self.field.field.kind == "Fq":
            return self.gf(self.field.generator_value)
        raise VariableMismatch(f"No value for free variable {name}")


def _term(term: Term, env: Mapping[str, object], ctx: _Context):
    if isinstance(term, Var):
        return ctx.lookup(term.name, env)
    if isinstance(term, Const):
        return ctx.constant(term.value)
    if isinstance(term, Sigma):
        return ctx.field.frobenius(_term(term.arg, env, ctx), term.power)
    if isinstance(term, Neg):
        return -_term(term.arg, env, ctx)
    if isinstance(term, Pow):
        return _term(term.base, env, ctx) ** term.exponent
    left, right = _term(term.left, env, ctx), _term(term.right, env, ctx)
    if isinstance(term, Add):
        return left + right
    if isinstance(term, Sub):
        return left - right
    if isinstance(term, Mul):
        return left * right
    raise TypeError(f"Not a term: {term!r}")


def _formula(formula: Formula, env: Dict[str, object], rank: int, ctx: _Context) -> np.ndarray:
    """Truth values over the current assignment axes, broadcastable to ``rank`` dimensions."""
    if isinstance(formula, Truth):
        return np.asarray(formula.value)
    if isinstance(formula, Atom):
        left, right = _term(formula.left, env, ctx), _term(formula.right, env, ctx)
        return np.asarray(left == right)
    if isinstance(formula, Not):
        return ~_formula(formula.arg, env, rank, ctx)
    if isinstance(formula, And):
        left = _formula(formula.left, env, rank, ctx)
        return left & _formula(formula.right, env, rank, ctx)
    if isinstance(formula, Or):
        left = _formula(formula.left, env, rank, ctx)
        return left | _formula(formula.right, env, rank, ctx)
    if isinstance(formula, Implies):
        left = _formula(formula.left, env, rank, ctx)
        return ~left | _formula(formula.right, env, rank, ctx)
    if isinstance(formula, (Exists, Forall)):
        inner = {name: _expand(value, rank) for name, value in env.items()}
        inner[formula.var] = ctx.elements.reshape((1,) * rank + (-1,))
        body = _formula(formula.body, inner, rank + 1, ctx)
        if body.ndim < rank + 1:
            return body
        return body.any(axis=-1) if isinstance(formula, Exists) else body.all(axis=-1)
    raise TypeError(f"Not a formula: {formula!r}")


def _expand(value, rank: int):
    """Append a trailing axis to an assignment array of ``rank`` dimensions."""
    array = value.reshape(np.shape(value) + (1,) * (rank - np.ndim(value)))
    return array[..., np.newaxis]


def _check_budget(formula: Formula, rows: int, field: DiffField, limits: Limits):
    work = rows * field.order ** quantifier_depth(formula)
    if work > limits.budget:
        raise BudgetExceeded(
            f"Evaluating over {field} needs {work} assignments, over the budget of {limits.budget}",
            stage="logic.eval_formula",
        )


def eval_formula(
    formula: Formula,
    assignment: Mapping[str, object],
    K: DiffField,
    limits: Limits = DEFAULT_LIMITS,
    witness_degree: int = 1,
) -> bool:
    """
    Truth of ``formula`` at an assignment of its free variables in K.

    Args:
        assignment: Free variable -> integer encoding (or element text) in K.
        witness_degree: Quantifiers range over the extension of K of this degree.

    Raises:
        VariableMismatch: If a free variable has no value.
        BudgetExceeded: If the quantifier expansion exceeds ``limits.budget``.

    Example:
        >>> F7 = DiffField.from_q(Field.rationals(), 7)
        >>> eval_formula(parse("E z. z*z = 2"), {}, F7)
        True
    """
    missing = sorted(v for v in free_vars(formula) - set(assignment) if v != GENERATOR)
    if missing:
        raise VariableMismatch(f"No value for free variables {missing}")
    big = K.extension(witness_degree) if witness_degree > 1 else K
    _check_budget(formula, 1, big, limits)
    table = K.embedding(big) if witness_degree > 1 else None
    env = {}
    for name, value in assignment.items():
        code = K.parse(value) if isinstance(value, str) else int(value)
        env[name] = big.gf(int(table[code]) if table is not None else code)
    result = _formula(formula, env, 0, _Context(big, limits))
    return bool(np.all(result))


def realisations(
    formula: Formula,
    variables: Sequence[str],
    K: DiffField,
    limits: Limits = DEFAULT_LIMITS,
    witness_degree: int = 1,
) -> List[Point]:
    """
    All tuples over K, in the order of ``variables``, satisfying ``formula``.

    Raises:
        VariableMismatch: If a free variable of ``formula`` is not listed.
        BudgetExceeded: If the scan exceeds ``limits.budget``.
    """
    unlisted = sorted(v for v in free_vars(formula) - set(variables) if v != GENERATOR)
    if unlisted:
        raise VariableMismatch(f"Free variables {unlisted} are not among {list(variables)}")
    big = K.extension(witness_degree) if witness_degree > 1 else K
    rows = K.order ** len(variables)
    _check_budget(formula, rows, big, limits)
    if variables:
        grids = np.meshgrid(*[np.arange(K.order, dtype=np.int64)] * len(variables), indexing="ij")
        columns = [g.ravel() for g in grids]
    else:
        columns = []
    table = K.embedding(big) if witness_degree > 1 else None
    env = {}
    for name, column in zip(variables, columns):
        env[name] = big.gf(table[column] if table is not None else column)
    result = _formula(formula, env, 1 if variables else 0, _Context(big, limits))
    if not variables:
        return [()] if bool(np.all(result)) else []
    mask = np.broadcast_to(result, (rows,))
    return [tuple(int(c[i]) for c in columns) for i in np.flatnonzero(mask)]


def truth_by_degree(
    formula: Formula,
    assignment: Mapping[str, object],
    K: DiffField,
    degrees: Iterable[int],
    limits: Limits = DEFAULT_LIMITS,
) -> Dict[int, bool]:
    """Truth values of ``formula`` with quantifier witnesses in each extension degree."""
    values = {}
    for d in degrees:
        values[d] = eval_formula(formula, assignment, K, limits, witness_degree=d)
    logger.debug("Truth by witness degree over %s: %s", K, values)
    return values
