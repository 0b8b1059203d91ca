"""
Quantifier elimination to Galois stratifications.

A formula is first prolonged to σ-depth at most one, then eliminated by
induction on its structure over difference affine space in its free variables:
atoms become indicator stratifications, connectives become Boolean
combinations, and each existential quantifier becomes a direct image along the
projection forgetting its variable. Universal quantifiers are eliminated as
negated existentials.
"""

import logging
from typing import Dict, Mapping, Optional, Sequence, Tuple

from diffqe.algebra.fields import GENERATOR, Field
from diffqe.algebra.ideals import Ideal
from diffqe.algebra.polys import Ring
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.errors import (
    DecompositionIncomplete,
    OutOfFragment,
    PresentationInsufficient,
    UnsupportedCase,
)
from diffqe.logic.prolong import Prolongation, prolong
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
    substitute_term,
    to_text,
)
from diffqe.pieces import LocallyClosed, Piece
from diffqe.presentations import DirectPresentation, PresentationMorphism
from diffqe.qe.direct_image import COMPOSITE, DirectImageTask, direct_image
from diffqe.stratifications import AND, NOT, OR, GaloisStratification, boolean_combine, bottom, indicator, top

logger = logging.getLogger(__name__)


def shifted_names(variables: Sequence[str]) -> Tuple[str, ...]:
    """``v_s`` for each variable, lengthened until it clashes with no variable."""
    taken = set(variables)
    names = []
    for v in variables:
        name = f"{v}_s"
        while name in taken:
            name += "_"
        taken.add(name)
        names.append(name)
    return tuple(names)


def affine_space(field: Field, variables: Sequence[str]) -> DirectPresentation:
    """Difference affine space in the given coordinates."""
    variables = tuple(variables)
    return DirectPresentation.free(field, variables, shifted_names(variables))


def term_to_poly(term: Term, ring: Ring, shift_map: Mapping[str, str]):
    """
    The polynomial of a term of σ-depth at most one with σ on variables.

    ``s(v)`` becomes the shifted coordinate of v; the field generator is a constant.

    Raises:
        OutOfFragment: If σ is applied twice or to a non-variable.
    """
    if isinstance(term, Var):
        return ring.gen(term.name)
    if isinstance(term, Const):
        value = term.value
        if value.denominator == 1:
            return ring.one * value.numerator
        return ring.parse(f"{value.numerator}/{value.denominator}")
    if isinstance(term, Sigma):
        if not isinstance(term.arg, Var) or term.power != 1:
            raise OutOfFragment("σ must be applied once to a variable", to_text(Atom(term, Const(0))))
        if term.arg.name == GENERATOR and ring.field.kind == "Fq":
            return ring.gen(GENERATOR)
        return ring.gen(shift_map[term.arg.name])
    if isinstance(term, Neg):
        return -term_to_poly(term.arg, ring, shift_map)
    if isinstance(term, Pow):
        return term_to_poly(term.base, ring, shift_map) ** term.exponent
    left, right = term_to_poly(term.left, ring, shift_map), term_to_poly(term.right, ring, shift_map)
    if isinstance(term, Add):
        return left + right
    if isinstance(term, Sub):
        return left - right
    if isinstance(term, Mul):
        return left * right
    raise TypeError(f"Not a term: {term!r}")


def atom_piece(atom: Atom, X: DirectPresentation) -> Piece:
    """The closed piece where an equation holds, at level 0 when it involves no σ."""
    ring_xy = X.ring_xy
    f = term_to_poly(atom.left, ring_xy, X.shift_map()) - term_to_poly(atom.right, ring_xy, X.shift_map())
    whole = Piece.whole(X.ring0, ring_xy)
    shifted = {ring_xy.index(s) for s in X.shifted}
    if not any(monom[i] for monom in f.monoms() for i in shifted):
        closed = Ideal(X.ring0, (X.ring0.convert(f),))
        return Piece(LocallyClosed.closed_set(closed), whole.level1)
    return Piece(whole.level0, LocallyClosed.closed_set(Ideal(ring_xy, (f,))))


def _rename_bound(formula: Formula, old: str, new: str) -> Formula:
    """Rename free occurrences of ``old``."""
    if isinstance(formula, Truth):
        return formula
    if isinstance(formula, Atom):
        mapping = {old: Var(new)}
        return Atom(substitute_term(formula.left, mapping), substitute_term(formula.right, mapping))
    if isinstance(formula, Not):
        return Not(_rename_bound(formula.arg, old, new))
    if isinstance(formula, (Exists, Forall)):
        if formula.var == old:
            return formula
        return type(formula)(formula.var, _rename_bound(formula.body, old, new))
    return type(formula)(_rename_bound(formula.left, old, new), _rename_bound(formula.right, old, new))


class Eliminator:
    """
    Structural elimination of a prolonged formula.

    Attributes:
        field: Base field of every ambient space.
        limits: Configured bounds.
        case: Direct image case used for existential steps.
        steps: Number of existential eliminations performed.
    """

    def __init__(self, field: Field, limits: Limits = DEFAULT_LIMITS, case: str = COMPOSITE):
        self.field = field
        self.limits = limits
        self.case = case
        self.steps = 0
        self._spaces: Dict[Tuple[str, ...], DirectPresentation] = {}

    def space(self, variables: Sequence[str]) -> DirectPresentation:
        key = tuple(variables)
        if key not in self._spaces:
            self._spaces[key] = affine_space(self.field, key)
        return self._spaces[key]

    def eliminate(self, formula: Formula, X: DirectPresentation) -> GaloisStratification:
        if isinstance(formula, Truth):
            return top(X) if formula.value else bottom(X)
        if isinstance(formula, Atom):
            return indicator(X, atom_piece(formula, X))
        if isinstance(formula, Not):
            return boolean_combine(self.eliminate(formula.arg, X), None, NOT)
        if isinstance(formula, And):
            return boolean_combine(self.eliminate(formula.left, X), self.eliminate(formula.right, X), AND)
        if isinstance(formula, Or):
            return boolean_combine(self.eliminate(formula.left, X), self.eliminate(formula.right, X), OR)
        if isinstance(formula, Implies):
            return self.eliminate(Or(Not(formula.left), formula.right), X)
        if isinstance(formula, Forall):
            return self.eliminate(Not(Exists(formula.var, Not(formula.body))), X)
        if isinstance(formula, Exists):
            return self._exists(formula, X)
        raise TypeError(f"Not a formula: {formula!r}")

    def _exists(self, formula: Exists, X: DirectPresentation) -> GaloisStratification:
        var, body = formula.var, formula.body
        taken = X.variables + X.shifted
        if var in taken:
            fresh = f"{var}_"
            while fresh in taken:
                fresh += "_"
            body, var = _rename_bound(body, var, fresh), fresh
        inner = self.space(X.variables + (var,))
        A = self.eliminate(body, inner)
        task = DirectImageTask(PresentationMorphism.projection(inner, X), A, self.case, name=f"E {var}")
        try:
            result = direct_image(task, self.limits)
        except (UnsupportedCase, DecompositionIncomplete, PresentationInsufficient) as exc:
            raise OutOfFragment(
                f"Cannot eliminate {var} at stage {exc.stage}: {exc.detail}", to_text(formula), stage="qe.quantifier_eliminate"
            ) from exc
        self.steps += 1
        logger.info("Eliminated %s: %d strata, devissage depth %d", var, len(result.strata), task.depth)
        return result


def quantifier_eliminate(
    formula: Formula,
    field: Field,
    variables: Optional[Sequence[str]] = None,
    limits: Limits = DEFAULT_LIMITS,
    case: str = COMPOSITE,
) -> GaloisStratification:
    """
    A Galois stratification whose evaluation matches the realisations of ``formula``.

    The ambient space has the free variables first, followed by the
    prolongation variables of any free variable under σ^k with k >= 2; the
    realisations of the formula are the projections onto the first coordinates.

    Raises:
        OutOfFragment: If an elimination step leaves the supported direct image class.

    Example:
        >>> A = quantifier_eliminate(parse("E z. z*z - v1 = 0 & s(z) - z = 0"), Field.rationals())
        >>> evaluate(A, DiffField.from_q(Field.rationals(), 7)).points
        [(0,), (1,), (2,), (4,)]
    """
    constants = (GENERATOR,) if field.kind == "Fq" else ()
    prolonged = prolong(formula, variables, constants)
    return eliminate_prolonged(prolonged, field, limits, case)


def eliminate_prolonged(
    prolonged: Prolongation, field: Field, limits: Limits = DEFAULT_LIMITS, case: str = COMPOSITE
) -> GaloisStratification:
    eliminator = Eliminator(field, limits, case)
    X = eliminator.space(prolonged.ambient)
    result = eliminator.eliminate(prolonged.formula, X)
    logger.info("Quantifier elimination finished after %d existential steps", eliminator.steps)
    return result
