"""
Translations of presentations and Galois stratifications into formulas.

A polynomial becomes the atom ``f = 0`` with shifted coordinates written as
``s(x)``. A stratum of a Galois stratification becomes an existential formula
over the cover coordinates asking for a lift whose local Frobenius lies in the
stratum's domain.
"""

from fractions import Fraction
from typing import Dict, List, Mapping, Sequence

from diffqe.algebra.fields import Field
from diffqe.algebra.polys import Ring, format_coefficient
from diffqe.logic.syntax import (
    FALSE,
    TRUE,
    ZERO,
    Add,
    Atom,
    Const,
    Formula,
    Mul,
    Neg,
    Not,
    Pow,
    Sub,
    Term,
    Var,
    conjunction,
    disjunction,
    exists,
    sigma,
)
from diffqe.pieces import LocallyClosed, Piece
from diffqe.presentations import DirectPresentation, fresh_names
from diffqe.stratifications import GaloisStratification, GaloisStratum


def _coefficient(c, field: Field):
    negative, magnitude = format_coefficient(c, field)
    return negative, Fraction(magnitude)


def poly_to_term(f, ring: Ring, mapping: Mapping[str, Term]) -> Term:
    """
    The term of a polynomial, with ring symbols replaced via ``mapping``.

    Symbols missing from ``mapping`` (such as the field generator) stay variables.
    """
    if not f:
        return ZERO
    names = [str(s) for s in f.ring.symbols]
    result = None
    for monom, coeff in f.terms(order="grlex"):
        negative, magnitude = _coefficient(coeff, ring.field)
        factors: List[Term] = []
        for name, exp in zip(names, monom):
            if not exp:
                continue
            base = mapping.get(name, Var(name))
            factors.append(base if exp == 1 else Pow(base, exp))
        if magnitude != 1 or not factors:
            factors.insert(0, Const(magnitude))
        monomial = factors[0]
        for factor in factors[1:]:
            monomial = Mul(monomial, factor)
        if result is None:
            result = Neg(monomial) if negative else monomial
        else:
            result = Sub(result, monomial) if negative else Add(result, monomial)
    return result


def poly_atom(f, ring: Ring, mapping: Mapping[str, Term]) -> Atom:
    return Atom(poly_to_term(f, ring, mapping), ZERO)


def level_mapping(variables: Sequence[str], shifted: Sequence[str]) -> Dict[str, Term]:
    """Coordinates x_i to themselves and their shifted names to s(x_i)."""
    mapping: Dict[str, Term] = {v: Var(v) for v in variables}
    mapping.update({s: sigma(Var(v)) for v, s in zip(variables, shifted)})
    return mapping


def _relations(ring: Ring) -> set:
    return set(ring.relations())


def _ideal_atoms(ideal, mapping: Mapping[str, Term]) -> List[Formula]:
    skip = _relations(ideal.ring)
    return [poly_atom(g, ideal.ring, mapping) for g in ideal.gens if g and g not in skip]


def locally_closed_to_fo(part: LocallyClosed, mapping: Mapping[str, Term]) -> Formula:
    """``closed = 0`` and not all of ``open`` vanish."""
    closed = _ideal_atoms(part.closed, mapping)
    if part.open.is_unit():
        return conjunction(closed)
    return conjunction(closed + [Not(conjunction(_ideal_atoms(part.open, mapping)))])


def piece_to_fo(piece: Piece, mapping: Mapping[str, Term]) -> Formula:
    parts = []
    for level in (piece.level0, piece.level1):
        if not level.is_whole():
            parts.append(locally_closed_to_fo(level, mapping))
    return conjunction(parts)


def presentation_to_fo(P: DirectPresentation) -> Formula:
    """
    The positive quantifier-free formula of P's realisations in its variables.

    Extra coordinates of an almost-direct presentation are quantified
    existentially.

    Example:
        >>> P = DirectPresentation.from_json({"field": "Q", "n": 1, "I0": ["0"], "I1": ["y0 - x0^2"]})
        >>> to_text(presentation_to_fo(P))
        '-x0^2 + s(x0) = 0'
    """
    mapping = level_mapping(P.variables, P.shifted)
    mapping.update({e: Var(e) for e in P.extra})
    body = conjunction(_ideal_atoms(P.I0, mapping) + _ideal_atoms(P.I1, mapping))
    return exists(P.extra, body)


def _cover_names(stratum: GaloisStratum, taken: Sequence[str]) -> Dict[str, str]:
    D = stratum.cover
    names = list(D.fibre) + list(D.fibre_shifted)
    renamed = {}
    used = list(taken)
    for name in names:
        fresh = name if name not in used else fresh_names(f"{name}_", 1, used)[0]
        renamed[name] = fresh
        used.append(fresh)
    return renamed


def stratum_cover_to_fo(stratum: GaloisStratum, taken: Sequence[str] = ()) -> Formula:
    """
    The local Frobenius condition of one stratum at the ambient coordinates.

    E z. E w. (x, z, s(x), w) in Z1 and P_g(s(x), w) = s(z) for some g in the domain,
    with P_g the twisted action of g on the shifted copy.
    """
    if stratum.is_empty_domain:
        return FALSE
    D = stratum.cover
    if stratum.is_full:
        return TRUE
    Z = D.cover
    base = D.base
    names = _cover_names(stratum, tuple(taken) + base.variables)
    mapping = level_mapping(base.variables, base.shifted)
    mapping.update({v: Var(names[v]) for v in D.fibre + D.fibre_shifted})
    level1 = D.level1_ideal()
    lift = _ideal_atoms(level1, mapping)
    on_shift: Dict[str, Term] = {v: sigma(Var(v)) for v in base.variables}
    on_shift.update({v: Var(names[w]) for v, w in zip(D.fibre, D.fibre_shifted)})
    choices = []
    for g in sorted(stratum.domain.elements):
        equations = []
        for f, v in zip(D.action0[g], D.fibre):
            twisted = Z.ring0.twist(f, 1)
            equations.append(Atom(poly_to_term(twisted, Z.ring0, on_shift), sigma(Var(names[v]))))
        choices.append(conjunction(equations))
    bound = [names[v] for v in D.fibre + D.fibre_shifted]
    return exists(bound, conjunction(lift + [disjunction(choices)]))


def galois_to_fo(A: GaloisStratification) -> Formula:
    """
    A first-order formula with the same realisations as ``evaluate(A)``.

    Each stratum contributes membership in its piece, avoidance of earlier
    pieces, and its local Frobenius condition; quantifier witnesses must be
    allowed in extensions containing the cover's lifts.

    Example:
        >>> to_text(galois_to_fo(bottom(X)))
        'false'
    """
    X = A.ambient
    mapping = level_mapping(X.variables, X.shifted)
    disjuncts = []
    earlier: List[Formula] = []
    for stratum in A.strata:
        member = piece_to_fo(stratum.piece, mapping)
        condition = stratum_cover_to_fo(stratum, X.variables + X.extra)
        if condition != FALSE:
            disjuncts.append(conjunction([member] + [Not(e) for e in earlier] + [condition]))
        earlier.append(member)
    body = disjunction(disjuncts)
    realised = presentation_to_fo(X)
    if realised == TRUE:
        return body
    return conjunction([realised, body]) if body != FALSE else FALSE
