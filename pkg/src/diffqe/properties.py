"""
Stratification of a morphism by local properties of its fibres.

The morphism is first replaced by the projection from its graph. Each
irreducible component of a piece gets an open certificate locus (Jacobian
minors for smooth and étale maps, an absolute irreducibility certificate for
geometrically integral fibres); the leftover closed locus is smaller and goes
back on the worklist, first at level 0 and then on the correspondence.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from diffqe.algebra.decompose import decompose_variety, hypersurface_certificate
from diffqe.algebra.ideals import Ideal
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.errors import DecompositionIncomplete
from diffqe.pieces import LocallyClosed, Piece, shift
from diffqe.presentations import DirectPresentation, PresentationMorphism

logger = logging.getLogger(__name__)

ETALE = "etale"
SMOOTH = "smooth"
GEOM_INTEGRAL_FIBRES = "geom_integral_fibres"
PROPERTIES = (ETALE, SMOOTH, GEOM_INTEGRAL_FIBRES)

Certificate = Callable[[Ideal], Optional[Ideal]]


@dataclass(frozen=True)
class PropertyStratum:
    """
    One piece of a property stratification.

    Attributes:
        piece: Locally closed piece of the graph's ambient space.
        presentation: The closed sub-presentation cut out by the piece.
        holds: Whether the property is certified on the piece.
    """

    piece: Piece
    presentation: DirectPresentation
    holds: bool

    def to_json(self) -> Dict:
        return {"piece": self.piece.to_json(), "holds": self.holds}


@dataclass
class Stratification:
    """
    Disjoint pieces of the source of ``projection`` covering all realisations.

    Attributes:
        source: The graph presentation on which the pieces live.
        projection: The coordinate projection from ``source`` to the target.
        prop: The certified property.
        strata: The pieces, in discovery order.
    """

    source: DirectPresentation
    projection: PresentationMorphism
    prop: str
    strata: List[PropertyStratum] = field(default_factory=list)

    def holding(self) -> List[PropertyStratum]:
        return [s for s in self.strata if s.holds]

    def to_json(self) -> Dict:
        return {
            "property": self.prop,
            "source": self.source.to_json(),
            "strata": [s.to_json() for s in self.strata],
        }


def _det(rows: Sequence[Sequence], one):
    if not rows:
        return one
    if len(rows) == 1:
        return rows[0][0]
    total = one * 0
    for j, entry in enumerate(rows[0]):
        if not entry:
            continue
        minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
        term = entry * _det(minor, one)
        total = total + term if j % 2 == 0 else total - term
    return total


def jacobian_minors(ideal: Ideal, fibre: Sequence[str], size: int) -> Ideal:
    """The ideal of ``size``-minors of the Jacobian of ``ideal``'s basis in the ``fibre`` variables."""
    ring = ideal.ring
    if size <= 0:
        return Ideal.unit(ring)
    relations = set(ring.relations())
    basis = [g for g in ideal.basis() if g not in relations]
    jacobian = [[g.diff(ring.gen(v)) for v in fibre] for g in basis]
    minors = []
    for rows in combinations(range(len(basis)), size):
        for cols in combinations(range(len(fibre)), size):
            minors.append(_det([[jacobian[r][c] for c in cols] for r in rows], ring.one))
    return Ideal(ring, tuple(minors))


def certificate_locus(component: Ideal, base: Sequence[str], fibre: Sequence[str], prop: str) -> Optional[Ideal]:
    """
    Ideal whose nonvanishing certifies ``prop`` on a prime ``component``, or ``None``.

    Args:
        component: A prime ideal in base and fibre variables.
        base: Coordinates of the target.
        fibre: Coordinates along the fibres.
        prop: One of ``etale``, ``smooth``, ``geom_integral_fibres``.
    """
    ring = component.ring
    if prop == GEOM_INTEGRAL_FIBRES:
        relations = set(ring.relations())
        fibre_set = set(fibre)
        along = [g for g in component.basis() if g not in relations and set(ring.variables_of(g)) & fibre_set]
        if not along:
            return Ideal.unit(ring)
        if len(along) != 1:
            return None
        locus = hypersurface_certificate(Ideal(ring, (along[0],)), base)
        if locus is None:
            return None
        product = ring.one
        for h in locus:
            product *= h
        return Ideal(ring, (product,))
    relative = component.dimension() - component.eliminate(base).dimension()
    if prop == ETALE and relative != 0:
        return None
    return jacobian_minors(component, fibre, len(fibre) - relative)


def carve(
    closed: Ideal, opened: Ideal, certificate: Certificate, guard: Ideal, limits: Limits = DEFAULT_LIMITS
) -> Tuple[List[Tuple[LocallyClosed, bool]], Optional[LocallyClosed]]:
    """
    Split V(closed) ∖ V(opened) into certified pieces and a lower-dimensional remainder.

    Each component gets a piece avoiding the other components; where the
    certificate locus is not generically zero that piece is certified and its
    zeros join the remainder. Pieces and remainder meeting V(guard) only are
    dropped.
    """
    components = decompose_variety(closed, limits)
    parts: List[Tuple[LocallyClosed, bool]] = []
    leftovers: List[Ideal] = []
    for i, P in enumerate(components):
        avoid = opened
        for j, Q in enumerate(components):
            if j != i:
                avoid = avoid.product(Q)
        locus = certificate(P)
        if locus is None or LocallyClosed(P, locus).is_empty():
            part, ok = LocallyClosed(P, avoid), False
        else:
            part, ok = LocallyClosed(P, avoid.product(locus)), True
            if not locus.is_unit():
                leftovers.append(P + locus)
        leftovers.extend(P + Q for Q in components[i + 1 :])
        if not LocallyClosed(part.closed, part.open.product(guard)).is_empty():
            parts.append((part, ok))
    if not leftovers:
        return parts, None
    bad = leftovers[0]
    for ideal in leftovers[1:]:
        bad = bad.product(ideal)
    remainder = LocallyClosed(closed + bad, opened)
    if LocallyClosed(remainder.closed, opened.product(guard)).is_empty():
        return parts, None
    return parts, remainder


def stratify_by_property(
    morphism: PresentationMorphism, prop: str, limits: Limits = DEFAULT_LIMITS
) -> Stratification:
    """
    Partition the source of ``morphism`` into pieces on which ``prop`` is decided.

    Returns:
        A :class:`Stratification` of the graph of ``morphism``; ``holds`` marks
        the pieces where the property is certified at both levels.

    Raises:
        ValueError: If ``prop`` is not supported.
        DecompositionIncomplete: If a component cannot be certified prime or
            the devissage does not terminate.

    Example:
        >>> A1 = DirectPresentation.from_json({"field": "F5", "n": 1, "I0": ["0"], "I1": ["0"]})
        >>> square = PresentationMorphism.from_texts(A1, A1, ["x0^2"])
        >>> [s.holds for s in stratify_by_property(square, "etale").strata]
        [True, True]
    """
    if prop not in PROPERTIES:
        raise ValueError(f"Unsupported property: {prop}")
    graph, projection = morphism.as_projection()
    X = graph.as_direct()
    target = projection.target
    base0 = target.variables
    fibre0 = tuple(v for v in X.variables if v not in base0)
    base1 = base0 + target.shifted
    fibre1 = fibre0 + tuple(X.shift_map()[v] for v in fibre0)
    ring0, ring_xy = X.ring0, X.ring_xy
    closure1 = X.closure1().in_ring(ring_xy)

    def level0(P):
        return certificate_locus(P, base0, fibre0, prop)

    def level1(P):
        return certificate_locus(P, base1, fibre1, prop)

    result = Stratification(X, PresentationMorphism.projection(X, target), prop)
    worklist: List[Tuple[Piece, Optional[bool]]] = [(X.whole_piece(), None)]
    bound = 4 * (len(X.variables) + 1) ** 2 + 16
    steps = 0
    while worklist:
        steps += 1
        if steps > bound * 8:
            raise DecompositionIncomplete(
                f"Stratification by {prop} did not terminate", stage="properties.stratify_by_property"
            )
        piece, holds0 = worklist.pop(0)
        if holds0 is None:
            closed = X.I0 + piece.level0.closed
            unit = Ideal.unit(ring0)
            parts, rest = carve(closed, piece.level0.open, level0, unit, limits)
            for part, ok in parts:
                worklist.append((Piece(part, piece.level1), ok))
            if rest is not None:
                worklist.append((Piece(rest, piece.level1), None))
            continue
        opened = piece.level0.open
        guard = Ideal(ring_xy, tuple(ring_xy.convert(h) * shift(h, ring0, ring_xy, X.shift_map()) for h in opened.gens))
        closed = closure1 + piece.closure1()
        parts, rest = carve(closed, piece.level1.open, level1, guard, limits)
        for part, ok in parts:
            stratum = Piece(piece.level0, part)
            result.strata.append(PropertyStratum(stratum, X.restrict(stratum), holds0 and ok))
        if rest is not None:
            worklist.append((Piece(piece.level0, rest), holds0))
    logger.info("Stratified %s by %s into %d pieces", morphism.source.name or "source", prop, len(result.strata))
    return result
