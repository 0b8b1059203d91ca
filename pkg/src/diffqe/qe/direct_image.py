"""
Direct images of Galois stratifications along morphisms of presentations.

Two cases are computed directly: finite étale projections, through the
Galois closure of the finite part, and projections whose fibres are
geometrically integral, through the pushforward of covers. A general
projection is split by its Stein factorisation into a fibration followed by a
finite part; loci where a generic argument fails are excised and handled
again on smaller presentations.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from diffqe.algebra.closure import relative_algebraic_closure
from diffqe.algebra.ideals import Ideal
from diffqe.algebra.polys import Ring
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.covers.constructions import closure_of, fibre_polynomial, function_field_tower, pushforward_cover
from diffqe.covers.galois_cover import GaloisCoverDesc, to_direct_cover
from diffqe.covers.groups import TwistedConjugacyDomain, is_twisted_closed, permutation_of
from diffqe.errors import DecompositionIncomplete, UnsupportedCase, VariableMismatch
from diffqe.pieces import LocallyClosed, Piece, shift
from diffqe.points import DiffField, Point
from diffqe.presentations import (
    DirectPresentation,
    PresentationMorphism,
    direct_decompose,
    fresh_names,
    realisation_piece,
)
from diffqe.stratifications import (
    OR,
    GaloisStratification,
    GaloisStratum,
    boolean_combine,
    bottom,
    evaluate,
)

logger = logging.getLogger(__name__)

FINITE_ETALE = "finite_etale"
FIBRATION = "fibration"
COMPOSITE = "composite"
CASES = (FINITE_ETALE, FIBRATION, COMPOSITE)


@dataclass
class DirectImageTask:
    """
    A morphism together with a stratification of its source.

    Attributes:
        morphism: f: X -> Y.
        stratification: Galois stratification on X.
        case: ``finite_etale``, ``fibration`` or ``composite``.
        name: Optional label.
        depth: Deepest devissage level reached by the last run.
    """

    morphism: PresentationMorphism
    stratification: GaloisStratification
    case: str = COMPOSITE
    name: str = ""
    depth: int = 0

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"Unknown direct image case: {self.case}")
        if self.stratification.ambient.variables != self.morphism.source.variables:
            raise VariableMismatch("The stratification must live on the source of the morphism")

    def to_json(self) -> Dict:
        return {
            "morphism": self.morphism.to_json(),
            "case": self.case,
            "stratification": self.stratification.to_json(),
        }


@dataclass
class SteinFactorization:
    """
    f = h ∘ g with g a fibration with geometrically connected fibres and h finite.

    Attributes:
        source: The graph presentation of f.
        middle: Ỹ, the image of the source in the target and algebraic fibre coordinates.
        target: Y.
        first: The projection g: source -> middle.
        second: The projection h: middle -> target.
        algebraic: Fibre coordinates spanning the relative algebraic closure.
    """

    source: DirectPresentation
    middle: DirectPresentation
    target: DirectPresentation
    first: PresentationMorphism
    second: PresentationMorphism
    algebraic: Tuple[str, ...] = ()

    @property
    def fibre(self) -> Tuple[str, ...]:
        return tuple(v for v in self.source.variables if v not in self.target.variables)

    @property
    def is_finite(self) -> bool:
        return set(self.algebraic) == set(self.fibre)

    @property
    def is_fibration(self) -> bool:
        return not self.algebraic


@dataclass
class _Devissage:
    bound: int
    depth: int = 0
    steps: int = 0

    def enter(self, level: int):
        self.depth = max(self.depth, level)
        self.steps += 1
        if level > self.bound:
            raise DecompositionIncomplete(
                f"Devissage exceeded depth {self.bound}", stage="qe.direct_image"
            )


def _sub_presentation(P: DirectPresentation, keep: Sequence[str]) -> DirectPresentation:
    """The closure of the projection of P onto the coordinates ``keep``."""
    P = P.as_direct()
    keep = tuple(v for v in P.variables if v in keep)
    shifted = tuple(P.shift_map()[v] for v in keep)
    Q = DirectPresentation.free(P.field, keep, shifted)
    I0 = Ideal(Q.ring0, P.I0.eliminate(keep).gens)
    I1 = Ideal(Q.ring1, P.closure1().eliminate(keep + shifted).gens)
    return Q.with_ideals(I0, I1)


def stein_factorize(morphism: PresentationMorphism, limits: Limits = DEFAULT_LIMITS) -> SteinFactorization:
    """
    Split the graph projection of ``morphism`` through the relative algebraic closure.

    The fibre coordinates algebraic over the image form the finite part;
    the rest form a fibration with geometrically connected generic fibre.

    Raises:
        PresentationInsufficient: If the relative algebraic closure cannot be certified.
        UnsupportedCase: If the function field of the source has no tower presentation.
    """
    graph, projection = morphism.as_projection()
    W = graph.as_direct()
    Y = projection.target
    fibre = tuple(v for v in W.variables if v not in Y.variables)
    if not fibre or W.I0.is_unit():
        return SteinFactorization(W, W, Y, PresentationMorphism.identity(W), projection, fibre)
    image = W.I0.eliminate(Y.variables)
    parameters = image.independent_set()
    tower = function_field_tower(W.I0, parameters, stage="qe.stein_factorize")
    closure = relative_algebraic_closure(tower, limits)
    algebraic = tuple(v for v in fibre if v in closure.generators)
    middle = _sub_presentation(W, Y.variables + algebraic)
    logger.debug("Stein factorisation of %s: algebraic part %s", W, algebraic)
    return SteinFactorization(
        W,
        middle,
        Y,
        PresentationMorphism.projection(W, middle),
        PresentationMorphism.projection(middle, Y),
        algebraic,
    )


def _single(Y: DirectPresentation, piece: Piece, cover: GaloisCoverDesc, domain) -> GaloisStratification:
    """⟨piece, cover, domain⟩ and ⊥ on the complement."""
    strata = [GaloisStratum(piece, cover, TwistedConjugacyDomain(frozenset(domain)))]
    trivial = GaloisCoverDesc.trivial(Y)
    for part in piece.complement():
        strata.append(GaloisStratum(part, trivial, TwistedConjugacyDomain(frozenset())))
    return GaloisStratification(Y, strata)


def _is_bottom(A: GaloisStratification) -> bool:
    return all(s.is_empty_domain for s in A.strata)


def _union(parts: Sequence[GaloisStratification], Y: DirectPresentation) -> GaloisStratification:
    result: Optional[GaloisStratification] = None
    for part in parts:
        if _is_bottom(part):
            continue
        result = part if result is None else boolean_combine(result, part, OR)
    return result if result is not None else bottom(Y)


def _rebase(D: GaloisCoverDesc, W: DirectPresentation) -> GaloisCoverDesc:
    """The cover restricted over the closed sub-presentation W of its base."""
    if D.is_trivial:
        return GaloisCoverDesc.trivial(W)
    Z = D.cover
    I0 = Z.I0 + W.I0.in_ring(Z.ring0)
    I1 = Z.I1.with_gens(Z.ring1.convert(g) for g in W.as_direct().closure1().gens)
    return GaloisCoverDesc(
        W,
        Z.with_ideals(I0, I1),
        D.G0,
        D.G1,
        dict(D.action0),
        dict(D.action1),
        dict(D.hom_pi1),
        dict(D.hom_sigma),
        name=D.name,
    )


def _in_ring(piece: Piece, P: DirectPresentation) -> Piece:
    return Piece(
        LocallyClosed(piece.level0.closed.in_ring(P.ring0), piece.level0.open.in_ring(P.ring0)),
        LocallyClosed(piece.level1.closed.in_ring(P.ring_xy), piece.level1.open.in_ring(P.ring_xy)),
    )


def _opens_only(piece: Piece) -> Piece:
    return Piece(
        LocallyClosed(Ideal.zero(piece.level0.ring), piece.level0.open),
        LocallyClosed(Ideal.zero(piece.level1.ring), piece.level1.open),
    )


def _restrict_over(W: DirectPresentation, locus0: Optional[Ideal], locus1: Optional[Ideal]) -> DirectPresentation:
    """W restricted over closed loci of the target given at level 0 and level 1."""
    I0, I1 = W.I0, W.I1
    if locus0 is not None:
        I0 = I0.with_gens(W.ring0.convert(g) for g in locus0.gens)
    if locus1 is not None:
        I1 = I1.with_gens(W.ring1.convert(g) for g in locus1.gens)
    return W.with_ideals(I0, I1)


def _image_piece(W: DirectPresentation, Y: DirectPresentation, open0: Ideal, open1: Ideal) -> Piece:
    image = _sub_presentation(W, Y.variables)
    return Piece(
        LocallyClosed(image.I0.in_ring(Y.ring0), open0.in_ring(Y.ring0)),
        LocallyClosed(image.I1.in_ring(Y.ring_xy), open1.in_ring(Y.ring_xy)),
    )


def _validity(closure, W: DirectPresentation, opens: Piece) -> Tuple[set, List[Ideal]]:
    """
    Root pairs (i, j) along which W1 holds generically on the closure correspondence,
    and the closed subsets of the correspondence where the generic answer may fail.
    """
    D = closure.cover
    Q = D.level1_ideal()
    ring = Q.ring
    conditions = [g for g in W.closure1().gens if g]
    open0 = [g for g in opens.level0.open.gens]
    open1 = [g for g in opens.level1.open.gens]
    valid = set()
    bad: List[Ideal] = []
    for i in range(closure.degree):
        for j in range(closure.degree):
            images = closure.root_images(i, j)
            closed = [ring.substitute(g, images) for g in conditions]
            if not all(Q.contains(g) for g in closed):
                bad.append(Q.with_gens(closed))
                continue
            at0 = [ring.substitute(g, images) for g in open0]
            at1 = [ring.substitute(g, images) for g in open1]
            if all(Q.contains(h) for h in at0) or all(Q.contains(h) for h in at1):
                continue
            valid.add((i, j))
            for at in (at0, at1):
                if not Ideal(ring, tuple(at)).is_unit():
                    bad.append(Q.with_gens(at))
    return valid, bad


def _leading_coefficient(W: DirectPresentation, Y: DirectPresentation):
    """The leading coefficient of W's fibre polynomial over Y, or None when it is a constant."""
    fibre = [v for v in W.variables if v not in Y.variables]
    if len(fibre) != 1:
        return None
    _, lead = fibre_polynomial(W, Y.variables, fibre[0])
    return None if lead.is_ground else Y.ring0.convert(lead)


def _scaled(h, ring, u: str, lead):
    """lead^k · h(u / lead), with k the degree of h in u."""
    lead = ring.convert(lead)
    index = ring.index(u)
    k = h.degree(ring.gen(u))
    result = ring.zero
    for monom, coeff in h.iterterms():
        result += ring.sympy_ring.from_dict({monom: coeff}) * lead ** (k - monom[index])
    return result


def _clear_leading_coefficient(
    W: DirectPresentation, Y: DirectPresentation, opens: Piece, lead
) -> Tuple[DirectPresentation, Piece]:
    """
    W over lead ≠ 0, with its fibre coordinate u replaced by lead·u.

    The new coordinate keeps the name u and is integral over Y; ``opens`` is
    rewritten in it and gains lead ≠ 0.
    """
    W = W.as_direct()
    u = next(v for v in W.variables if v not in Y.variables)
    u1 = W.shift_map()[u]
    base_shift = {b: W.shift_map()[b] for b in Y.variables}
    v, l, V, L = fresh_names("c", 4, W.variables + W.shifted)
    ring0 = Ring(W.field, W.variables + (v, l))
    lead0 = ring0.convert(lead)
    I0 = W.I0.in_ring(ring0).with_gens([ring0.gen(v) - lead0 * ring0.gen(u), lead0 * ring0.gen(l) - 1])
    I0 = I0.eliminate(tuple(v if x == u else x for x in W.variables))
    ring1 = Ring(W.field, W.variables + W.shifted + (v, V, l, L))
    lead1, lead1_s = ring1.convert(lead), shift(lead, Y.ring0, ring1, base_shift)
    I1 = W.closure1().in_ring(ring1).with_gens(
        [
            ring1.gen(v) - lead1 * ring1.gen(u),
            ring1.gen(V) - lead1_s * ring1.gen(u1),
            lead1 * ring1.gen(l) - 1,
            lead1_s * ring1.gen(L) - 1,
        ]
    )
    I1 = I1.eliminate(tuple(v if x == u else V if x == u1 else x for x in W.variables + W.shifted))
    cleared = W.with_ideals(
        I0.substitute(W.ring0, {v: W.ring0.gen(u)}),
        I1.substitute(W.ring1, {v: W.ring1.gen(u), V: W.ring1.gen(u1)}),
    )
    ring_xy = W.ring_xy
    lead_s = shift(lead, Y.ring0, ring_xy, base_shift)
    open0 = Ideal(W.ring0, tuple(_scaled(h, W.ring0, u, lead) for h in opens.level0.open.gens))
    open1 = Ideal(
        ring_xy, tuple(_scaled(_scaled(h, ring_xy, u, lead), ring_xy, u1, lead_s) for h in opens.level1.open.gens)
    )
    rewritten = Piece(
        LocallyClosed(opens.level0.closed, open0.product(Ideal(W.ring0, (W.ring0.convert(lead),)))),
        LocallyClosed(opens.level1.closed, open1),
    )
    logger.debug("Cleared leading coefficient %s of the fibre coordinate %s", Y.ring0.format(lead), u)
    return cleared, rewritten


def _is_free_over(W: DirectPresentation, Y: DirectPresentation) -> bool:
    """Whether W has fibre coordinates over Y and its correspondence is all of W0 × W0ς."""
    W = W.as_direct()
    if len(W.variables) == len(Y.variables):
        return False
    product = Ideal(W.ring1, tuple(W.at_x(g) for g in W.I0.gens) + tuple(W.at_y(g) for g in W.I0.gens))
    return product.contains_ideal(W.closure1())


def _finite_image(
    W: DirectPresentation,
    Y: DirectPresentation,
    opens: Piece,
    limits: Limits,
    counter: _Devissage,
    level: int,
) -> GaloisStratification:
    """Image of the realisations of W inside ``opens`` under the finite projection to Y."""
    counter.enter(level)
    parts = []
    for component in direct_decompose(W, limits):
        scope = opens
        lead = _leading_coefficient(component, Y)
        if lead is not None:
            below = _restrict_over(component, Ideal(Y.ring0, (lead,)), None)
            if not below.is_empty():
                parts.append(_finite_image(below, Y, scope, limits, counter, level + 1))
            component, scope = _clear_leading_coefficient(component, Y, scope, lead)
            if component.is_empty():
                continue
        if _is_free_over(component, Y) and scope.level0.open.is_unit() and scope.level1.open.is_unit():
            piece = _image_piece(component, Y, Ideal.unit(Y.ring0), Ideal.unit(Y.ring_xy))
            parts.append(_single(Y, piece, GaloisCoverDesc.trivial(Y), {"e"}))
            continue
        closure = closure_of(component, Y, limits)
        if closure.fibre_variable is None:
            piece = realisation_piece(component).intersect(scope)
            parts.append(_single(Y, _in_ring(piece, Y), GaloisCoverDesc.trivial(Y), {"e"}))
            continue
        D = closure.cover
        valid, bad = _validity(closure, component, scope)
        domain = {
            g for g in D.G0.elements if any((i, permutation_of(g)[i]) in valid for i in range(closure.degree))
        }
        if not is_twisted_closed(domain, D.G0, D.G1, D.hom_pi1, D.hom_sigma):
            raise UnsupportedCase(
                f"Image domain {sorted(domain)} is not a twisted conjugacy domain", stage="qe.direct_image_finite_etale"
            )
        keep1 = Y.variables + Y.shifted
        bad1 = Ideal.unit(D.cover.ring_xy)
        for ideal in bad:
            bad1 = bad1.product(ideal)
        bad1 = bad1.eliminate(keep1) if bad else Ideal.unit(Y.ring_xy)
        critical = closure.critical
        if critical.is_zero():
            raise UnsupportedCase("The finite part is ramified everywhere", stage="qe.direct_image_finite_etale")
        good = _image_piece(component, Y, critical, bad1)
        parts.append(_single(Y, good, D, domain))
        if not critical.is_unit():
            below = _restrict_over(component, critical, None)
            if not below.is_empty():
                parts.append(_finite_image(below, Y, scope, limits, counter, level + 1))
        if not bad1.is_unit():
            below = _restrict_over(component, None, bad1)
            if not below.is_empty():
                parts.append(_finite_image(below, Y, scope, limits, counter, level + 1))
    return _union(parts, Y)


def _misses(W: DirectPresentation, opens: Piece) -> bool:
    """Whether W lies inside the closed set removed by the opens."""
    closure1 = W.closure1().in_ring(W.ring_xy)
    open0 = opens.level0.open.in_ring(W.ring0)
    open1 = opens.level1.open.in_ring(W.ring_xy)
    return all(W.I0.radical_contains(g) for g in open0.gens) or all(closure1.radical_contains(g) for g in open1.gens)


def _fibration_image(
    W: DirectPresentation,
    Y: DirectPresentation,
    stratum: GaloisStratum,
    limits: Limits,
    counter: _Devissage,
    level: int,
) -> GaloisStratification:
    """Image of one stratum under a projection with geometrically integral fibres."""
    counter.enter(level)
    opens = _opens_only(stratum.piece)
    parts = []
    for component in direct_decompose(W, limits):
        if _misses(component, opens):
            continue
        cover = _rebase(stratum.cover, component)
        pushed = pushforward_cover(PresentationMorphism.projection(component, Y), cover, limits)
        domain = pushed.push_domain(stratum.domain.elements)
        image = _sub_presentation(component, Y.variables)
        removed0 = Ideal(Y.ring0, (component.I0 + opens.level0.open.in_ring(component.ring0)).eliminate(Y.variables).gens)
        closure1 = component.closure1().in_ring(component.ring_xy)
        removed1 = closure1 + opens.level1.open.in_ring(component.ring_xy)
        removed1 = Ideal(Y.ring_xy, removed1.eliminate(Y.variables + Y.shifted).gens)
        open0 = Ideal.unit(Y.ring0)
        if not opens.level0.open.is_unit() and removed0.dimension() < image.I0.dimension():
            open0 = removed0
        open1 = Ideal.unit(Y.ring_xy)
        if not opens.level1.open.is_unit() and removed1.dimension() < image.closure1().dimension():
            open1 = removed1
        cover = pushed.cover if pushed.cover.is_trivial else to_direct_cover(pushed.cover, limits)
        if cover.is_trivial:
            cover = GaloisCoverDesc.trivial(Y)
            domain = ["e"] if domain else []
        parts.append(_single(Y, _image_piece(component, Y, open0, open1), cover, domain))
        for locus0, locus1 in ((open0, None), (None, open1)):
            locus = locus0 if locus0 is not None else locus1
            if locus.is_unit():
                continue
            below = _restrict_over(component, locus0, locus1)
            if not below.is_empty():
                parts.append(_fibration_image(below, Y, stratum, limits, counter, level + 1))
    return _union(parts, Y)


def _on_graph(A: GaloisStratification, morphism: PresentationMorphism) -> Tuple[GaloisStratification, PresentationMorphism]:
    """A moved onto the graph of ``morphism``, whose projection replaces it."""
    graph, projection = morphism.as_projection()
    if graph is morphism.source:
        return A, projection
    source = morphism.source
    n = len(projection.target.variables)
    rename0 = {v: graph.ring0.gen(g) for v, g in zip(source.variables, graph.variables[n:])}
    names1 = dict(zip(source.variables + source.shifted, graph.variables[n:] + graph.shifted[n:]))
    rename1 = {v: graph.ring_xy.gen(g) for v, g in names1.items()}
    strata = []
    for s in A.strata:
        if not s.cover.is_trivial:
            raise UnsupportedCase(
                "Nontrivial covers need the morphism to be a coordinate projection", stage="qe.direct_image"
            )
        piece = Piece(s.piece.level0.substitute(graph.ring0, rename0), s.piece.level1.substitute(graph.ring_xy, rename1))
        strata.append(GaloisStratum(piece, GaloisCoverDesc.trivial(graph), s.domain))
    return GaloisStratification(graph, strata, A.name), projection


def _bound(X: DirectPresentation, limits: Limits) -> int:
    X = X.as_direct()
    return max(X.closure1().dimension(), 0) + max(X.I0.dimension(), 0) + limits.devissage_slack


def direct_image_finite_etale(
    morphism: PresentationMorphism,
    A: GaloisStratification,
    limits: Limits = DEFAULT_LIMITS,
    _counter: Optional[_Devissage] = None,
) -> GaloisStratification:
    """
    The image of A along a morphism whose graph is finite over the target.

    Each stratum with trivial cover and domain {e} contributes the Galois
    closure of its finite part with the domain of Frobenius permutations that
    fix a realisation; loci where this generic description fails are excised
    and treated again. Strata of projections without fibre coordinates keep
    their covers.

    Raises:
        UnsupportedCase: If a stratum with fibre coordinates carries a nontrivial cover.
    """
    A, projection = _on_graph(A, morphism)
    X, Y = A.ambient.as_direct(), projection.target
    counter = _counter or _Devissage(_bound(X, limits))
    fibre = [v for v in X.variables if v not in Y.variables]
    parts = []
    for stratum in A.strata:
        if stratum.is_empty_domain:
            continue
        restricted = X.restrict(stratum.piece)
        if restricted.is_empty():
            continue
        if not fibre:
            piece = _in_ring(realisation_piece(restricted).intersect(stratum.piece), Y)
            parts.append(_single(Y, piece, _rebase_onto(stratum.cover, Y), stratum.domain.elements))
            continue
        if not stratum.cover.is_trivial:
            raise UnsupportedCase(
                "Finite étale images are computed for strata with trivial covers", stage="qe.direct_image_finite_etale"
            )
        parts.append(_finite_image(restricted, Y, _opens_only(stratum.piece), limits, counter, 1))
    return _union(parts, Y)


def _rebase_onto(D: GaloisCoverDesc, Y: DirectPresentation) -> GaloisCoverDesc:
    if D.is_trivial:
        return GaloisCoverDesc.trivial(Y)
    return GaloisCoverDesc(
        Y, D.cover, D.G0, D.G1, dict(D.action0), dict(D.action1), dict(D.hom_pi1), dict(D.hom_sigma), name=D.name
    )


def direct_image_fibration(
    morphism: PresentationMorphism,
    A: GaloisStratification,
    limits: Limits = DEFAULT_LIMITS,
    _counter: Optional[_Devissage] = None,
) -> GaloisStratification:
    """
    The image of A along a projection with geometrically integral fibres.

    Covers are pushed forward and domains mapped onto the pushed group.
    Agreement with the pointwise image holds once q is large enough for the
    fibres to acquire points.
    """
    A, projection = _on_graph(A, morphism)
    X, Y = A.ambient.as_direct(), projection.target
    counter = _counter or _Devissage(_bound(X, limits))
    parts = []
    for stratum in A.strata:
        if stratum.is_empty_domain:
            continue
        restricted = X.restrict(stratum.piece)
        if restricted.is_empty():
            continue
        parts.append(_fibration_image(restricted, Y, stratum, limits, counter, 1))
    return _union(parts, Y)


def direct_image(task: DirectImageTask, limits: Limits = DEFAULT_LIMITS) -> GaloisStratification:
    """
    f_∃ A: the stratification of the target whose evaluation is the image of A's.

    Composite morphisms are factored by :func:`stein_factorize`; the fibration
    part is pushed first and the finite part second.

    Raises:
        UnsupportedCase: If a stage meets a configuration outside the supported class.
        DecompositionIncomplete: If the devissage does not terminate within its bound.

    Example:
        >>> task = DirectImageTask(square, units, "finite_etale")  # x -> x^2 on σx = x, x != 0
        >>> evaluate(direct_image(task), DiffField.from_q(Q, 7)).points
        [(1,), (2,), (4,)]
    """
    morphism, A = task.morphism, task.stratification
    Y = morphism.target
    if morphism.source.is_empty():
        return bottom(Y)
    counter = _Devissage(_bound(morphism.as_projection()[0], limits))
    if task.case == FINITE_ETALE:
        result = direct_image_finite_etale(morphism, A, limits, counter)
    elif task.case == FIBRATION:
        result = direct_image_fibration(morphism, A, limits, counter)
    else:
        result = _composite(morphism, A, limits, counter)
    task.depth = counter.depth
    logger.info(
        "Direct image %s: %d strata, devissage depth %d", task.name or task.case, len(result.strata), counter.depth
    )
    return result


def _composite(
    morphism: PresentationMorphism, A: GaloisStratification, limits: Limits, counter: _Devissage
) -> GaloisStratification:
    A, projection = _on_graph(A, morphism)
    X, Y = A.ambient.as_direct(), projection.target
    parts = []
    for stratum in A.strata:
        if stratum.is_empty_domain:
            continue
        single = GaloisStratification(X, [stratum])
        for W in direct_decompose(X.restrict(stratum.piece), limits):
            restricted = _restrict_stratification(single, W)
            if not restricted.strata:
                continue
            onto = PresentationMorphism.projection(W, Y)
            factored = stein_factorize(onto, limits)
            if factored.is_finite:
                parts.append(direct_image_finite_etale(onto, restricted, limits, counter))
            elif factored.is_fibration:
                parts.append(direct_image_fibration(onto, restricted, limits, counter))
            else:
                middle = direct_image_fibration(factored.first, restricted, limits, counter)
                parts.append(direct_image_finite_etale(factored.second, middle, limits, counter))
    return _union(parts, Y)


def _restrict_stratification(A: GaloisStratification, W: DirectPresentation) -> GaloisStratification:
    """A on the closed sub-presentation W of its ambient space."""
    W = W.as_direct()
    whole = realisation_piece(W)
    strata = []
    for s in A.strata:
        piece = _in_ring(s.piece, W).intersect(whole)
        if piece.is_empty():
            continue
        strata.append(GaloisStratum(piece, _rebase(s.cover, W), s.domain))
    return GaloisStratification(W, strata, A.name)


def image_points(morphism: PresentationMorphism, points: Sequence[Point], K: DiffField) -> List[Point]:
    """f0 applied to realisations over K, sorted and deduplicated."""
    spec = K.specializer(morphism.source.ring0)
    gf = K.gf
    images = set()
    for x in points:
        values = {v: gf(int(c)) for v, c in zip(morphism.source.variables, x)}
        images.add(tuple(int(spec.evaluate(f, values)) for f in morphism.f0))
    return sorted(images)


def pointwise_image(
    morphism: PresentationMorphism, A: GaloisStratification, K: DiffField, limits: Limits = DEFAULT_LIMITS
) -> List[Point]:
    """The ground truth f0(A(K)) for direct images."""
    return image_points(morphism, evaluate(A, K, limits).points, K)
