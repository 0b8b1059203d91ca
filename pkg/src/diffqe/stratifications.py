"""
Direct Galois stratifications and their evaluation over Frobenius difference fields.

A stratification partitions the realisations of an ambient presentation into
locally closed pieces, each carrying a Galois cover and a twisted conjugacy
domain. A realisation belongs to the evaluated set when its local Frobenius
class on its piece lies in the piece's domain.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from diffqe.algebra.ideals import Ideal
from diffqe.algebra.polys import Ring
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.covers.constructions import product_cover
from diffqe.covers.galois_cover import GaloisCoverDesc, local_frobenius, restrict_group, select_level1_component, stabiliser
from diffqe.covers.groups import TwistedConjugacyDomain, is_twisted_closed, preimage, product_label
from diffqe.errors import InvalidCover, UnsupportedCase, VariableMismatch
from diffqe.pieces import LocallyClosed, Piece, shift
from diffqe.points import DiffField, Point, enumerate_realisations
from diffqe.presentations import DirectPresentation, PresentationMorphism, fresh_names

logger = logging.getLogger(__name__)

AND = "and"
OR = "or"
NOT = "not"
CONNECTIVES = (AND, OR, NOT)


@dataclass(frozen=True)
class GaloisStratum:
    """
    One stratum ⟨X_i, Z_i/X_i, C_i⟩.

    Attributes:
        piece: The locally closed piece X_i of the ambient space.
        cover: A Galois cover over the ambient coordinates.
        domain: Twisted conjugacy domain in the cover's G0.
    """

    piece: Piece
    cover: GaloisCoverDesc
    domain: TwistedConjugacyDomain

    @property
    def is_full(self) -> bool:
        return len(self.domain) == self.cover.G0.order

    @property
    def is_empty_domain(self) -> bool:
        return not self.domain.elements

    def with_domain(self, labels: Iterable[str]) -> "GaloisStratum":
        return GaloisStratum(self.piece, self.cover, TwistedConjugacyDomain(frozenset(labels)))


@dataclass
class EvaluationResult:
    """
    The realisations selected by a stratification over one field.

    Attributes:
        field: The difference field.
        points: Selected realisations, sorted.
        attribution: Stratum index of every realisation of the ambient presentation.
    """

    field: DiffField
    points: List[Point]
    attribution: Dict[Point, int] = field(default_factory=dict)

    def __contains__(self, point) -> bool:
        return tuple(point) in set(self.points)

    def stratum_sizes(self) -> Dict[int, int]:
        sizes: Dict[int, int] = {}
        for index in self.attribution.values():
            sizes[index] = sizes.get(index, 0) + 1
        return sizes

    def to_json(self) -> Dict:
        return {
            **self.field.to_json(),
            "points": [[self.field.render(c) for c in point] for point in self.points],
            "strata": {str(k): v for k, v in sorted(self.stratum_sizes().items())},
        }


@dataclass
class GaloisStratification:
    """
    A direct Galois stratification of an ambient presentation.

    Attributes:
        ambient: The presentation X whose realisations are partitioned.
        strata: The strata; the first stratum containing a realisation decides it.
        name: Optional label.
    """

    ambient: DirectPresentation
    strata: List[GaloisStratum] = field(default_factory=list)
    name: str = ""

    @property
    def ring0(self) -> Ring:
        return self.ambient.ring0

    @property
    def ring1(self) -> Ring:
        return self.ambient.ring_xy

    def validate(self) -> List[str]:
        """Structural problems: foreign covers and domains that are not twisted-closed."""
        errors = []
        for i, s in enumerate(self.strata):
            if s.cover.base.variables != self.ambient.variables:
                errors.append(f"Stratum {i}: cover lives over {s.cover.base.variables}")
            D = s.cover
            if not set(s.domain.elements) <= set(D.G0.elements):
                errors.append(f"Stratum {i}: domain is not a subset of G0")
            elif not is_twisted_closed(s.domain.elements, D.G0, D.G1, D.hom_pi1, D.hom_sigma):
                errors.append(f"Stratum {i}: domain {sorted(s.domain.elements)} is not twisted-closed")
        return errors

    def to_json(self, cover_names: Optional[Mapping[int, str]] = None) -> Dict:
        """JSON form; covers are inlined unless ``cover_names`` gives a reference."""
        strata = []
        for i, s in enumerate(self.strata):
            if cover_names and i in cover_names:
                cover = cover_names[i]
            elif s.cover.is_trivial:
                cover = None
            else:
                cover = {"base": s.cover.base.to_json(), **s.cover.to_json()}
            strata.append({"piece": s.piece.to_json(), "cover": cover, "domain": s.domain.to_json()})
        return {"ambient": self.ambient.to_json(), "strata": strata}

    @classmethod
    def from_json(
        cls,
        data: Mapping,
        ambient: DirectPresentation,
        covers: Optional[Mapping[str, GaloisCoverDesc]] = None,
        name: str = "",
    ) -> "GaloisStratification":
        """
        Build a stratification; ``cover`` entries are names in ``covers``, inline
        cover JSON, or null for the trivial cover.
        """
        strata = []
        for entry in data["strata"]:
            piece = Piece.from_json(entry.get("piece", {}), ambient.ring0, ambient.ring_xy)
            ref = entry.get("cover")
            if ref is None:
                cover = GaloisCoverDesc.trivial(ambient)
            elif isinstance(ref, str):
                if not covers or ref not in covers:
                    raise KeyError(ref)
                cover = covers[ref]
            else:
                base = DirectPresentation.from_json(ref["base"]) if "base" in ref else ambient
                cover = GaloisCoverDesc.from_json(ref, base)
            domain = entry.get("domain", [cover.G0.identity] if ref is None else [])
            strata.append(GaloisStratum(piece, cover, TwistedConjugacyDomain(frozenset(domain))))
        return cls(ambient, strata, name)


def top(X: DirectPresentation) -> GaloisStratification:
    """⊤: the trivial cover with full domain on the whole space."""
    trivial = GaloisCoverDesc.trivial(X)
    return GaloisStratification(X, [GaloisStratum(X.whole_piece(), trivial, TwistedConjugacyDomain(frozenset({"e"})))])


def bottom(X: DirectPresentation) -> GaloisStratification:
    """⊥: the trivial cover with empty domain."""
    trivial = GaloisCoverDesc.trivial(X)
    return GaloisStratification(X, [GaloisStratum(X.whole_piece(), trivial, TwistedConjugacyDomain(frozenset()))])


def indicator(X: DirectPresentation, piece: Piece) -> GaloisStratification:
    """⊤ on ``piece`` and ⊥ on its complement."""
    trivial = GaloisCoverDesc.trivial(X)
    strata = [GaloisStratum(piece, trivial, TwistedConjugacyDomain(frozenset({"e"})))]
    for part in piece.complement():
        strata.append(GaloisStratum(part, trivial, TwistedConjugacyDomain(frozenset())))
    return GaloisStratification(X, strata)


def _attribute(A: GaloisStratification, K: DiffField, rows: Sequence[Point]) -> np.ndarray:
    """Index of the first stratum containing each realisation, -1 if none."""
    X = A.ambient
    gf = K.gf
    owner = np.full(len(rows), -1, dtype=np.int64)
    if not rows:
        return owner
    array = np.array(rows, dtype=np.int64).reshape(len(rows), len(X.variables))
    x = {v: gf(array[:, i]) for i, v in enumerate(X.variables)}
    y = {s: K.frobenius(x[v]) for v, s in zip(X.variables, X.shifted)}
    spec0, spec1 = K.specializer(A.ring0), K.specializer(A.ring1)
    for index, stratum in enumerate(A.strata):
        free = owner < 0
        if not free.any():
            break
        inside = np.broadcast_to(np.asarray(stratum.piece.contains(spec0, spec1, x, y)), owner.shape)
        owner[free & inside] = index
    return owner


def evaluate(
    A: GaloisStratification, K: DiffField, limits: Limits = DEFAULT_LIMITS, verbose: bool = False
) -> EvaluationResult:
    """
    The realisations of the ambient space whose local Frobenius class lies in their stratum's domain.

    Raises:
        NotEtale: If a realisation lands on a ramified point of its stratum's cover.
        LiftNotFound: If a lift cannot be found within the configured degree.

    Example:
        >>> kummer = load_catalog().stratifications["kummer_nontrivial"]
        >>> evaluate(kummer, DiffField.from_q(kummer.ambient.field, 7)).points
        [(3,), (5,), (6,)]
    """
    rows = enumerate_realisations(A.ambient, K, limits)
    owner = _attribute(A, K, rows)
    selected: List[Point] = []
    attribution: Dict[Point, int] = {}
    for row, index in tqdm(list(zip(rows, owner)), desc=f"Evaluating over {K}", disable=not verbose):
        index = int(index)
        if index < 0:
            continue
        attribution[row] = index
        stratum = A.strata[index]
        if stratum.is_empty_domain:
            continue
        if stratum.is_full:
            selected.append(row)
            continue
        if local_frobenius(stratum.cover, row, K, limits).elements <= stratum.domain.elements:
            selected.append(row)
    uncovered = len(rows) - len(attribution)
    if uncovered:
        logger.warning("%d realisations over %s lie in no stratum", uncovered, K)
    return EvaluationResult(K, sorted(selected), attribution)


def inflate(
    A: GaloisStratification, dominating: Mapping[int, Tuple[GaloisCoverDesc, Mapping[str, str]]]
) -> GaloisStratification:
    """
    Replace covers by dominating ones; domains become preimages under the group surjections.

    Args:
        dominating: Stratum index -> (dominating cover, surjection G0' -> G0 by label).

    Raises:
        InvalidCover: If a surjection is not a surjective homomorphism.
    """
    strata = list(A.strata)
    for index, (cover, surjection) in dominating.items():
        old = strata[index]
        if set(surjection) != set(cover.G0.elements):
            raise InvalidCover("Surjection must be defined on every element of the dominating group")
        if set(surjection.values()) != set(old.cover.G0.elements):
            raise InvalidCover(f"Map onto the group of stratum {index} is not surjective")
        if not cover.G0.is_homomorphism(old.cover.G0, surjection):
            raise InvalidCover(f"Map onto the group of stratum {index} is not a homomorphism")
        strata[index] = GaloisStratum(old.piece, cover, TwistedConjugacyDomain(preimage(surjection, old.domain.elements)))
    return GaloisStratification(A.ambient, strata, A.name)


def restrict_cover(D: GaloisCoverDesc, piece: Piece, component: Ideal) -> GaloisCoverDesc:
    """
    The cover restricted to a component of Z0 over ``piece``, with decomposition groups.

    ``component`` is a prime of the cover's level-0 ring. The level-1 component
    lies over it and its σ-shift, meets the piece, and has a stabiliser mapping
    onto the decomposition group under both homomorphisms.
    """
    from diffqe.algebra.decompose import decompose_variety

    Z = D.cover
    kept0 = stabiliser(D, 0, component)
    G0 = restrict_group(D.G0, kept0)
    ring_xy = Z.ring_xy
    seed = D.level1_ideal().with_gens(ring_xy.convert(g) for g in component.gens)
    seed = seed.with_gens(shift(g, Z.ring0, ring_xy, Z.shift_map()) for g in component.gens)
    seed = seed.with_gens(ring_xy.convert(g) for g in piece.closure1().gens)
    components = decompose_variety(seed)
    if not components:
        raise InvalidCover("Component has no correspondence over the piece", stage="stratifications.refine")
    level1, kept1 = select_level1_component(D, components, kept0, stage="stratifications.refine")
    G1 = restrict_group(D.G1, kept1)
    cover = Z.with_ideals(Ideal(Z.ring0, component.basis()), Ideal(Z.ring1, level1.gens) if not Z.extra else Z.I1)
    return GaloisCoverDesc(
        D.base,
        cover,
        G0,
        G1,
        {g: D.action0[g] for g in G0.elements},
        {g: D.action1[g] for g in G1.elements},
        {g: D.hom_pi1[g] for g in G1.elements},
        {g: D.hom_sigma[g] for g in G1.elements},
        name=D.name,
    )


def refine(
    A: GaloisStratification,
    index: int,
    pieces: Sequence[Piece],
    components: Optional[Sequence[Optional[Ideal]]] = None,
) -> GaloisStratification:
    """
    Split stratum ``index`` into ``pieces`` (intersected with it), optionally
    restricting the cover on each to a chosen component of Z0.

    Domains on restricted covers become C ∩ D(Z_ij).
    """
    old = A.strata[index]
    replacement = []
    for k, piece in enumerate(pieces):
        part = old.piece.intersect(piece)
        if part.is_empty():
            continue
        component = components[k] if components else None
        if component is None:
            replacement.append(GaloisStratum(part, old.cover, old.domain))
            continue
        cover = restrict_cover(old.cover, part, component)
        domain = frozenset(old.domain.elements) & frozenset(cover.G0.elements)
        replacement.append(GaloisStratum(part, cover, TwistedConjugacyDomain(domain)))
    strata = A.strata[:index] + replacement + A.strata[index + 1 :]
    return GaloisStratification(A.ambient, strata, A.name)


def _same_cover(a: GaloisCoverDesc, b: GaloisCoverDesc) -> bool:
    return a is b or (a.cover.key() == b.cover.key() and a.to_json() == b.to_json())


def _combine_strata(a: GaloisStratum, b: GaloisStratum, piece: Piece, connective: str) -> GaloisStratum:
    Ca, Cb = a.domain.elements, b.domain.elements
    if a.cover.is_trivial or b.cover.is_trivial:
        trivial, other = (a, b) if a.cover.is_trivial else (b, a)
        holds = bool(trivial.domain.elements)
        if connective == AND:
            domain = other.domain.elements if holds else frozenset()
        else:
            domain = frozenset(other.cover.G0.elements) if holds else other.domain.elements
        return GaloisStratum(piece, other.cover, TwistedConjugacyDomain(domain))
    if _same_cover(a.cover, b.cover):
        domain = Ca & Cb if connective == AND else Ca | Cb
        return GaloisStratum(piece, a.cover, TwistedConjugacyDomain(domain))
    cover = product_cover(a.cover, b.cover)
    labels = set()
    for g in a.cover.G0.elements:
        for h in b.cover.G0.elements:
            keep = (g in Ca and h in Cb) if connective == AND else (g in Ca or h in Cb)
            if keep:
                labels.add(product_label(g, h))
    return GaloisStratum(piece, cover, TwistedConjugacyDomain(frozenset(labels)))


def boolean_combine(
    A: GaloisStratification, B: Optional[GaloisStratification], connective: str
) -> GaloisStratification:
    """
    A ∧ B, A ∨ B or ¬A on a common refinement with common covers.

    Pieces are pairwise intersections of strata; on each, the covers are
    combined by their fibre product unless one is trivial or both coincide.

    Raises:
        ValueError: On an unknown connective or a missing second operand.
        VariableMismatch: If A and B have different ambient spaces.
    """
    if connective not in CONNECTIVES:
        raise ValueError(f"Unknown connective: {connective}")
    if connective == NOT:
        strata = [
            GaloisStratum(s.piece, s.cover, TwistedConjugacyDomain(frozenset(s.cover.G0.elements) - s.domain.elements))
            for s in A.strata
        ]
        return GaloisStratification(A.ambient, strata, f"~{A.name}" if A.name else "")
    if B is None:
        raise ValueError(f"'{connective}' needs two stratifications")
    if A.ambient.variables != B.ambient.variables or A.ambient.field != B.ambient.field:
        raise VariableMismatch("Stratifications have different ambient spaces")
    strata = []
    for a in A.strata:
        for b in B.strata:
            piece = a.piece.intersect(b.piece)
            if piece.is_empty():
                continue
            strata.append(_combine_strata(a, b, piece, connective))
    logger.debug("Combined %d x %d strata into %d by %s", len(A.strata), len(B.strata), len(strata), connective)
    return GaloisStratification(A.ambient, strata)


def pullback_cover(D: GaloisCoverDesc, X: DirectPresentation) -> GaloisCoverDesc:
    """Pull a cover of Y back along the projection X -> Y (X's coordinates contain Y's)."""
    if D.is_trivial:
        return GaloisCoverDesc.trivial(X)
    Z = D.cover
    taken = X.variables + X.shifted + X.extra
    rename: Dict[str, str] = {}
    for v, s in zip(D.fibre, D.fibre_shifted):
        rename[v] = v if v not in taken else fresh_names(f"{v}_", 1, taken + tuple(rename.values()))[0]
        rename[s] = s if s not in taken else fresh_names(f"{s}_", 1, taken + tuple(rename.values()))[0]
    extra = tuple(e if e not in taken else f"{e}_" for e in Z.extra)
    variables = X.variables + tuple(rename[v] for v in D.fibre)
    shifted = X.shifted + tuple(rename[s] for s in D.fibre_shifted)
    ring0 = Ring(X.field, variables)
    ring1 = Ring(X.field, variables + shifted + X.extra + extra)
    ring_xy = Ring(X.field, variables + shifted)
    m0 = {v: ring0.gen(rename[v]) for v in D.fibre}
    m1 = {v: ring1.gen(rename[v]) for v in D.fibre + D.fibre_shifted}
    m1.update({e: ring1.gen(n) for e, n in zip(Z.extra, extra)})
    mxy = {v: ring_xy.gen(rename[v]) for v in D.fibre + D.fibre_shifted}
    I0 = X.I0.in_ring(ring0) + Z.I0.substitute(ring0, m0)
    I1 = X.I1.in_ring(ring1) + Z.I1.substitute(ring1, m1)
    pulled = DirectPresentation(X.field, variables, shifted, I0, I1, X.extra + extra, Z.name)
    return GaloisCoverDesc(
        X,
        pulled,
        D.G0,
        D.G1,
        {g: tuple(ring0.substitute(f, m0) for f in D.action0[g]) for g in D.G0.elements},
        {g: tuple(ring_xy.substitute(f, mxy) for f in D.action1[g]) for g in D.G1.elements},
        dict(D.hom_pi1),
        dict(D.hom_sigma),
        name=D.name,
    )


def pullback(A: GaloisStratification, morphism: PresentationMorphism) -> GaloisStratification:
    """
    Pull A back along a coordinate projection into its ambient space.

    Raises:
        UnsupportedCase: If the morphism is not a projection.
    """
    if not morphism.is_projection() or morphism.target.variables != A.ambient.variables:
        raise UnsupportedCase("Pullback needs a coordinate projection onto the ambient space", stage="stratifications.pullback")
    X = morphism.source
    strata = []
    for s in A.strata:
        piece = Piece(
            LocallyClosed(s.piece.level0.closed.in_ring(X.ring0), s.piece.level0.open.in_ring(X.ring0)),
            LocallyClosed(s.piece.level1.closed.in_ring(X.ring_xy), s.piece.level1.open.in_ring(X.ring_xy)),
        )
        strata.append(GaloisStratum(piece, pullback_cover(s.cover, X), s.domain))
    return GaloisStratification(X, strata, A.name)


def restrict_ambient(A: GaloisStratification, piece: Piece) -> GaloisStratification:
    """A with ⊥ outside ``piece``."""
    strata = []
    for s in A.strata:
        part = s.piece.intersect(piece)
        if not part.is_empty():
            strata.append(GaloisStratum(part, s.cover, s.domain))
    trivial = GaloisCoverDesc.trivial(A.ambient)
    for part in piece.complement():
        strata.append(GaloisStratum(part, trivial, TwistedConjugacyDomain(frozenset())))
    return GaloisStratification(A.ambient, strata, A.name)
