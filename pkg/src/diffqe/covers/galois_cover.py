"""
Direct Galois covers and local Frobenius substitutions.

A cover Z of a presentation X shares X's coordinates and adds fibre
coordinates z (shifted copies w); the covering maps p0 and p1 forget the
fibre. Group elements act by explicit polynomial tuples on the fibre
coordinates, at level 0 on z and at level 1 on (z, w).
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from diffqe.algebra.decompose import decompose_variety
from diffqe.algebra.ideals import Ideal
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.covers.groups import (
    FiniteGroupDesc,
    TwistedConjugacyDomain,
    trivial_group,
    twisted_classes,
    twisted_closure,
)
from diffqe.errors import InvalidCover, LiftNotFound, NoGroupElement, NonUnique, NotEtale
from diffqe.pieces import shift
from diffqe.points import DiffField, FibreSolver, Point, _grid, _mask
from diffqe.presentations import DirectPresentation
from diffqe.properties import jacobian_minors

logger = logging.getLogger(__name__)

Action = Tuple


@dataclass(frozen=True)
class GaloisCoverDesc:
    """
    A direct (or almost-direct) Galois cover Z of X with groups G0 and G1.

    Attributes:
        base: The presentation X being covered.
        cover: The presentation Z; its variables start with X's.
        G0: Group acting on Z0.
        G1: Group acting on Z1.
        action0: Per G0 label, images of the fibre coordinates (polynomials in Z's x and z).
        action1: Per G1 label, images of the fibre coordinates and their shifted
            copies (polynomials in Z's x, z, y and w).
        hom_pi1: The homomorphism G1 -> G0 compatible with π1.
        hom_sigma: The homomorphism G1 -> G0 compatible with the lift σ̃ given by π2.
        name: Optional label.
    """

    base: DirectPresentation
    cover: DirectPresentation
    G0: FiniteGroupDesc
    G1: FiniteGroupDesc
    action0: Mapping[str, Action]
    action1: Mapping[str, Action]
    hom_pi1: Mapping[str, str]
    hom_sigma: Mapping[str, str]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        X, Z = self.base, self.cover
        n = len(X.variables)
        if Z.variables[:n] != X.variables or Z.shifted[:n] != X.shifted:
            raise InvalidCover("Cover coordinates must extend the base coordinates", stage="covers")
        if Z.field != X.field:
            raise InvalidCover("Cover and base have different fields", stage="covers")
        for group, actions, width in ((self.G0, self.action0, len(self.fibre)), (self.G1, self.action1, 2 * len(self.fibre))):
            missing = [g for g in group.elements if g not in actions]
            if missing:
                raise InvalidCover(f"No action given for {missing}", stage="covers")
            if any(len(actions[g]) != width for g in group.elements):
                raise InvalidCover(f"Actions must give {width} polynomials", stage="covers")
        for name, hom in (("hom_pi1", self.hom_pi1), ("hom_sigma", self.hom_sigma)):
            if set(hom) != set(self.G1.elements) or not set(hom.values()) <= set(self.G0.elements):
                raise InvalidCover(f"{name} must map every G1 label to a G0 label", stage="covers")

    @property
    def fibre(self) -> Tuple[str, ...]:
        return self.cover.variables[len(self.base.variables) :]

    @property
    def fibre_shifted(self) -> Tuple[str, ...]:
        return self.cover.shifted[len(self.base.variables) :]

    @cached_property
    def solvers(self) -> Tuple[FibreSolver, FibreSolver, Ideal]:
        """Fibre solvers for Z0 over X0 and Z1 over (x, z, y), and the Jacobian minors of Z0."""
        Z = self.cover
        return (
            FibreSolver(Z.I0, self.fibre),
            FibreSolver(Z.closure1(), self.fibre_shifted + Z.extra),
            jacobian_minors(Z.I0, self.fibre, len(self.fibre)),
        )

    @property
    def is_trivial(self) -> bool:
        return not self.fibre and self.G0.order == 1

    @classmethod
    def trivial(cls, base: DirectPresentation) -> "GaloisCoverDesc":
        """X as its own cover with trivial groups."""
        e = trivial_group()
        return cls(base, base, e, e, {"e": ()}, {"e": ()}, {"e": "e"}, {"e": "e"}, name=base.name)

    def sigma_image(self, label: str) -> Action:
        """The ς-twist of a G0 action, moved to the shifted coordinates."""
        Z = self.cover
        return tuple(shift(f, Z.ring0, Z.ring_xy, Z.shift_map()) for f in self.action0[label])

    def identity_action(self, level: int) -> Action:
        Z = self.cover
        if level == 0:
            return tuple(Z.ring0.gen(v) for v in self.fibre)
        return tuple(Z.ring_xy.gen(v) for v in self.fibre + self.fibre_shifted)

    def compose(self, level: int, g: Action, h: Action) -> Action:
        """The action of gh: first h, then g, on points."""
        Z = self.cover
        ring = Z.ring0 if level == 0 else Z.ring_xy
        names = self.fibre if level == 0 else self.fibre + self.fibre_shifted
        mapping = dict(zip(names, h))
        return tuple(ring.substitute(f, mapping) for f in g)

    def classes(self) -> List[FrozenSet[str]]:
        return twisted_classes(self.G0, self.G1, self.hom_pi1, self.hom_sigma)

    def twisted_closure(self, labels) -> TwistedConjugacyDomain:
        return twisted_closure(labels, self.G0, self.G1, self.hom_pi1, self.hom_sigma)

    def level1_ideal(self) -> Ideal:
        """The ideal of Z1 in (x, z, y, w), extra coordinates eliminated."""
        Z = self.cover.as_direct()
        return Z.closure1().in_ring(Z.ring_xy)

    @classmethod
    def from_json(cls, data: Mapping, base: DirectPresentation, name: str = "") -> "GaloisCoverDesc":
        """
        Build a cover over ``base``.

        ``G1`` may be omitted when it equals ``G0``; its action is then the
        pair (P_g on z, twisted P_g on w) and both homomorphisms are the identity.
        """
        Z = DirectPresentation.from_json(data["Z"], name=name)
        G0 = FiniteGroupDesc.from_json(data["G0"])
        fibre = Z.variables[len(base.variables) :]
        fibre_shifted = Z.shifted[len(base.variables) :]
        action0 = {g: tuple(Z.ring0.gen(v) for v in fibre) for g in G0.elements}
        for g, texts in data["G0"].get("action", {}).items():
            action0[g] = tuple(Z.ring0.parse(t) for t in texts)
        if "G1" not in data:
            G1 = G0
            ident = {g: g for g in G0.elements}
            hom_pi1, hom_sigma = dict(data.get("hom_pi1", ident)), dict(data.get("hom_sigma", ident))
            action1 = {}
            for g in G1.elements:
                z_part = tuple(Z.ring_xy.convert(f) for f in action0[hom_pi1[g]])
                w_part = tuple(shift(f, Z.ring0, Z.ring_xy, Z.shift_map()) for f in action0[hom_sigma[g]])
                action1[g] = z_part + w_part
        else:
            G1 = FiniteGroupDesc.from_json(data["G1"])
            hom_pi1, hom_sigma = dict(data["hom_pi1"]), dict(data["hom_sigma"])
            action1 = {g: tuple(Z.ring_xy.gen(v) for v in fibre + fibre_shifted) for g in G1.elements}
            for g, texts in data["G1"].get("action", {}).items():
                action1[g] = tuple(Z.ring_xy.parse(t) for t in texts)
        return cls(base, Z, G0, G1, action0, action1, hom_pi1, hom_sigma, name=name)

    def to_json(self) -> Dict:
        Z = self.cover
        fmt0, fmt1 = Z.ring0.format, Z.ring_xy.format
        G0 = self.G0.to_json()
        G0["action"] = {g: [fmt0(f) for f in self.action0[g]] for g in self.G0.elements}
        G1 = self.G1.to_json()
        G1["action"] = {g: [fmt1(f) for f in self.action1[g]] for g in self.G1.elements}
        Zdata = Z.to_json()
        Zdata["variables"], Zdata["shifted"] = list(Z.variables), list(Z.shifted)
        return {
            "Z": Zdata,
            "p0": list(self.base.variables),
            "p1": list(self.base.variables + self.base.shifted),
            "G0": G0,
            "G1": G1,
            "hom_pi1": dict(self.hom_pi1),
            "hom_sigma": dict(self.hom_sigma),
        }


@dataclass
class CoverReport:
    """
    Outcome of :func:`validate_cover`.

    Attributes:
        valid: No identity failed.
        errors: Failed identities with their nonzero normal forms.
        branch0: Generators of the base locus over which Z0 is not étale.
        branch1: The same for Z1 over X1.
        faithful: No nontrivial element of G0 acts as the identity.
    """

    valid: bool
    errors: List[str] = field(default_factory=list)
    branch0: List[str] = field(default_factory=list)
    branch1: List[str] = field(default_factory=list)
    faithful: bool = True

    def to_json(self) -> Dict:
        return {
            "valid": self.valid,
            "errors": list(self.errors),
            "branch0": list(self.branch0),
            "branch1": list(self.branch1),
            "faithful": self.faithful,
        }


def _nonzero(ideal: Ideal, f) -> Optional[str]:
    remainder = ideal.reduce(f)
    return ideal.ring.format(remainder) if remainder else None


def _check_action(
    D: GaloisCoverDesc, level: int, group: FiniteGroupDesc, actions: Mapping[str, Action], ideal: Ideal, errors: List[str]
) -> None:
    ring = ideal.ring
    names = D.fibre if level == 0 else D.fibre + D.fibre_shifted
    identity = D.identity_action(level)
    for g in group.elements:
        mapping = dict(zip(names, actions[g]))
        for f in ideal.gens:
            bad = _nonzero(ideal, ring.substitute(f, mapping))
            if bad is not None:
                errors.append(f"G{level} element {g} does not preserve {ring.format(f)}: normal form {bad}")
    for f, image in zip(identity, actions[group.identity]):
        bad = _nonzero(ideal, image - f)
        if bad is not None:
            errors.append(f"G{level} identity moves {ring.format(f)}: normal form {bad}")
    for g in group.elements:
        for h in group.elements:
            composed = D.compose(level, actions[g], actions[h])
            for f, image in zip(composed, actions[group.mult(g, h)]):
                bad = _nonzero(ideal, image - f)
                if bad is not None:
                    errors.append(f"G{level} action is not compatible with {g}*{h}: normal form {bad}")
                    break


def branch_locus(ideal: Ideal, fibre: Sequence[str], base: Sequence[str]) -> Ideal:
    """Closure of the base points over which V(ideal) is not étale in the fibre coordinates."""
    critical = ideal + jacobian_minors(ideal, fibre, len(fibre))
    return critical.eliminate(base)


def validate_cover(
    D: GaloisCoverDesc, limits: Limits = DEFAULT_LIMITS, sample: Optional[DiffField] = None
) -> CoverReport:
    """
    Check group axioms, covering maps, invariance, intertwining laws and étaleness.

    Args:
        D: The cover description.
        limits: Enumeration bounds for the optional fibre sample.
        sample: If given, fibres over the base points of this field are also
            checked to be single G0-orbits.
    """
    errors: List[str] = []
    for label, group in (("G0", D.G0), ("G1", D.G1)):
        errors.extend(f"{label}: {msg}" for msg in group.validate())
    if errors:
        return CoverReport(False, errors)
    for name, hom in (("hom_pi1", D.hom_pi1), ("hom_sigma", D.hom_sigma)):
        if not D.G1.is_homomorphism(D.G0, hom):
            errors.append(f"{name} is not a homomorphism")
    X, Z = D.base, D.cover
    I0 = Z.I0
    I1 = D.level1_ideal()
    for g in X.I0.gens:
        bad = _nonzero(I0, Z.ring0.convert(g))
        if bad is not None:
            errors.append(f"p0 does not land in X0: {X.ring0.format(g)} reduces to {bad}")
    for g in X.as_direct().I1.gens:
        bad = _nonzero(I1, Z.ring_xy.convert(g))
        if bad is not None:
            errors.append(f"p1 does not land in X1: {X.ring1.format(g)} reduces to {bad}")
    _check_action(D, 0, D.G0, D.action0, I0, errors)
    _check_action(D, 1, D.G1, D.action1, I1, errors)
    k = len(D.fibre)
    for g in D.G1.elements:
        z_part, w_part = D.action1[g][:k], D.action1[g][k:]
        pi1 = [Z.ring_xy.convert(f) for f in D.action0[D.hom_pi1[g]]]
        for f, expected in zip(z_part, pi1):
            bad = _nonzero(I1, f - expected)
            if bad is not None:
                errors.append(f"π1 intertwining fails for {g}: normal form {bad}")
        for f, expected in zip(w_part, D.sigma_image(D.hom_sigma[g])):
            bad = _nonzero(I1, f - expected)
            if bad is not None:
                errors.append(f"σ̃ intertwining fails for {g}: normal form {bad}")
    faithful = all(
        any(_nonzero(I0, f - e) is not None for f, e in zip(D.action0[g], D.identity_action(0)))
        for g in D.G0.elements
        if g != D.G0.identity
    )
    report = CoverReport(not errors, errors, faithful=faithful)
    if errors:
        return report
    report.branch0 = branch_locus(I0, D.fibre, X.variables).texts()
    report.branch1 = branch_locus(I1, D.fibre + D.fibre_shifted, X.variables + X.shifted).texts()
    if sample is not None:
        report.errors.extend(check_fibre_transitivity(D, sample, limits))
        report.valid = not report.errors
    return report


def _apply(action: Action, spec, values: Mapping[str, object]) -> Point:
    return tuple(int(spec.evaluate(f, values)) for f in action)


def check_fibre_transitivity(D: GaloisCoverDesc, K: DiffField, limits: Limits = DEFAULT_LIMITS) -> List[str]:
    """Base points of X0 over K whose étale fibre in Z0 is not one G0-orbit."""
    X, Z = D.base, D.cover
    gf = K.gf
    columns = _grid(K, len(X.variables), limits)
    size = len(columns[0]) if columns else 1
    values = {v: gf(col) for v, col in zip(X.variables, columns)}
    keep = _mask(K.specializer(X.ring0), X.I0.gens, values, size)
    spec = K.specializer(Z.ring0)
    minors = jacobian_minors(Z.I0, D.fibre, len(D.fibre))
    solver = FibreSolver(Z.I0, D.fibre)
    errors = []
    for i in np.flatnonzero(keep):
        x = {v: gf(int(values[v][i])) for v in X.variables}
        fibre = solver.solve(K, x, limits)
        if not fibre:
            continue
        point = {**x, **{v: gf(c) for v, c in zip(D.fibre, fibre[0])}}
        if all(spec.evaluate(h, point) == 0 for h in minors.gens):
            continue
        orbit = {_apply(D.action0[g], spec, point) for g in D.G0.elements}
        if orbit != set(fibre):
            errors.append(f"Fibre over {tuple(int(x[v]) for v in X.variables)} is not a G0-orbit")
    return errors


def find_group_element(D: GaloisCoverDesc, point: Sequence[int], target: Sequence[int], K: DiffField) -> str:
    """
    The element g of G0 with g(point) = target.

    Args:
        point: Coordinates (x, z) of a point of Z0 over K.
        target: Coordinates of a point of Z0 over the same base point.

    Raises:
        NoGroupElement: If no element moves ``point`` to ``target``.
        NonUnique: If several do.
    """
    n = len(D.base.variables)
    if tuple(point[:n]) != tuple(target[:n]):
        raise ValueError("Points lie over different base points")
    gf = K.gf
    values = {v: gf(int(c)) for v, c in zip(D.cover.variables, point)}
    spec = K.specializer(D.cover.ring0)
    wanted = tuple(int(c) for c in target[n:])
    found = [g for g in D.G0.elements if _apply(D.action0[g], spec, values) == wanted]
    if not found:
        raise NoGroupElement(f"No element of G0 maps {tuple(point)} to {tuple(target)}")
    if len(found) > 1:
        raise NonUnique(f"Elements {found} all map {tuple(point)} to {tuple(target)}")
    return found[0]


def _frobenius_element(D: GaloisCoverDesc, big: DiffField, x, z, w) -> str:
    """The g0 whose twisted action sends σ̃(z1) = (φx, w) to φ(x, z)."""
    Z = D.cover
    gf = big.gf
    spec = big.specializer(Z.ring0)
    frob_x = {v: big.frobenius(gf(int(c))) for v, c in zip(D.base.variables, x)}
    at_shift = dict(frob_x)
    at_shift.update({v: gf(int(c)) for v, c in zip(D.fibre, w)})
    wanted = tuple(int(big.frobenius(gf(int(c)))) for c in z)
    found = []
    for g in D.G0.elements:
        twisted = tuple(Z.ring0.twist(f, 1) for f in D.action0[g])
        if _apply(twisted, spec, at_shift) == wanted:
            found.append(g)
    if not found:
        raise NoGroupElement(f"No local Frobenius element over {tuple(x)}")
    if len(found) > 1:
        raise NonUnique(f"Local Frobenius over {tuple(x)} is not unique: {found}")
    return found[0]


def _lifts(D: GaloisCoverDesc, x: Sequence[int], K: DiffField, limits: Limits, every: bool):
    """Fibre points (big field, z, w) of Z1 over (x, φx), from the smallest extension with one."""
    Z = D.cover
    solver0, solver1, minors0 = D.solvers
    bound = limits.lift_degree or D.G1.order
    for d in range(1, bound + 1):
        big = K.extension(d) if d > 1 else K
        table = K.embedding(big) if d > 1 else None
        gf = big.gf
        xs = [gf(int(table[c])) if table is not None else gf(int(c)) for c in x]
        known = dict(zip(D.base.variables, xs))
        known.update({s: big.frobenius(v) for s, v in zip(D.base.shifted, xs)})
        spec = big.specializer(Z.ring0)
        found = []
        for z in solver0.solve(big, known, limits):
            point = {**known, **{v: gf(c) for v, c in zip(D.fibre, z)}}
            if all(spec.evaluate(h, point) == 0 for h in minors0.gens):
                raise NotEtale(f"Z0 is not étale over {tuple(x)}")
            for sol in solver1.solve(big, point, limits):
                found.append((big, tuple(int(c) for c in xs), z, sol[: len(D.fibre)]))
                if not every:
                    return found
        if found:
            return found
    raise LiftNotFound(f"No point of Z1 over {tuple(x)} in extensions of degree ≤ {bound}")


def local_frobenius(
    D: GaloisCoverDesc, x: Sequence[int], K: DiffField, limits: Limits = DEFAULT_LIMITS
) -> TwistedConjugacyDomain:
    """
    The twisted conjugacy class of the local Frobenius substitution at a realisation.

    A lift z1 = (x, z, φx, w) of (x, φx) to Z1 is found over a small extension
    of K; the class of the g0 with g0(φx, w) = φ(x, z) does not depend on the lift.

    Raises:
        NotEtale: If Z0 is ramified over ``x``.
        LiftNotFound: If no lift exists within ``limits.lift_degree`` (default |G1|).

    Example:
        >>> kummer = load_catalog().covers["kummer"]
        >>> K = DiffField.from_q(kummer.base.field, 7)
        >>> sorted(local_frobenius(kummer, (3,), K))
        ['g']
    """
    if D.is_trivial:
        return TwistedConjugacyDomain(frozenset({D.G0.identity}))
    big, xs, z, w = _lifts(D, x, K, limits, every=False)[0]
    g0 = _frobenius_element(D, big, xs, z, w)
    return D.twisted_closure([g0])


def lift_classes(
    D: GaloisCoverDesc, x: Sequence[int], K: DiffField, limits: Limits = DEFAULT_LIMITS
) -> List[FrozenSet[str]]:
    """Twisted classes obtained from every lift in the smallest extension with one."""
    if D.is_trivial:
        return [frozenset({D.G0.identity})]
    classes = []
    for big, xs, z, w in _lifts(D, x, K, limits, every=True):
        classes.append(D.twisted_closure([_frobenius_element(D, big, xs, z, w)]).elements)
    return classes


def stabiliser(D: GaloisCoverDesc, level: int, component: Ideal) -> List[str]:
    """Labels whose action maps V(component) into itself."""
    group, actions = (D.G0, D.action0) if level == 0 else (D.G1, D.action1)
    names = D.fibre if level == 0 else D.fibre + D.fibre_shifted
    ring = component.ring
    kept = []
    for g in group.elements:
        mapping = dict(zip(names, actions[g]))
        if all(component.contains(ring.substitute(f, mapping)) for f in component.gens):
            kept.append(g)
    return kept


def restrict_group(group: FiniteGroupDesc, labels: Sequence[str]) -> FiniteGroupDesc:
    ordered = [group.identity] + [g for g in group.elements if g in set(labels) and g != group.identity]
    return FiniteGroupDesc.from_function(ordered, group.mult)


def _untwisted(D: GaloisCoverDesc, ring) -> Ideal:
    """w = z on the fibre coordinates."""
    return Ideal(ring, tuple(ring.gen(w) - ring.gen(z) for z, w in zip(D.fibre, D.fibre_shifted)))


def select_level1_component(
    D: GaloisCoverDesc,
    components: Sequence[Ideal],
    target: Optional[Iterable[str]] = None,
    stage: str = "covers.to_direct_cover",
) -> Tuple[Ideal, List[str]]:
    """
    The component of the level-1 correspondence that carries a twisted action.

    A component qualifies when the part of its stabiliser landing in ``target``
    (all of G0 by default) maps onto ``target`` under both homomorphisms, so
    the restricted cover is again Galois over X1. Among several, the one on
    which the lift fixes the fibre coordinates is preferred, then the first
    in order.

    Returns:
        The component and its stabiliser.

    Raises:
        InvalidCover: If no component is stable enough.
    """
    target = set(D.G0.elements if target is None else target)
    candidates = []
    for component in components:
        kept = [g for g in stabiliser(D, 1, component) if D.hom_pi1[g] in target and D.hom_sigma[g] in target]
        if all(target == {hom[g] for g in kept} for hom in (D.hom_pi1, D.hom_sigma)):
            candidates.append((component, kept))
    if not candidates:
        raise InvalidCover("No component of Z1 is stable under the twisted action", stage=stage)
    for component, kept in candidates:
        if component.contains_ideal(_untwisted(D, component.ring)):
            return component, kept
    return candidates[0]


def to_direct_cover(D: GaloisCoverDesc, limits: Limits = DEFAULT_LIMITS) -> GaloisCoverDesc:
    """
    A direct cover dominated by an almost-direct one.

    Z1 becomes the σ̃-stable component of the closure of Z̃1's image in
    Z0 × Z0ς (see :func:`select_level1_component`); G1 shrinks to its
    stabiliser. A direct cover with an irreducible Z1 is returned unchanged.

    Raises:
        DecompositionIncomplete: If the component cannot be certified prime.
        InvalidCover: If the correspondence is empty or has no stable component.
    """
    Z = D.cover
    direct = Z.as_direct()
    image = direct.closure1().in_ring(direct.ring_xy)
    components = decompose_variety(image, limits)
    if not components:
        raise InvalidCover("The almost-direct cover has an empty correspondence", stage="covers.to_direct_cover")
    if not Z.extra and len(components) == 1:
        return D
    chosen, kept = select_level1_component(D, components)
    if len(components) > 1:
        logger.info("Image of Z1 has %d components; keeping %s", len(components), chosen.texts())
    G1 = restrict_group(D.G1, kept)
    new_cover = direct.with_ideals(direct.I0, Ideal(direct.ring1, chosen.basis()))
    return GaloisCoverDesc(
        D.base,
        new_cover,
        D.G0,
        G1,
        D.action0,
        {g: D.action1[g] for g in G1.elements},
        {g: D.hom_pi1[g] for g in G1.elements},
        {g: D.hom_sigma[g] for g in G1.elements},
        name=D.name,
    )
