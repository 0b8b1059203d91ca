"""
Galois closures of finite étale projections and pushforwards of covers along fibrations.
"""

import logging
from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from diffqe.algebra.closure import ALGEBRAIC, TRANSCENDENTAL, FunctionFieldTower, TowerGenerator, relative_algebraic_closure
from diffqe.algebra.decompose import decompose_variety, splitting_algebra_component
from diffqe.algebra.ideals import Ideal
from diffqe.algebra.polys import Ring
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.covers.galois_cover import GaloisCoverDesc
from diffqe.covers.groups import (
    FiniteGroupDesc,
    permutation_group,
    permutation_of,
    product_group,
    product_label,
    quotient_group,
)
from diffqe.errors import InvalidCover, UnsupportedCase
from diffqe.pieces import LocallyClosed, shift
from diffqe.presentations import DirectPresentation, PresentationMorphism, fresh_names

logger = logging.getLogger(__name__)


def image_presentation(X: DirectPresentation, target: DirectPresentation) -> DirectPresentation:
    """Closures of the images of X0 and X1 under the projection to ``target``'s coordinates."""
    X = X.as_direct()
    Y = target.as_direct()
    I0 = Ideal(Y.ring0, X.I0.eliminate(Y.variables).gens)
    I1 = Ideal(Y.ring1, X.closure1().eliminate(Y.variables + Y.shifted).gens)
    return DirectPresentation(Y.field, Y.variables, Y.shifted, I0, I1, (), Y.name)


def _stable(ideal: Ideal, mapping: Mapping[str, object]) -> bool:
    ring = ideal.ring
    return all(ideal.contains(ring.substitute(g, mapping)) for g in ideal.gens)


@dataclass
class GaloisClosure:
    """
    A Galois closure Z̃ of a finite étale projection X -> Y with one fibre coordinate u.

    Z̃0 is a component of the splitting algebra of the monic fibre polynomial F
    with roots r_i; Z̃1 is a component over it with shifted roots R_j. Permutations
    act by r_i -> r_{π(i)}.

    Attributes:
        source: The presentation X.
        cover: Z̃ as a cover of the image of X in Y.
        fibre_variable: The coordinate u of X over Y.
        polynomial: F, monic in u.
        roots: Names r_1..r_d.
        shifted_roots: Names R_1..R_d.
        critical: Base ideal of points over which F has a repeated root.
    """

    source: DirectPresentation
    cover: GaloisCoverDesc
    fibre_variable: Optional[str]
    polynomial: object
    roots: Tuple[str, ...]
    shifted_roots: Tuple[str, ...]
    critical: Ideal

    @property
    def degree(self) -> int:
        return len(self.roots)

    def root_images(self, i: int, j: int) -> Dict[str, object]:
        """Substitution u -> r_i, u' -> R_j into the cover's level-1 ring."""
        ring = self.cover.cover.ring_xy
        if self.fibre_variable is None:
            return {}
        shifted = self.source.shift_map()[self.fibre_variable]
        return {self.fibre_variable: ring.gen(self.roots[i]), shifted: ring.gen(self.shifted_roots[j])}

    def root_image0(self, i: int) -> Dict[str, object]:
        ring = self.cover.cover.ring0
        if self.fibre_variable is None:
            return {}
        return {self.fibre_variable: ring.gen(self.roots[i])}


def fibre_polynomial(X: DirectPresentation, base: Sequence[str], u: str) -> Tuple[object, object]:
    """
    The least-degree polynomial of X0 in ``u`` over the base, with its leading coefficient.

    Both live in the lex ring ``(u,) + base``.

    Raises:
        UnsupportedCase: If ``u`` is not algebraic over the base.
    """
    lex = Ring(X.field, (u,) + tuple(base), "lex")
    moved = Ideal(lex, tuple(lex.convert(g) for g in X.I0.gens))
    x = lex.gen(u)
    candidates = [g for g in moved.basis("lex") if g.degree(x) > 0]
    if not candidates:
        raise UnsupportedCase(f"{u} is not algebraic over the base", stage="covers.galois_closure")
    F = min(candidates, key=lambda g: g.degree(x))
    return F, F.coeff_wrt(x, F.degree(x))


def _monic_fibre_polynomial(X: DirectPresentation, base: Sequence[str], u: str):
    F, lead = fibre_polynomial(X, base, u)
    if not lead.is_ground:
        raise UnsupportedCase(f"Fibre polynomial of {u} is not monic", stage="covers.galois_closure")
    ring = Ring(X.field, tuple(base) + (u,))
    return ring.convert(F.quo_ground(lead.LC)), ring


def _graph_components(seed: Ideal, P0: Ideal, roots: Sequence[str], shifted: Sequence[str], perms):
    """
    Components of the closure correspondence on which each shifted root is a permuted root.

    A candidate qualifies when every shifted coordinate is a polynomial in the
    base and the roots modulo it, and its contraction to those is P0; it is then
    isomorphic to P0 and so prime. Callers check that P0 has the dimension of
    the correspondence, which makes it a minimal prime of ``seed``.
    """
    big = seed.ring
    kept = tuple(v for v in big.variables if v not in shifted)
    lex = Ring(big.field, tuple(shifted) + kept, "lex")
    shifted_roots = shifted[len(shifted) - len(roots):]
    for perm in perms:
        links = [big.gen(R) - big.gen(roots[perm[i]]) for i, R in enumerate(shifted_roots)]
        candidate = seed.with_gens(links)
        if candidate.is_unit():
            continue
        basis = list(Ideal(lex, tuple(lex.convert(g) for g in candidate.gens)).basis("lex"))
        if any(set(lex.variables_of(lex.gen(s).rem(basis))) & set(shifted) for s in shifted):
            continue
        if not candidate.eliminate(kept).in_ring(P0.ring).equals(P0):
            continue
        yield candidate


def closure_of(X: DirectPresentation, Y: DirectPresentation, limits: Limits = DEFAULT_LIMITS) -> GaloisClosure:
    """
    The Galois closure of the projection from a directly integral X to Y's coordinates.

    Raises:
        UnsupportedCase: If X has more than one fibre coordinate or its fibre
            polynomial is not monic.
        DecompositionIncomplete: If a component cannot be certified prime.
    """
    X = X.as_direct()
    base = Y.variables
    fibre = tuple(v for v in X.variables if v not in base)
    image = image_presentation(X, Y)
    if not fibre:
        trivial = GaloisCoverDesc.trivial(image)
        return GaloisClosure(X, trivial, None, None, (), (), Ideal.zero(image.ring0))
    if len(fibre) != 1:
        raise UnsupportedCase(f"Finite part has {len(fibre)} fibre coordinates", stage="covers.galois_closure")
    u = fibre[0]
    F, ring = _monic_fibre_polynomial(X, base, u)
    critical = (X.I0 + Ideal(X.ring0, (X.ring0.convert(F).diff(X.ring0.gen(u)),))).eliminate(base)
    critical = Ideal(image.ring0, critical.gens)
    taken = X.variables + X.shifted
    prefix = "r"
    while any(n.startswith(prefix) for n in taken):
        prefix += "_"
    P0, roots = splitting_algebra_component(F, ring, u, image.I0.gens, limits, prefix=prefix)
    shifted_roots = tuple(fresh_names(prefix.upper(), len(roots) + 1, taken + roots)[1:])
    d = len(roots)
    ring0 = P0.ring
    G0_perms = [
        p for p in permutations(range(d)) if _stable(P0, {roots[i]: ring0.gen(roots[p[i]]) for i in range(d)})
    ]
    G0 = permutation_group(G0_perms)
    big = Ring(X.field, base + roots + Y.shifted + shifted_roots)
    rename = dict(zip(base + roots, Y.shifted + shifted_roots))
    seed = [big.convert(g) for g in P0.gens]
    seed += [shift(g, ring0, big, rename) for g in P0.gens]
    seed += [big.convert(g) for g in image.I1.gens]
    guard = [big.convert(c) * shift(c, image.ring0, big, dict(zip(base, Y.shifted))) for c in critical.gens]
    guard_ideal = Ideal(big, tuple(guard)) if guard else Ideal.unit(big)
    seed_ideal = Ideal(big, tuple(seed))
    Q0 = None
    if P0.dimension() == image.closure1().dimension():
        for candidate in _graph_components(seed_ideal, P0, roots, Y.shifted + shifted_roots, G0_perms):
            if not LocallyClosed(candidate, guard_ideal).is_empty():
                Q0 = candidate
                break
    if Q0 is None:
        for component in decompose_variety(seed_ideal, limits):
            if not LocallyClosed(component, guard_ideal).is_empty():
                Q0 = component
                break
    if Q0 is None:
        raise UnsupportedCase("No component of the closure correspondence is étale", stage="covers.galois_closure")
    pairs = []
    for a in G0.elements:
        for b in G0.elements:
            pa, pb = permutation_of(a), permutation_of(b)
            mapping = {roots[i]: big.gen(roots[pa[i]]) for i in range(d)}
            mapping.update({shifted_roots[i]: big.gen(shifted_roots[pb[i]]) for i in range(d)})
            if _stable(Q0, mapping):
                pairs.append((a, b))
    full = product_group(G0, G0)
    labels = [product_label(G0.identity, G0.identity)] + [
        product_label(a, b) for a, b in pairs if (a, b) != (G0.identity, G0.identity)
    ]
    G1 = FiniteGroupDesc.from_function(labels, full.mult)
    Z = DirectPresentation(X.field, base + roots, Y.shifted + shifted_roots, Ideal(ring0, P0.basis()), Q0.in_ring(big))
    action0 = {g: tuple(ring0.gen(roots[i]) for i in permutation_of(g)) for g in G0.elements}
    action1 = {}
    hom_pi1, hom_sigma = {}, {}
    for a, b in pairs:
        label = product_label(a, b)
        action1[label] = tuple(big.gen(roots[i]) for i in permutation_of(a)) + tuple(
            big.gen(shifted_roots[i]) for i in permutation_of(b)
        )
        hom_pi1[label], hom_sigma[label] = a, b
    cover = GaloisCoverDesc(image, Z, G0, G1, action0, action1, hom_pi1, hom_sigma, name=f"closure({X.name or u})")
    logger.info("Galois closure of degree %d: |G0|=%d, |G1|=%d", d, G0.order, G1.order)
    return GaloisClosure(X, cover, u, F, roots, shifted_roots, critical)


def galois_closure(morphism: PresentationMorphism, limits: Limits = DEFAULT_LIMITS) -> GaloisClosure:
    """
    The Galois closure of a directly finite étale morphism of directly integral presentations.

    The morphism is replaced by the projection from its graph; see :func:`closure_of`.
    """
    graph, projection = morphism.as_projection()
    return closure_of(graph, projection.target, limits)


@dataclass
class Pushforward:
    """
    A cover of the target together with the group surjection from the source cover.

    Attributes:
        cover: f_*Z over the image of X.
        surjection: G0 label of Z -> G0 label of f_*Z.
        kernel: Labels of Gal(Z / f*f_*Z).
    """

    cover: GaloisCoverDesc
    surjection: Dict[str, str]
    kernel: List[str] = field(default_factory=list)

    def push_domain(self, labels) -> List[str]:
        return sorted({self.surjection[g] for g in labels})


def function_field_tower(ideal: Ideal, base: Sequence[str], stage: str = "covers.pushforward_cover") -> FunctionFieldTower:
    """
    k(V(ideal)) over k(base) as a tower of the remaining coordinates, in ring order.

    Raises:
        UnsupportedCase: If the base coordinates are dependent on V(ideal) or a
            step has several relations.
    """
    ring = ideal.ring
    steps = tuple(v for v in ring.variables if v not in base)
    lex = Ring(ring.field, tuple(reversed(steps)) + tuple(base), "lex")
    basis = Ideal(lex, tuple(lex.convert(g) for g in ideal.gens)).basis("lex")
    relations = set(lex.relations())
    if any(not set(lex.variables_of(g)) & set(steps) for g in basis if g not in relations):
        raise UnsupportedCase("The base coordinates are not independent", stage=stage)
    generators = []
    for k, v in enumerate(steps):
        later = set(steps[k + 1 :])
        own = [g for g in basis if v in lex.variables_of(g) and not set(lex.variables_of(g)) & later]
        if not own:
            generators.append(TowerGenerator(v, TRANSCENDENTAL))
        elif len(own) == 1:
            generators.append(TowerGenerator(v, ALGEBRAIC, lex.format(own[0])))
        else:
            raise UnsupportedCase(f"{v} has several relations", stage=stage)
    return FunctionFieldTower(ring.field, tuple(base), tuple(generators))


def _descends(D: GaloisCoverDesc, base: Sequence[str]) -> bool:
    """Whether Z is pulled back from base x fibre coordinates of the cover."""
    X, Z = D.base, D.cover
    keep0 = tuple(base) + D.fibre
    fibre_x = [v for v in X.variables if v not in base]
    fibre_x1 = fibre_x + [X.shift_map()[v] for v in fibre_x]
    for actions in (D.action0, D.action1):
        for polys in actions.values():
            for f in polys:
                ring = Z.ring0 if actions is D.action0 else Z.ring_xy
                if set(ring.variables_of(f)) & set(fibre_x1):
                    return False
    pulled0 = Z.I0.eliminate(keep0).in_ring(Z.ring0) + X.I0.in_ring(Z.ring0)
    if not pulled0.equals(Z.I0):
        return False
    shifted_base = tuple(X.shift_map()[v] for v in base)
    keep1 = tuple(base) + D.fibre + shifted_base + D.fibre_shifted
    level1 = D.level1_ideal()
    pulled1 = level1.eliminate(keep1).in_ring(level1.ring) + X.as_direct().closure1().in_ring(level1.ring)
    return pulled1.equals(level1)


def _closed_part(D: GaloisCoverDesc, base: Sequence[str], part: Sequence[str]) -> bool:
    """Whether both actions send the ``part`` fibre coordinates into base x part."""
    Z = D.cover
    k = len(D.fibre)
    idx = [D.fibre.index(v) for v in part]
    shifted = [Z.shift_map()[v] for v in tuple(base) + tuple(part)]
    allowed0 = set(base) | set(part)
    allowed1 = allowed0 | set(shifted)
    for polys in D.action0.values():
        if any(not set(Z.ring0.variables_of(polys[i])) <= allowed0 for i in idx):
            return False
    for polys in D.action1.values():
        if any(not set(Z.ring_xy.variables_of(polys[j])) <= allowed1 for i in idx for j in (i, k + i)):
            return False
    return True


def _descent(D: GaloisCoverDesc, base: Sequence[str], part: Sequence[str], image: DirectPresentation) -> Pushforward:
    """
    The cover of the image cut out by base x ``part``, acted on by the quotients of G0 and G1.

    The kernels are the elements fixing every ``part`` coordinate (and its shift at level one).
    """
    Z = D.cover
    k = len(D.fibre)
    idx = [D.fibre.index(v) for v in part]
    shift_map = Z.shift_map()
    variables = tuple(base) + tuple(part)
    shifted = tuple(shift_map[v] for v in variables)
    kernel0 = [g for g in D.G0.elements if all(D.action0[g][i] == Z.ring0.gen(D.fibre[i]) for i in idx)]
    kernel1 = [
        g
        for g in D.G1.elements
        if all(
            D.action1[g][i] == Z.ring_xy.gen(D.fibre[i]) and D.action1[g][k + i] == Z.ring_xy.gen(D.fibre_shifted[i])
            for i in idx
        )
    ]
    G0, q0 = quotient_group(D.G0, kernel0)
    G1, _ = quotient_group(D.G1, kernel1)
    ring0 = Ring(Z.field, variables)
    ring1 = Ring(Z.field, variables + shifted)
    I0 = Ideal(ring0, Z.I0.eliminate(variables).gens)
    I1 = Ideal(ring1, D.level1_ideal().eliminate(variables + shifted).gens)
    pushed = DirectPresentation(Z.field, variables, shifted, I0, I1, (), Z.name)
    action0 = {g: tuple(ring0.convert(D.action0[g][i]) for i in idx) for g in G0.elements}
    action1 = {
        g: tuple(ring1.convert(D.action1[g][i]) for i in idx) + tuple(ring1.convert(D.action1[g][k + i]) for i in idx)
        for g in G1.elements
    }
    hom_pi1 = {g: q0[D.hom_pi1[g]] for g in G1.elements}
    hom_sigma = {g: q0[D.hom_sigma[g]] for g in G1.elements}
    logger.debug("Descended %s onto %s with kernel %s", D.name, list(variables), kernel0)
    cover = GaloisCoverDesc(image, pushed, G0, G1, action0, action1, hom_pi1, hom_sigma, D.name)
    return Pushforward(cover, q0, kernel0)


def pushforward_cover(
    morphism: PresentationMorphism, D: GaloisCoverDesc, limits: Limits = DEFAULT_LIMITS
) -> Pushforward:
    """
    Push a cover of X forward along a coordinate projection with integral fibres.

    f_*Z is the cover of the target whose function field is the relative
    algebraic closure of k(Y) in k(Z). Covers pulled back from the target
    descend with the same groups. When the closure is generated by fibre
    coordinates that the groups act on among themselves, the cover descends
    onto them and the groups pass to the quotient by the elements fixing
    those coordinates. A trivial closure gives the trivial cover.

    Raises:
        UnsupportedCase: If the morphism is not a projection, or the closure
            needs coordinates of X or coordinates the groups mix with others.
        PresentationInsufficient: If the relative algebraic closure cannot be certified.
    """
    if not morphism.is_projection() or morphism.source.variables != D.base.variables:
        raise UnsupportedCase("Pushforward needs a coordinate projection from the cover's base", stage="covers.pushforward_cover")
    Y = morphism.target
    base = Y.variables
    image = image_presentation(D.base, Y)
    if D.is_trivial:
        return Pushforward(GaloisCoverDesc.trivial(image), {D.G0.identity: "e"}, [D.G0.identity])
    if _descends(D, base):
        return _descent(D, base, D.fibre, image)
    closure = relative_algebraic_closure(function_field_tower(D.cover.I0, base), limits)
    if not closure.generators:
        return Pushforward(GaloisCoverDesc.trivial(image), {g: "e" for g in D.G0.elements}, list(D.G0.elements))
    part = tuple(v for v in D.fibre if v in closure.generators)
    if len(part) == len(closure.generators) and _closed_part(D, base, part):
        return _descent(D, base, part, image)
    raise UnsupportedCase(
        f"Relative algebraic closure {list(closure.generators)} is not spanned by a stable set of fibre coordinates",
        stage="covers.pushforward_cover",
    )


def product_cover(first: GaloisCoverDesc, second: GaloisCoverDesc) -> GaloisCoverDesc:
    """
    The fibre product of two covers of the same base with the product groups.

    Fibre coordinates of ``second`` are renamed away from clashes.
    """
    if first.base.variables != second.base.variables:
        raise InvalidCover("Covers live over different bases", stage="covers.product_cover")
    X = first.base
    A, B = first.cover, second.cover
    taken = A.variables + A.shifted + A.extra
    rename: Dict[str, str] = {}
    for v, s in zip(second.fibre, second.fibre_shifted):
        rename[v] = v if v not in taken else fresh_names(f"{v}_", 1, taken + tuple(rename.values()))[0]
        rename[s] = s if s not in taken else fresh_names(f"{s}_", 1, taken + tuple(rename.values()))[0]
    extra = A.extra + tuple(e if e not in taken else f"{e}_" for e in B.extra)
    rename.update(dict(zip(B.extra, extra[len(A.extra) :])))
    variables = A.variables + tuple(rename[v] for v in second.fibre)
    shifted = A.shifted + tuple(rename[s] for s in second.fibre_shifted)
    ring0 = Ring(X.field, variables)
    ring1 = Ring(X.field, variables + shifted + extra)
    ring_xy = Ring(X.field, variables + shifted)
    m0 = {v: ring0.gen(rename[v]) for v in second.fibre}
    m1 = {v: ring1.gen(rename[v]) for v in second.fibre + second.fibre_shifted + B.extra}
    mxy = {v: ring_xy.gen(rename[v]) for v in second.fibre + second.fibre_shifted}
    I0 = A.I0.in_ring(ring0) + B.I0.substitute(ring0, m0)
    I1 = A.I1.in_ring(ring1) + B.I1.substitute(ring1, m1)
    Z = DirectPresentation(X.field, variables, shifted, I0, I1, extra, f"{first.name}x{second.name}")
    G0 = product_group(first.G0, second.G0)
    G1 = product_group(first.G1, second.G1)
    action0, action1, hom_pi1, hom_sigma = {}, {}, {}, {}
    for a in first.G0.elements:
        for b in second.G0.elements:
            action0[product_label(a, b)] = tuple(ring0.convert(f) for f in first.action0[a]) + tuple(
                ring0.substitute(f, m0) for f in second.action0[b]
            )
    k, j = len(first.fibre), len(second.fibre)
    for a in first.G1.elements:
        for b in second.G1.elements:
            left = [ring_xy.convert(f) for f in first.action1[a]]
            right = [ring_xy.substitute(f, mxy) for f in second.action1[b]]
            label = product_label(a, b)
            action1[label] = tuple(left[:k] + right[:j] + left[k:] + right[j:])
            hom_pi1[label] = product_label(first.hom_pi1[a], second.hom_pi1[b])
            hom_sigma[label] = product_label(first.hom_sigma[a], second.hom_sigma[b])
    return GaloisCoverDesc(X, Z, G0, G1, action0, action1, hom_pi1, hom_sigma, name=Z.name)
