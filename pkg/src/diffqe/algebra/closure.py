"""
Relative algebraic closure of a function field in a finitely generated extension.

The extension k(Z)/k(Y) is presented as a tower of generators, each tagged
algebraic (with a polynomial relation over the previous generators and the
parameters of Y) or transcendental. The closure L is collected step by step:
relations free of transcendentals put their generator in L, relations linear
in a transcendental exchange the two, and absolutely irreducible relations
leave L unchanged.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from diffqe.algebra.decompose import hypersurface_certificate, is_prime, quotient_dimension
from diffqe.algebra.factor import factor_multivariate
from diffqe.algebra.fields import Field, FieldExtensionDesc
from diffqe.algebra.ideals import Ideal
from diffqe.algebra.polys import Ring, format_poly
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.errors import PresentationInsufficient

logger = logging.getLogger(__name__)

ALGEBRAIC = "algebraic"
TRANSCENDENTAL = "transcendental"


@dataclass(frozen=True)
class TowerGenerator:
    """
    One step of a function-field tower.

    Attributes:
        name: The adjoined element.
        kind: ``"algebraic"`` or ``"transcendental"``.
        relation: For algebraic steps, a polynomial (text) in ``name``, the
            earlier generators and the parameters that vanishes on ``name``.
    """

    name: str
    kind: str
    relation: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (ALGEBRAIC, TRANSCENDENTAL):
            raise ValueError(f"Unknown generator kind: {self.kind}")
        if self.kind == ALGEBRAIC and not self.relation:
            raise PresentationInsufficient(f"Algebraic generator {self.name} has no relation")


@dataclass(frozen=True)
class FunctionFieldTower:
    """
    A tower k(Y) ⊆ k(Z) with k(Y) = k(parameters).

    Attributes:
        field: The constant field k.
        parameters: Generators of k(Y), algebraically independent over k.
        generators: The tower steps, in order.
    """

    field: Field
    parameters: Tuple[str, ...]
    generators: Tuple[TowerGenerator, ...] = ()

    @property
    def ring(self) -> Ring:
        return Ring(self.field, self.parameters + tuple(g.name for g in self.generators))


def relative_algebraic_closure(tower: FunctionFieldTower, limits: Limits = DEFAULT_LIMITS) -> FieldExtensionDesc:
    """
    The elements of k(Z) algebraic over k(Y), as an extension of k(Y).

    Returns:
        A description whose generators are the tower generators spanning L,
        whose relations are their minimal polynomials, and whose degree is
        [L : k(Y)].

    Raises:
        PresentationInsufficient: If a step's algebraicity over k(Y) cannot be
            certified from its relation.

    Example:
        >>> tower = FunctionFieldTower(Field.prime(5), ("t",), (TowerGenerator("s", "algebraic", "s^2 - t"),))
        >>> relative_algebraic_closure(tower).degree
        2
    """
    ring = tower.ring
    params = set(tower.parameters)
    transcendental: List[str] = []
    closure: List[str] = []
    relations: List = []
    for step in tower.generators:
        if step.kind == TRANSCENDENTAL:
            transcendental.append(step.name)
            continue
        relation = ring.parse(step.relation)
        used = set(ring.variables_of(relation))
        if step.name not in used:
            raise PresentationInsufficient(f"Relation of {step.name} does not involve it")
        known = params | set(closure) | set(transcendental) | {step.name}
        if not used <= known | set(ring.field.extra_symbols):
            raise PresentationInsufficient(f"Relation of {step.name} uses generators adjoined later")
        free = [v for v in transcendental if v in used]
        if not free:
            _adjoin(ring, relation, step.name, closure, relations, limits)
            closure.append(step.name)
            relations.append(relation)
            continue
        exchanged = _exchange(ring, relation, free, params | set(closure))
        if exchanged is not None:
            logger.debug("Exchanging %s for %s", exchanged, step.name)
            transcendental[transcendental.index(exchanged)] = step.name
            continue
        if not closure:
            certificate = hypersurface_certificate(Ideal(ring, (relation,)), tuple(params))
            if certificate is not None:
                transcendental.append(step.name)
                continue
        raise PresentationInsufficient(
            f"Cannot decide whether {step.name} adds algebraic elements: {format_poly(relation, ring.field)}"
        )
    degree = _degree(ring, relations, closure, limits)
    return FieldExtensionDesc(
        base=tower.field,
        generators=tuple(closure),
        relations=tuple(format_poly(r, ring.field) for r in relations),
        degree=degree,
    )


def _adjoin(ring: Ring, relation, name: str, closure: Sequence[str], relations: Sequence, limits: Limits) -> None:
    """Check that ``relation`` is irreducible over k(Y)(closure)."""
    if not closure:
        factors = factor_multivariate(relation, ring, limits)
        involved = [(g, e) for g, e in factors if g.degree(ring.gen(name)) > 0]
        if len(involved) != 1 or involved[0][1] != 1:
            raise PresentationInsufficient(f"Relation of {name} is not irreducible: {format_poly(relation, ring.field)}")
        return
    if not is_prime(Ideal(ring, tuple(relations) + (relation,)), limits):
        raise PresentationInsufficient(f"Relation of {name} is not a minimal polynomial over the closure so far")


def _exchange(ring: Ring, relation, free: Sequence[str], constants: set) -> Optional[str]:
    """A transcendental of degree one whose coefficient involves only constants of L."""
    for v in free:
        x = ring.gen(v)
        if relation.degree(x) != 1:
            continue
        lead = relation.coeff_wrt(x, 1)
        if set(ring.variables_of(lead)) <= constants | set(ring.field.extra_symbols):
            return v
    return None


def _degree(ring: Ring, relations: Sequence, closure: Sequence[str], limits: Limits) -> int:
    if not closure:
        return 1
    ideal = Ideal(ring, tuple(relations))
    return quotient_dimension(ideal, closure)
