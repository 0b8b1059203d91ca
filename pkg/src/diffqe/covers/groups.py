"""
Finite groups given by multiplication tables, and twisted conjugacy domains.
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import permutations, product
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

from diffqe.errors import InvalidCover


@dataclass(frozen=True)
class FiniteGroupDesc:
    """
    A finite group with labelled elements.

    Attributes:
        elements: Element labels; the identity comes first.
        table: ``table[i][j]`` is the label of ``elements[i] * elements[j]``.
    """

    elements: Tuple[str, ...]
    table: Tuple[Tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "table", tuple(tuple(row) for row in self.table))
        if len(set(self.elements)) != len(self.elements) or not self.elements:
            raise InvalidCover("Group labels must be distinct and nonempty", stage="covers.groups")
        if len(self.table) != len(self.elements) or any(len(row) != len(self.elements) for row in self.table):
            raise InvalidCover("Multiplication table has the wrong shape", stage="covers.groups")

    @cached_property
    def _index(self) -> Dict[str, int]:
        return {g: i for i, g in enumerate(self.elements)}

    @property
    def identity(self) -> str:
        return self.elements[0]

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def mult(self, a: str, b: str) -> str:
        try:
            return self.table[self._index[a]][self._index[b]]
        except KeyError as exc:
            raise InvalidCover(f"{exc.args[0]} is not an element of the group", stage="covers.groups") from None

    def product_of(self, labels: Iterable[str]) -> str:
        result = self.identity
        for g in labels:
            result = self.mult(result, g)
        return result

    @cached_property
    def _inverses(self) -> Dict[str, str]:
        return {a: b for a in self.elements for b in self.elements if self.mult(a, b) == self.identity}

    def inverse(self, a: str) -> str:
        return self._inverses[a]

    def validate(self) -> List[str]:
        """Violated group axioms, as messages."""
        errors = []
        labels = set(self.elements)
        for row in self.table:
            for c in row:
                if c not in labels:
                    errors.append(f"Product {c} is not an element")
        if errors:
            return errors
        e = self.identity
        for a in self.elements:
            if self.mult(e, a) != a or self.mult(a, e) != a:
                errors.append(f"{e} is not a two-sided identity for {a}")
            if a not in self._inverses:
                errors.append(f"{a} has no inverse")
        for a, b, c in product(self.elements, repeat=3):
            if self.mult(self.mult(a, b), c) != self.mult(a, self.mult(b, c)):
                errors.append(f"Associativity fails for ({a}, {b}, {c})")
                break
        return errors

    def is_homomorphism(self, target: "FiniteGroupDesc", mapping: Mapping[str, str]) -> bool:
        return all(
            mapping[self.mult(a, b)] == target.mult(mapping[a], mapping[b]) for a in self.elements for b in self.elements
        )

    def subgroup_generated(self, labels: Iterable[str]) -> FrozenSet[str]:
        found = {self.identity}
        frontier = list(labels)
        while frontier:
            g = frontier.pop()
            if g in found:
                continue
            found.add(g)
            frontier.extend(self.mult(g, h) for h in list(found))
            frontier.extend(self.mult(h, g) for h in list(found))
        return frozenset(found)

    def to_json(self) -> Dict:
        return {"elements": list(self.elements), "table": [list(row) for row in self.table]}

    @classmethod
    def from_json(cls, data: Mapping) -> "FiniteGroupDesc":
        elements = tuple(data["elements"])
        if "table" in data:
            return cls(elements, tuple(tuple(row) for row in data["table"]))
        if len(elements) == 1:
            return cls(elements, ((elements[0],),))
        raise InvalidCover("Group description needs a multiplication table", stage="covers.groups")

    @classmethod
    def from_function(cls, elements: Sequence[str], mult) -> "FiniteGroupDesc":
        return cls(tuple(elements), tuple(tuple(mult(a, b) for b in elements) for a in elements))


def trivial_group(label: str = "e") -> FiniteGroupDesc:
    return FiniteGroupDesc((label,), ((label,),))


def cyclic_group(n: int) -> FiniteGroupDesc:
    """ℤ/n with labels ``e, g, g^2, ...``."""
    if n < 1:
        raise ValueError(f"Cyclic group order must be positive, got {n}")
    labels = ["e", "g"] + [f"g^{k}" for k in range(2, n)]
    labels = labels[:n]
    return FiniteGroupDesc.from_function(labels, lambda a, b: labels[(labels.index(a) + labels.index(b)) % n])


def product_label(a: str, b: str) -> str:
    return f"({a},{b})"


def product_group(first: FiniteGroupDesc, second: FiniteGroupDesc) -> FiniteGroupDesc:
    """The direct product, labelled ``(a,b)``."""
    pairs = {product_label(a, b): (a, b) for a in first.elements for b in second.elements}

    def mult(x, y):
        (a, b), (c, d) = pairs[x], pairs[y]
        return product_label(first.mult(a, c), second.mult(b, d))

    return FiniteGroupDesc.from_function(list(pairs), mult)


def quotient_group(group: FiniteGroupDesc, kernel: Iterable[str]) -> Tuple[FiniteGroupDesc, Dict[str, str]]:
    """
    G / N for a normal subgroup N, labelled by the first element of each coset.

    Returns:
        The quotient and the surjection G -> G / N.

    Raises:
        InvalidCover: If ``kernel`` is not a normal subgroup.
    """
    kernel = frozenset(kernel)
    if group.subgroup_generated(kernel) != kernel:
        raise InvalidCover("Kernel is not a subgroup", stage="covers.groups")
    if any(group.mult(group.mult(g, n), group.inverse(g)) not in kernel for g in group for n in kernel):
        raise InvalidCover("Kernel is not normal", stage="covers.groups")
    surjection: Dict[str, str] = {}
    for g in group.elements:
        if g not in surjection:
            for n in group.elements:
                if n in kernel:
                    surjection[group.mult(g, n)] = g
    labels = list(dict.fromkeys(surjection[g] for g in group.elements))
    quotient = FiniteGroupDesc.from_function(labels, lambda a, b: surjection[group.mult(a, b)])
    return quotient, surjection


def permutation_label(perm: Sequence[int]) -> str:
    return "".join(str(i + 1) for i in perm)


def permutation_of(label: str) -> Tuple[int, ...]:
    return tuple(int(c) - 1 for c in label)


def compose_permutations(g: Sequence[int], h: Sequence[int]) -> Tuple[int, ...]:
    """The product gh acting on root indices, ``(gh)[i] = h[g[i]]``."""
    return tuple(h[g[i]] for i in range(len(g)))


def permutation_group(perms: Iterable[Sequence[int]]) -> FiniteGroupDesc:
    """
    A group of permutations of ``0..d-1`` labelled by one-line notation.

    Example:
        >>> permutation_group([(0, 1, 2), (1, 0, 2)]).elements
        ('123', '213')
    """
    perms = sorted({tuple(p) for p in perms})
    if not perms:
        raise ValueError("A permutation group needs at least the identity")
    degree = len(perms[0])
    if degree > 9:
        raise ValueError("Permutation labels support at most nine points")
    identity = tuple(range(degree))
    ordered = [identity] + [p for p in perms if p != identity]
    labels = [permutation_label(p) for p in ordered]
    return FiniteGroupDesc.from_function(
        labels, lambda a, b: permutation_label(compose_permutations(permutation_of(a), permutation_of(b)))
    )


def symmetric_group(degree: int) -> FiniteGroupDesc:
    return permutation_group(permutations(range(degree)))


@dataclass(frozen=True)
class TwistedConjugacyDomain:
    """
    A subset of G0 closed under x ↦ g1^{π1} · x · (g1⁻¹)^{σ} for all g1 in G1.

    Attributes:
        elements: The labels in the domain.
    """

    elements: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, "elements", frozenset(self.elements))

    def __contains__(self, label: str) -> bool:
        return label in self.elements

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(sorted(self.elements))

    def to_json(self) -> List[str]:
        return sorted(self.elements)


def twisted_orbit(
    g0: str,
    G0: FiniteGroupDesc,
    G1: FiniteGroupDesc,
    hom_pi1: Mapping[str, str],
    hom_sigma: Mapping[str, str],
) -> FrozenSet[str]:
    """The twisted conjugacy class of ``g0``."""
    return frozenset(G0.mult(G0.mult(hom_pi1[g1], g0), hom_sigma[G1.inverse(g1)]) for g1 in G1.elements)


def twisted_closure(
    labels: Iterable[str],
    G0: FiniteGroupDesc,
    G1: FiniteGroupDesc,
    hom_pi1: Mapping[str, str],
    hom_sigma: Mapping[str, str],
) -> TwistedConjugacyDomain:
    """
    The least twisted-conjugation-closed subset of G0 containing ``labels``.

    Raises:
        InvalidCover: If a label is not an element of G0.
    """
    found = set()
    for g in labels:
        if g not in G0:
            raise InvalidCover(f"{g} is not an element of G0", stage="covers.twisted_closure")
        found |= twisted_orbit(g, G0, G1, hom_pi1, hom_sigma)
    return TwistedConjugacyDomain(frozenset(found))


def twisted_classes(
    G0: FiniteGroupDesc,
    G1: FiniteGroupDesc,
    hom_pi1: Mapping[str, str],
    hom_sigma: Mapping[str, str],
) -> List[FrozenSet[str]]:
    """The partition of G0 into twisted conjugacy classes, in label order."""
    classes: List[FrozenSet[str]] = []
    seen = set()
    for g in G0.elements:
        if g in seen:
            continue
        orbit = twisted_orbit(g, G0, G1, hom_pi1, hom_sigma)
        seen |= orbit
        classes.append(orbit)
    return classes


def is_twisted_closed(
    domain: Iterable[str],
    G0: FiniteGroupDesc,
    G1: FiniteGroupDesc,
    hom_pi1: Mapping[str, str],
    hom_sigma: Mapping[str, str],
) -> bool:
    labels = frozenset(domain)
    return twisted_closure(labels, G0, G1, hom_pi1, hom_sigma).elements == labels


def preimage(mapping: Mapping[str, str], labels: Iterable[str]) -> FrozenSet[str]:
    targets = set(labels)
    return frozenset(g for g, image in mapping.items() if image in targets)


def image(mapping: Mapping[str, str], labels: Iterable[str]) -> FrozenSet[str]:
    return frozenset(mapping[g] for g in labels)
