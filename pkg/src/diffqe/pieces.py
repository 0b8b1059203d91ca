"""
Locally closed pieces of affine space and of correspondences.

A :class:`LocallyClosed` set is V(closed) minus V(open); a :class:`Piece`
constrains a tuple x at level 0 and the pair (x, σx) at level 1. All set
operations are formal, so complements and intersections stay exact when the
defining polynomials are reduced modulo any prime.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence

import numpy as np

from diffqe.algebra.evaluation import Specializer
from diffqe.algebra.ideals import Ideal
from diffqe.algebra.polys import Ring


def shift(f, source: Ring, target: Ring, names: Mapping[str, str], power: int = 1):
    """Rename the variables of ``f`` and twist its coefficients by ς^power."""
    twisted = source.twist(source.convert(f), power)
    return target.substitute(twisted, {old: target.gen(new) for old, new in names.items()})


@dataclass(frozen=True)
class LocallyClosed:
    """
    The set V(closed) ∖ V(open).

    Attributes:
        closed: Ideal of the closure.
        open: Ideal of the removed closed subset; the unit ideal removes nothing.
    """

    closed: Ideal
    open: Ideal

    @classmethod
    def whole(cls, ring: Ring) -> "LocallyClosed":
        return cls(Ideal.zero(ring), Ideal.unit(ring))

    @classmethod
    def empty(cls, ring: Ring) -> "LocallyClosed":
        return cls(Ideal.unit(ring), Ideal.unit(ring))

    @classmethod
    def closed_set(cls, ideal: Ideal) -> "LocallyClosed":
        return cls(ideal, Ideal.unit(ideal.ring))

    @classmethod
    def from_texts(cls, ring: Ring, closed: Sequence[str] = (), opened: Sequence[str] = ()) -> "LocallyClosed":
        return cls(Ideal.from_text(ring, closed), Ideal.from_text(ring, opened or ["1"]))

    @property
    def ring(self) -> Ring:
        return self.closed.ring

    def is_whole(self) -> bool:
        return self.closed.is_zero() and self.open.is_unit()

    def is_empty(self) -> bool:
        if self.closed.is_unit() or not self.open.gens:
            return True
        return all(self.closed.radical_contains(h) for h in self.open.gens)

    def intersect(self, other: "LocallyClosed") -> "LocallyClosed":
        return LocallyClosed(self.closed + other.closed, self.open.product(other.open))

    def restrict(self, gens) -> "LocallyClosed":
        return LocallyClosed(self.closed.with_gens(gens), self.open)

    def complement(self) -> List["LocallyClosed"]:
        """Disjoint pieces covering the ambient space minus this set."""
        ring = self.ring
        parts = []
        prefix: List = []
        for g in self.closed.gens:
            parts.append(LocallyClosed(Ideal(ring, tuple(prefix)), Ideal(ring, (g,))))
            prefix.append(g)
        if not self.open.is_unit():
            parts.append(LocallyClosed.closed_set(self.closed + self.open))
        return parts

    def principal_parts(self) -> List["LocallyClosed"]:
        """A partition of this set into pieces with principal opens."""
        gens = list(self.open.gens)
        if len(gens) <= 1:
            return [self]
        parts = []
        prefix: List = []
        for h in gens:
            parts.append(LocallyClosed(self.closed.with_gens(prefix), Ideal(self.ring, (h,))))
            prefix.append(h)
        return parts

    def contains(self, spec: Specializer, values: Mapping[str, object]) -> np.ndarray:
        """Membership mask for field values (scalars or broadcastable arrays)."""
        inside = np.asarray(True)
        for g in self.closed.gens:
            inside = inside & np.asarray(spec.evaluate(g, values) == 0)
        outside = np.asarray(False)
        for h in self.open.gens:
            outside = outside | np.asarray(spec.evaluate(h, values) != 0)
        return inside & outside

    def substitute(self, target: Ring, mapping) -> "LocallyClosed":
        return LocallyClosed(self.closed.substitute(target, mapping), self.open.substitute(target, mapping))

    def to_json(self) -> Dict[str, List[str]]:
        data = {"closed": self.closed.texts()}
        if not self.open.is_unit():
            data["open"] = self.open.texts()
        return data

    def key(self):
        return (tuple(self.closed.canonical_texts()), tuple(sorted(self.open.texts())))


@dataclass(frozen=True)
class Piece:
    """
    A locally closed condition on realisations: x in ``level0`` and (x, σx) in ``level1``.

    Attributes:
        level0: Condition in the ambient variables.
        level1: Condition in the ambient and shifted variables.
    """

    level0: LocallyClosed
    level1: LocallyClosed

    @classmethod
    def whole(cls, ring0: Ring, ring1: Ring) -> "Piece":
        return cls(LocallyClosed.whole(ring0), LocallyClosed.whole(ring1))

    @classmethod
    def empty(cls, ring0: Ring, ring1: Ring) -> "Piece":
        return cls(LocallyClosed.empty(ring0), LocallyClosed.whole(ring1))

    @property
    def variables(self):
        return self.level0.ring.variables

    @property
    def shifted(self):
        return self.level1.ring.variables[len(self.variables) :]

    def shift_map(self) -> Dict[str, str]:
        return dict(zip(self.variables, self.shifted))

    def closure1(self) -> Ideal:
        """The level-1 closed ideal with both pullbacks of the level-0 one added."""
        ring0, ring1 = self.level0.ring, self.level1.ring
        gens = [ring1.convert(g) for g in self.level0.closed.gens]
        gens += [shift(g, ring0, ring1, self.shift_map()) for g in self.level0.closed.gens]
        return self.level1.closed.with_gens(gens)

    def is_whole(self) -> bool:
        return self.level0.is_whole() and self.level1.is_whole()

    def is_empty(self) -> bool:
        if self.level0.is_empty():
            return True
        return LocallyClosed(self.closure1(), self.level1.open).is_empty()

    def intersect(self, other: "Piece") -> "Piece":
        return Piece(self.level0.intersect(other.level0), self.level1.intersect(other.level1))

    def complement(self) -> List["Piece"]:
        """Disjoint pieces covering everything outside this piece."""
        whole1 = LocallyClosed.whole(self.level1.ring)
        parts = [Piece(c, whole1) for c in self.level0.complement()]
        parts += [Piece(self.level0, c) for c in self.level1.complement()]
        return parts

    def contains(self, spec0: Specializer, spec1: Specializer, x: Mapping[str, object], y: Mapping[str, object]):
        """Membership mask; ``y`` holds the values of σx under the shifted names."""
        both = dict(x)
        both.update(y)
        return self.level0.contains(spec0, x) & self.level1.contains(spec1, both)

    def dimension(self) -> int:
        return max(self.level0.closed.dimension(), -1) + max(self.closure1().dimension(), -1)

    def to_json(self) -> Dict[str, List[str]]:
        data = self.level0.to_json()
        level1 = self.level1.to_json()
        if level1["closed"]:
            data["closed1"] = level1["closed"]
        if "open" in level1:
            data["open1"] = level1["open"]
        return data

    @classmethod
    def from_json(cls, data: Mapping, ring0: Ring, ring1: Ring) -> "Piece":
        return cls(
            LocallyClosed.from_texts(ring0, data.get("closed", []), data.get("open", [])),
            LocallyClosed.from_texts(ring1, data.get("closed1", []), data.get("open1", [])),
        )

    def key(self):
        return (self.level0.key(), self.level1.key())
