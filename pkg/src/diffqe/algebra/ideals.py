"""
Ideals, Gröbner bases and the ideal-theoretic operations built on them.

Every variety, morphism and stratum in diffqe is described by ideals of a
:class:`~diffqe.algebra.polys.Ring`. Bases are computed with sympy's Buchberger
implementation and cached per monomial order on the (immutable) ideal value.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy.polys.groebnertools import groebner as sympy_groebner

from diffqe.algebra.fields import Field
from diffqe.algebra.polys import Ring, format_poly
from diffqe.errors import VariableMismatch

logger = logging.getLogger(__name__)

_AUX = "_s"


@dataclass(frozen=True)
class Ideal:
    """
    An ideal of a polynomial ring given by generators.

    Over an extension field the modulus of ``t`` is an implicit generator.

    Attributes:
        ring: The ambient ring.
        gens: Generators, as polynomials of ``ring``.
    """

    ring: Ring
    gens: Tuple

    def __post_init__(self):
        converted = tuple(self.ring.convert(g) for g in self.gens)
        object.__setattr__(self, "gens", tuple(g for g in converted if g))

    @classmethod
    def from_text(cls, ring: Ring, texts: Iterable[str]) -> "Ideal":
        return cls(ring, tuple(ring.parse(t) for t in texts))

    @classmethod
    def zero(cls, ring: Ring) -> "Ideal":
        return cls(ring, ())

    @classmethod
    def unit(cls, ring: Ring) -> "Ideal":
        return cls(ring, (ring.one,))

    @cached_property
    def _bases(self) -> Dict[str, Tuple]:
        return {}

    def basis(self, order: Optional[str] = None) -> Tuple:
        """Reduced Gröbner basis as polynomials of ``ring.with_order(order)``."""
        order = order or self.ring.order
        if order not in self._bases:
            ring = self.ring.with_order(order)
            polys = [ring.convert(g) for g in self.gens] + ring.relations()
            if not polys:
                basis = ()
            else:
                basis = tuple(sympy_groebner(polys, ring.sympy_ring))
            logger.debug("Gröbner basis (%s) of %d generators has %d elements", order, len(polys), len(basis))
            self._bases[order] = basis
        return self._bases[order]

    def groebner(self, order: Optional[str] = None) -> "Ideal":
        """The same ideal, generated by its reduced basis for ``order``."""
        order = order or self.ring.order
        ring = self.ring.with_order(order)
        result = Ideal(ring, self.basis(order))
        result._bases[order] = self.basis(order)
        return result

    def is_unit(self) -> bool:
        basis = self.basis()
        return len(basis) == 1 and basis[0].is_ground and bool(basis[0])

    def is_zero(self) -> bool:
        return not self.basis() or self.basis() == tuple(self.ring.relations())

    def reduce(self, f):
        """Normal form of ``f`` with respect to the default-order basis."""
        ring = self.ring
        f = ring.convert(f)
        basis = self.basis()
        return f.rem(list(basis)) if basis and f else f

    def contains(self, f) -> bool:
        return not self.reduce(f)

    def __contains__(self, f) -> bool:
        return self.contains(f)

    def contains_ideal(self, other: "Ideal") -> bool:
        return all(self.contains(self.ring.convert(g)) for g in other.gens)

    def equals(self, other: "Ideal") -> bool:
        return self.contains_ideal(other) and other.contains_ideal(self)

    def __add__(self, other: "Ideal") -> "Ideal":
        return Ideal(self.ring, self.gens + tuple(self.ring.convert(g) for g in other.gens))

    def with_gens(self, gens: Iterable) -> "Ideal":
        return Ideal(self.ring, self.gens + tuple(gens))

    def product(self, other: "Ideal") -> "Ideal":
        return Ideal(self.ring, tuple(f * self.ring.convert(g) for f in self.gens for g in other.gens))

    def in_ring(self, ring: Ring) -> "Ideal":
        return Ideal(ring, tuple(ring.convert(g) for g in self.gens))

    def substitute(self, target: Ring, mapping) -> "Ideal":
        return Ideal(target, tuple(target.substitute(g, mapping) for g in self.gens))

    def texts(self) -> List[str]:
        return [format_poly(g, self.ring.field) for g in self.gens]

    def canonical_texts(self) -> List[str]:
        """Sorted texts of the reduced basis, without the field relation."""
        relations = set(self.ring.relations())
        return sorted(format_poly(g, self.ring.field) for g in self.basis() if g not in relations)

    def key(self) -> Tuple[str, ...]:
        return tuple(self.canonical_texts())

    def leading_monomials(self) -> List[Tuple[int, ...]]:
        return [g.LM for g in self.basis()]

    def independent_sets(self) -> List[Tuple[str, ...]]:
        """
        Maximal sets of variables independent modulo the ideal, largest first.

        A set U is independent when no leading monomial of the basis involves
        only variables from U.
        """
        if self.is_unit():
            return []
        symbols = self.ring.symbols
        leading = [set(i for i, e in enumerate(m) if e) for m in self.leading_monomials()]
        for size in range(len(symbols), -1, -1):
            found = []
            for subset in combinations(range(len(symbols)), size):
                chosen = set(subset)
                if not any(lm <= chosen for lm in leading):
                    found.append(tuple(symbols[i] for i in subset))
            if found:
                return found
        return [()]

    def independent_set(self) -> Tuple[str, ...]:
        sets = self.independent_sets()
        return sets[-1] if sets else ()

    def dimension(self) -> int:
        """Krull dimension of V(I); -1 for the empty variety."""
        if self.is_unit():
            return -1
        return len(self.independent_sets()[0])

    def eliminate(self, keep: Sequence[str]) -> "Ideal":
        """
        The elimination ideal I ∩ k[keep], as an ideal of the smaller ring.

        Raises:
            VariableMismatch: If ``keep`` names a variable outside the ring.
        """
        missing = [v for v in keep if v not in self.ring.variables]
        if missing:
            raise VariableMismatch(f"Cannot keep {missing}: not variables of {self.ring}")
        kept = tuple(v for v in self.ring.variables if v in keep)
        dropped = tuple(v for v in self.ring.variables if v not in keep)
        target = Ring(self.ring.field, kept, self.ring.order)
        if not dropped:
            return self.in_ring(target)
        lex = Ring(self.ring.field, dropped + kept, "lex")
        moved = Ideal(lex, tuple(lex.convert(g) for g in self.gens))
        survivors = []
        drop_idx = range(len(dropped))
        for g in moved.basis("lex"):
            if all(m[i] == 0 for m in g.itermonoms() for i in drop_idx):
                survivors.append(target.convert(g))
        relations = set(target.relations())
        return Ideal(target, tuple(g for g in survivors if g not in relations))

    def saturate_by(self, h) -> "Ideal":
        """I : h^∞ via the Rabinowitsch trick."""
        h = self.ring.convert(h)
        aux = _fresh(self.ring)
        big = self.ring.extend([aux])
        s = big.gen(aux)
        extended = Ideal(big, tuple(big.convert(g) for g in self.gens) + (1 - s * big.convert(h),))
        return extended.eliminate(self.ring.variables).in_ring(self.ring)

    def radical_contains(self, f) -> bool:
        """Whether ``f`` vanishes on V(I)."""
        f = self.ring.convert(f)
        if not f:
            return True
        aux = _fresh(self.ring)
        big = self.ring.extend([aux])
        s = big.gen(aux)
        test = Ideal(big, tuple(big.convert(g) for g in self.gens) + (1 - s * big.convert(f),))
        return test.is_unit()

    def intersect(self, other: "Ideal") -> "Ideal":
        aux = _fresh(self.ring)
        big = self.ring.extend([aux])
        s = big.gen(aux)
        gens = tuple(s * big.convert(g) for g in self.gens)
        gens += tuple((1 - s) * big.convert(g) for g in other.gens)
        if not self.gens or not other.gens:
            return Ideal.zero(self.ring)
        return Ideal(big, gens).eliminate(self.ring.variables).in_ring(self.ring)

    def quotient_by(self, h) -> "Ideal":
        """I : (h) for a single polynomial."""
        h = self.ring.convert(h)
        if not h:
            return Ideal.unit(self.ring)
        relations = self.ring.relations()
        if not relations:
            meet = self.intersect(Ideal(self.ring, (h,)))
            return Ideal(self.ring, tuple(g.exquo(h) for g in meet.basis() if g))
        # The modulus joins I only, so every element of the meet is a multiple of h.
        free = Ring(Field.prime(self.ring.field.p), self.ring.symbols, self.ring.order)
        lifted = Ideal(free, tuple(free.convert(g) for g in self.gens + tuple(relations)))
        h_free = free.convert(h)
        meet = lifted.intersect(Ideal(free, (h_free,)))
        return Ideal(self.ring, tuple(self.ring.convert(g.exquo(h_free)) for g in meet.basis() if g))

    def quotient(self, other: "Ideal") -> "Ideal":
        result = None
        for g in other.gens:
            part = self.quotient_by(g)
            result = part if result is None else result.intersect(part)
        return result if result is not None else Ideal.unit(self.ring)

    def saturate(self, other: "Ideal") -> "Ideal":
        result = None
        for g in other.gens:
            part = self.saturate_by(g)
            result = part if result is None else result.intersect(part)
        return result if result is not None else Ideal.unit(self.ring)

    def __repr__(self) -> str:
        return f"Ideal({self.ring}, {self.texts()})"


def _fresh(ring: Ring) -> str:
    name = _AUX
    while name in ring.symbols:
        name += "_"
    return name


def groebner(ideal: Ideal, order: str = "grevlex") -> Ideal:
    """Reduced Gröbner basis of ``ideal`` for ``order`` (cached on the ideal)."""
    return ideal.groebner(order)


def ideal_membership(f, ideal: Ideal) -> bool:
    """
    Whether ``f`` lies in ``ideal``, witnessed by a zero normal form.

    Raises:
        VariableMismatch: If ``f`` uses variables outside the ideal's ring.
    """
    return ideal.contains(f)


def eliminate(ideal: Ideal, keep: Sequence[str]) -> Ideal:
    return ideal.eliminate(keep)


def ideal_combine(first: Ideal, second: Ideal, mode: str) -> Ideal:
    """
    Intersection, quotient or saturation of two ideals of the same ring.

    Args:
        first: The ideal I.
        second: The ideal J.
        mode: ``"intersect"``, ``"quotient"`` (I : J) or ``"saturate"`` (I : J^∞).
    """
    if first.ring.variables != second.ring.variables or first.ring.field != second.ring.field:
        raise VariableMismatch("Ideals live in different rings")
    if mode == "intersect":
        return first.intersect(second)
    if mode == "quotient":
        return first.quotient(second)
    if mode == "saturate":
        return first.saturate(second)
    raise ValueError(f"Unknown combine mode: {mode}")


def dimension(ideal: Ideal) -> int:
    return ideal.dimension()
