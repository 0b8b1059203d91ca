"""
Points and realisations of presentations over Frobenius difference fields.

A :class:`DiffField` is F_{q^m} with the automorphism x -> x^q. Realisations
are found by exhaustive, vectorised scans over the field; the extra
coordinates of almost-direct presentations are solved fibre by fibre.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy

from diffqe.algebra.evaluation import Specializer, parse_element, render_element
from diffqe.algebra.fields import Field, embedding_table, finite_field, generator_root
from diffqe.algebra.ideals import Ideal
from diffqe.algebra.polys import Ring
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.errors import BudgetExceeded, UnsupportedField

logger = logging.getLogger(__name__)

Point = Tuple[int, ...]


@dataclass(frozen=True)
class DiffField:
    """
    The Frobenius difference field (F_{q^m}, x -> x^q) with q = p^e.

    Attributes:
        field: The base field of the presentations evaluated here.
        p: The characteristic.
        e: Frobenius power, q = p^e.
        m: Coordinates range over F_{q^m}.
        generator: Integer encoding of the image of ``t`` for extension base
            fields; by default the least root of the modulus.
    """

    field: Field
    p: int
    e: int = 1
    m: int = 1
    generator: Optional[int] = None

    def __post_init__(self):
        if not sympy.isprime(self.p):
            raise UnsupportedField(f"{self.p} is not prime")
        if self.e < 1 or self.m < 1:
            raise UnsupportedField("Frobenius power and degree must be positive")
        base = self.field
        if base.is_finite and base.p != self.p:
            raise UnsupportedField(f"{base} has characteristic {base.p}, not {self.p}")
        if base.kind == "Fq":
            if (self.e * self.m) % base.degree:
                raise UnsupportedField(f"{base} does not embed in F_{self.p}^{self.e * self.m}")
            if self.e % base.degree != 1 % base.degree:
                raise UnsupportedField(f"x -> x^{self.q} does not restrict to the Frobenius of {base}")

    @classmethod
    def from_q(cls, field: Field, q: int, m: int = 1) -> "DiffField":
        """
        Build the field from q and m.

        Raises:
            UnsupportedField: If q is not a prime power compatible with ``field``.
        """
        if sympy.isprime(q):
            p, e = q, 1
        else:
            powers = sympy.perfect_power(q)
            if not powers or not sympy.isprime(powers[0]):
                raise UnsupportedField(f"{q} is not a prime power")
            p, e = int(powers[0]), int(powers[1])
        return cls(field, p, e, m)

    @property
    def q(self) -> int:
        return self.p**self.e

    @property
    def order(self) -> int:
        return self.q**self.m

    @cached_property
    def gf(self):
        return finite_field(self.p, self.e * self.m)

    @cached_property
    def generator_value(self) -> Optional[int]:
        if self.field.kind != "Fq":
            return None
        if self.generator is not None:
            return self.generator
        return generator_root(self.field, self.gf)

    def specializer(self, ring: Ring) -> Specializer:
        return Specializer(ring, self.gf, self.generator_value)

    def elements(self):
        return self.gf(np.arange(self.order, dtype=np.int64))

    def frobenius(self, values, power: int = 1):
        """Apply x -> x^(q^power) elementwise."""
        return values ** (self.q**power)

    def extension(self, degree: int) -> "DiffField":
        """The field F_{q^(m*degree)}, with ``t`` mapped compatibly."""
        big = DiffField(self.field, self.p, self.e, self.m * degree)
        if self.field.kind == "Fq":
            embedded = int(self.embedding(big)[self.generator_value])
            big = DiffField(self.field, self.p, self.e, self.m * degree, embedded)
        return big

    def embedding(self, big: "DiffField") -> np.ndarray:
        """Integer table of the inclusion F_{q^m} -> ``big``."""
        if big.m % self.m or big.p != self.p or big.e != self.e:
            raise UnsupportedField(f"{self} is not a subfield of {big}")
        return embedding_table(self.gf, big.gf)

    def render(self, value: int) -> str:
        return render_element(value, self.gf)

    def parse(self, text: str) -> int:
        return parse_element(text, self.gf)

    def to_json(self) -> Dict[str, int]:
        return {"p": self.p, "q": self.q, "m": self.m}

    def __str__(self) -> str:
        return f"(F_{self.q}^{self.m}, x^{self.q})"


@dataclass(frozen=True)
class DiffPoint:
    """
    An (F, φ)-point: x1 lies on the correspondence over x0 and φ(x0).

    Attributes:
        x0: The realisation, one integer-encoded element per variable.
        x1: Coordinates of the correspondence point (x0, φ(x0), extra).
    """

    x0: Point
    x1: Point


class FibreSolver:
    """
    All solutions of an ideal in some variables once the others are fixed.

    A lexicographic basis with the unknowns largest makes the system
    triangular; each unknown is found among the common roots of the basis
    elements whose largest variable it is. Candidates are finally checked
    against every generator, so the answer is exact.
    """

    def __init__(self, ideal: Ideal, unknown: Sequence[str]):
        ring = ideal.ring
        self.unknown = tuple(unknown)
        known = tuple(v for v in ring.variables if v not in self.unknown)
        self.ring = Ring(ring.field, tuple(reversed(self.unknown)) + known, "lex")
        self.gens = tuple(self.ring.convert(g) for g in ideal.gens)
        relations = set(self.ring.relations())
        self.constraints: List = []
        self.levels: List[List] = [[] for _ in self.unknown]
        for g in Ideal(self.ring, self.gens).basis("lex"):
            if g in relations:
                continue
            used = self.ring.variables_of(g)
            top = max((self.unknown.index(v) for v in used if v in self.unknown), default=-1)
            if top >= 0:
                self.levels[top].append(g)
            else:
                self.constraints.append(g)

    def solve(self, field: DiffField, known: Mapping[str, object], limits: Limits = DEFAULT_LIMITS) -> List[Point]:
        """Integer-encoded solutions in ``field``, sorted."""
        gf = field.gf
        spec = field.specializer(self.ring)
        if any(spec.evaluate(g, known) != 0 for g in self.constraints):
            return []
        partials: List[Dict[str, object]] = [{}]
        for level, var in zip(self.levels, self.unknown):
            extended = []
            for part in partials:
                values = dict(known)
                values.update(part)
                for c in self._candidates(level, var, spec, values, field, limits):
                    extended.append({**part, var: gf(c)})
            partials = extended
            if not partials:
                return []
        solutions = []
        for part in partials:
            values = dict(known)
            values.update(part)
            if all(spec.evaluate(g, values) == 0 for g in self.gens):
                solutions.append(tuple(int(part[v]) for v in self.unknown))
        return sorted(set(solutions))

    @staticmethod
    def _candidates(level, var: str, spec: Specializer, values, field: DiffField, limits: Limits) -> Iterable[int]:
        candidates: Optional[set] = None
        for g in level:
            poly = spec.univariate(g, var, values)
            if not np.any(poly.coeffs):
                continue
            roots = set(int(r) for r in poly.roots()) if poly.degree > 0 else set()
            candidates = roots if candidates is None else candidates & roots
            if not candidates:
                return []
        if candidates is None:
            if field.order > limits.budget:
                raise BudgetExceeded(f"Unconstrained coordinate {var} over a field of size {field.order}")
            return range(field.order)
        return sorted(candidates)


def _grid(field: DiffField, n: int, limits: Limits) -> List[np.ndarray]:
    size = field.order**n
    if size > limits.budget:
        raise BudgetExceeded(f"{size} tuples over F_{field.q}^{field.m} exceed the budget of {limits.budget}")
    if n == 0:
        return []
    grids = np.meshgrid(*[np.arange(field.order, dtype=np.int64)] * n, indexing="ij")
    return [g.ravel() for g in grids]


def _mask(spec: Specializer, gens, values, size: int) -> np.ndarray:
    mask = np.ones(size, dtype=bool)
    for g in gens:
        mask &= np.broadcast_to(np.asarray(spec.evaluate(g, values) == 0), (size,))
    return mask


def enumerate_realisations(presentation, field: DiffField, limits: Limits = DEFAULT_LIMITS) -> List[Point]:
    """
    The (F, φ)-realisations {x in X0(F) : (x, φ(x)) in X1(F)}, sorted.

    Raises:
        BudgetExceeded: If |F|^n exceeds ``limits.budget``.

    Example:
        >>> P = DirectPresentation.from_json({"field": "Q", "n": 1, "I0": ["0"], "I1": ["y0 - x0^2"]})
        >>> enumerate_realisations(P, DiffField.from_q(Field.rationals(), 3, 1))
        [(0,), (1,)]
    """
    rows = _realisation_rows(presentation, field, limits)
    return sorted(rows)


def _realisation_rows(presentation, field: DiffField, limits: Limits) -> List[Point]:
    P = presentation
    gf = field.gf
    n = len(P.variables)
    columns = _grid(field, n, limits)
    size = len(columns[0]) if columns else 1
    spec0 = field.specializer(P.ring0)
    x = {v: gf(col) for v, col in zip(P.variables, columns)}
    keep = _mask(spec0, P.I0.gens, x, size)
    x = {v: arr[keep] for v, arr in x.items()}
    count = int(keep.sum())
    if not count:
        return []
    values = dict(x)
    values.update({s: field.frobenius(x[v]) for v, s in zip(P.variables, P.shifted)})
    if not P.extra:
        spec1 = field.specializer(P.ring1)
        keep = _mask(spec1, P.I1.gens, values, count)
        return [tuple(int(values[v][i]) for v in P.variables) for i in np.flatnonzero(keep)]
    solver = FibreSolver(P.I1, P.extra)
    rows = []
    for i in range(count):
        known = {name: arr[i] for name, arr in values.items()}
        if solver.solve(field, known, limits):
            rows.append(tuple(int(x[v][i]) for v in P.variables))
    return rows


def enumerate_points(presentation, field: DiffField, limits: Limits = DEFAULT_LIMITS) -> List[DiffPoint]:
    """
    The (F, φ)-points: pairs (x0, x1) with x1 in X1 over (x0, φ(x0)).

    Direct presentations have exactly one point per realisation.
    """
    P = presentation
    gf = field.gf
    realisations = enumerate_realisations(P, field, limits)
    if not P.extra:
        points = []
        for x0 in realisations:
            shifted = tuple(int(v) for v in field.frobenius(gf(list(x0)))) if x0 else ()
            points.append(DiffPoint(x0, x0 + shifted))
        return points
    solver = FibreSolver(P.I1, P.extra)
    points = []
    for x0 in realisations:
        known = _known(P, field, x0)
        base = tuple(int(known[s]) for s in P.variables + P.shifted)
        for extra in solver.solve(field, known, limits):
            points.append(DiffPoint(x0, base + extra))
    return points


def _known(presentation, field: DiffField, x: Point) -> Dict[str, object]:
    gf = field.gf
    values = {v: gf(int(c)) for v, c in zip(presentation.variables, x)}
    values.update({s: field.frobenius(values[v]) for v, s in zip(presentation.variables, presentation.shifted)})
    return values


def is_point(presentation, x: Sequence, field: DiffField, limits: Limits = DEFAULT_LIMITS) -> bool:
    """
    Whether ``x`` (integer encodings or element text) is a realisation.
    """
    P = presentation
    if len(x) != len(P.variables):
        raise ValueError(f"Expected {len(P.variables)} coordinates, got {len(x)}")
    point = tuple(field.parse(c) if isinstance(c, str) else int(c) for c in x)
    known = _known(P, field, point)
    spec0 = field.specializer(P.ring0)
    if any(spec0.evaluate(g, known) != 0 for g in P.I0.gens):
        return False
    if P.extra:
        return bool(FibreSolver(P.I1, P.extra).solve(field, known, limits))
    spec1 = field.specializer(P.ring1)
    return all(spec1.evaluate(g, known) == 0 for g in P.I1.gens)


def nonempty_witness(
    presentation, q: int, m_max: Optional[int] = None, limits: Limits = DEFAULT_LIMITS
) -> Optional[Tuple[int, Point]]:
    """
    The least m ≤ m_max with a realisation over F_{q^m}, and one realisation.

    Returns ``None`` when no m up to ``m_max`` has one.

    Raises:
        BudgetExceeded: If the scan reaches an m beyond the budget without a witness.
    """
    m_max = m_max or limits.m_max
    for m in range(1, m_max + 1):
        field = DiffField.from_q(presentation.field, q, m)
        found = _realisation_rows(presentation, field, limits)
        if found:
            logger.debug("Witness for q=%d at m=%d", q, m)
            return m, min(found)
    return None


def render_points(points: Iterable[Point], field: DiffField) -> List[List[str]]:
    return [[field.render(c) for c in point] for point in points]
