"""
Direct presentations of difference schemes and their morphisms.

A presentation is a variety X0 with a correspondence X1 ⊆ X0 × X0ς, stored
as ideals: I0 in the variables x, I1 in x, the shifted variables y and (for
almost-direct presentations) extra correspondence coordinates. Realisations
are the x with (x, σx) on X1.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from diffqe.algebra.decompose import decompose_variety, is_prime
from diffqe.algebra.fields import Field
from diffqe.algebra.ideals import Ideal
from diffqe.algebra.polys import Ring
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.errors import DecompositionIncomplete, InvalidPresentation, UnsupportedCase, VariableMismatch
from diffqe.pieces import LocallyClosed, Piece, shift

logger = logging.getLogger(__name__)


def default_names(n: int) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    return tuple(f"x{i}" for i in range(n)), tuple(f"y{i}" for i in range(n))


def fresh_names(prefix: str, count: int, taken: Sequence[str]) -> Tuple[str, ...]:
    """``count`` names ``prefix0, prefix1, ...`` avoiding ``taken``."""
    names: List[str] = []
    i = 0
    used = set(taken)
    while len(names) < count:
        candidate = f"{prefix}{i}"
        if candidate not in used:
            names.append(candidate)
            used.add(candidate)
        i += 1
    return tuple(names)


@dataclass(frozen=True)
class DirectPresentation:
    """
    A (possibly almost-direct) presentation X0 <- X1 -> X0ς.

    Attributes:
        field: The base field.
        variables: Coordinates x of X0.
        shifted: Coordinates y standing for σx, one per variable.
        I0: Ideal of X0 in the variables.
        I1: Ideal of X1 in variables, shifted and extra coordinates.
        extra: Correspondence coordinates projected away by π1 and π2.
        name: Optional label used in bundles and reports.
    """

    field: Field
    variables: Tuple[str, ...]
    shifted: Tuple[str, ...]
    I0: Ideal
    I1: Ideal
    extra: Tuple[str, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.variables) != len(self.shifted):
            raise InvalidPresentation("Every variable needs exactly one shifted copy")
        if self.I0.ring.variables != self.variables:
            raise VariableMismatch(f"I0 lives in {self.I0.ring}, expected variables {self.variables}")
        expected = self.variables + self.shifted + self.extra
        if self.I1.ring.variables != expected:
            raise VariableMismatch(f"I1 lives in {self.I1.ring}, expected variables {expected}")

    @classmethod
    def from_texts(
        cls,
        field: Field,
        I0: Sequence[str],
        I1: Sequence[str],
        variables: Optional[Sequence[str]] = None,
        shifted: Optional[Sequence[str]] = None,
        extra: Sequence[str] = (),
        n: Optional[int] = None,
        name: str = "",
    ) -> "DirectPresentation":
        if variables is None:
            variables, default_shifted = default_names(n or 0)
            shifted = shifted or default_shifted
        variables = tuple(variables)
        shifted = tuple(shifted) if shifted is not None else tuple(f"{v}_s" for v in variables)
        ring0 = Ring(field, variables)
        ring1 = Ring(field, variables + shifted + tuple(extra))
        return cls(field, variables, shifted, Ideal.from_text(ring0, I0), Ideal.from_text(ring1, I1), tuple(extra), name)

    @classmethod
    def from_json(cls, data: Mapping, name: str = "") -> "DirectPresentation":
        """
        Build a presentation from its JSON form.

        Example:
            >>> P = DirectPresentation.from_json({"field": "F5", "n": 1, "I0": ["0"], "I1": ["y0 - x0^2"]})
            >>> P.variables
            ('x0',)
        """
        field_ = Field.parse(data["field"])
        extra = tuple(data.get("extra", ()))
        if data.get("almost") and not extra:
            logger.debug("Presentation %s is marked almost-direct without extra coordinates", name)
        return cls.from_texts(
            field_,
            data.get("I0", []),
            data.get("I1", []),
            variables=data.get("variables"),
            shifted=data.get("shifted"),
            extra=extra,
            n=data.get("n"),
            name=name,
        )

    @classmethod
    def free(cls, field: Field, variables: Sequence[str], shifted: Optional[Sequence[str]] = None) -> "DirectPresentation":
        """The difference affine space: X0 = A^n, X1 = A^2n."""
        return cls.from_texts(field, [], [], variables=variables, shifted=shifted)

    def to_json(self) -> Dict:
        data = {
            "field": self.field.descriptor(),
            "n": self.n,
            "I0": self.I0.texts() or ["0"],
            "I1": self.I1.texts() or ["0"],
            "almost": self.almost,
        }
        if (self.variables, self.shifted) != default_names(self.n):
            data["variables"] = list(self.variables)
            data["shifted"] = list(self.shifted)
        if self.extra:
            data["extra"] = list(self.extra)
        return data

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def almost(self) -> bool:
        return bool(self.extra)

    @property
    def ring0(self) -> Ring:
        return self.I0.ring

    @property
    def ring1(self) -> Ring:
        return self.I1.ring

    @property
    def ring_xy(self) -> Ring:
        return Ring(self.field, self.variables + self.shifted)

    @property
    def ring_y(self) -> Ring:
        return Ring(self.field, self.shifted)

    def shift_map(self) -> Dict[str, str]:
        return dict(zip(self.variables, self.shifted))

    def at_x(self, f):
        return self.ring1.convert(self.ring0.convert(f))

    def at_y(self, f, ring: Optional[Ring] = None):
        """``f`` with coefficients twisted by ς and x renamed to y."""
        return shift(f, self.ring0, ring or self.ring1, self.shift_map())

    def closure1(self) -> Ideal:
        """I1 + I0(x) + I0ς(y): the full ideal of X1 inside X0 × X0ς."""
        return self.I1.with_gens([self.at_x(g) for g in self.I0.gens] + [self.at_y(g) for g in self.I0.gens])

    def as_direct(self) -> "DirectPresentation":
        """The v-form closure: extra coordinates eliminated."""
        if not self.extra:
            return self
        I1 = self.closure1().eliminate(self.variables + self.shifted)
        return DirectPresentation(self.field, self.variables, self.shifted, self.I0, I1, (), self.name)

    def whole_piece(self) -> Piece:
        return Piece.whole(self.ring0, self.ring_xy)

    def restrict(self, piece: Piece) -> "DirectPresentation":
        """The closed sub-presentation cut out by the closures of ``piece``."""
        I0 = self.I0 + piece.level0.closed.in_ring(self.ring0)
        I1 = self.I1.with_gens(self.ring1.convert(g) for g in piece.level1.closed.gens)
        return DirectPresentation(self.field, self.variables, self.shifted, I0, I1, self.extra, self.name)

    def with_ideals(self, I0: Ideal, I1: Ideal, extra: Optional[Tuple[str, ...]] = None) -> "DirectPresentation":
        return DirectPresentation(self.field, self.variables, self.shifted, I0, I1, self.extra if extra is None else extra, self.name)

    def is_empty(self) -> bool:
        return self.I0.is_unit() or self.closure1().is_unit()

    def key(self):
        return (self.variables, tuple(self.I0.canonical_texts()), tuple(self.closure1().canonical_texts()))

    def __repr__(self) -> str:
        label = f"{self.name}: " if self.name else ""
        return f"DirectPresentation({label}I0={self.I0.texts()}, I1={self.I1.texts()})"


@dataclass(frozen=True)
class PresentationMorphism:
    """
    A morphism of presentations given by polynomials on the x-variables.

    The level-1 map applies ``f0`` to x and its ς-twist to y.

    Attributes:
        source: The source presentation.
        target: The target presentation.
        f0: One polynomial of ``source.ring0`` per target variable.
    """

    source: DirectPresentation
    target: DirectPresentation
    f0: Tuple

    def __post_init__(self):
        if len(self.f0) != self.target.n:
            raise VariableMismatch(f"Expected {self.target.n} component polynomials, got {len(self.f0)}")
        object.__setattr__(self, "f0", tuple(self.source.ring0.convert(f) for f in self.f0))

    @classmethod
    def from_texts(cls, source: DirectPresentation, target: DirectPresentation, f0: Sequence[str]) -> "PresentationMorphism":
        return cls(source, target, tuple(source.ring0.parse(t) for t in f0))

    @classmethod
    def identity(cls, presentation: DirectPresentation) -> "PresentationMorphism":
        return cls(presentation, presentation, tuple(presentation.ring0.gen(v) for v in presentation.variables))

    @classmethod
    def projection(cls, source: DirectPresentation, target: DirectPresentation) -> "PresentationMorphism":
        """Projection onto the target's variables, which must be source variables."""
        missing = [v for v in target.variables if v not in source.variables]
        if missing:
            raise VariableMismatch(f"Cannot project onto {missing}: not source variables")
        return cls(source, target, tuple(source.ring0.gen(v) for v in target.variables))

    def images0(self) -> Dict[str, object]:
        return dict(zip(self.target.variables, self.f0))

    def images1(self, ring: Optional[Ring] = None) -> Dict[str, object]:
        """Images of the target's x and y variables in the source's level-1 ring."""
        ring = ring or self.source.ring1
        images = {v: ring.convert(f) for v, f in zip(self.target.variables, self.f0)}
        for s, f in zip(self.target.shifted, self.f0):
            images[s] = self.source.at_y(f, ring)
        return images

    def pullback0(self, f):
        return self.source.ring0.substitute(self.target.ring0.convert(f), self.images0())

    def pullback1(self, f, ring: Optional[Ring] = None):
        """Pull back a polynomial in the target's x and y variables."""
        ring = ring or self.source.ring1
        return ring.substitute(f, self.images1(ring))

    def projected_variables(self) -> Optional[Tuple[str, ...]]:
        """The source variables hit, when every component is a distinct source variable."""
        names = []
        for f in self.f0:
            used = self.source.ring0.variables_of(f)
            if len(used) != 1 or f != self.source.ring0.gen(used[0]):
                return None
            names.append(used[0])
        return tuple(names) if len(set(names)) == len(names) else None

    def is_projection(self) -> bool:
        return self.projected_variables() == self.target.variables

    def validate(self) -> List[str]:
        """Generators of the target whose pullbacks escape the source ideals."""
        errors = []
        for g in self.target.I0.gens:
            if not self.source.I0.contains(self.pullback0(g)):
                errors.append(f"f0^*({self.target.ring0.format(g)}) not in I0 of the source")
        if self.target.extra:
            errors.append("Morphisms into almost-direct targets are not supported")
            return errors
        closure = self.source.closure1()
        for g in self.target.I1.gens:
            if not closure.contains(self.pullback1(g)):
                errors.append(f"f1^*({self.target.ring1.format(g)}) not in I1 of the source")
        return errors

    def as_projection(self) -> Tuple[DirectPresentation, "PresentationMorphism"]:
        """
        Replace the source by the graph of ``f0`` so the morphism becomes a projection.

        The graph lives in the target's variables followed by the source's
        (renamed away from clashes); its realisations correspond one to one
        with the source's.
        """
        if self.is_projection():
            return self.source, self
        src, tgt = self.source, self.target
        taken = tgt.variables + tgt.shifted
        rename = {}
        for v, s in zip(src.variables, src.shifted):
            new_v = v if v not in taken else fresh_names(f"{v}_", 1, taken + tuple(rename.values()))[0]
            new_s = s if s not in taken else fresh_names(f"{s}_", 1, taken + tuple(rename.values()) + (new_v,))[0]
            rename[v], rename[s] = new_v, new_s
        extra = tuple(e if e not in taken else f"{e}_" for e in src.extra)
        variables = tgt.variables + tuple(rename[v] for v in src.variables)
        shifted = tgt.shifted + tuple(rename[s] for s in src.shifted)
        ring0 = Ring(src.field, variables)
        ring1 = Ring(src.field, variables + shifted + extra)
        mapping0 = {v: ring0.gen(rename[v]) for v in src.variables}
        mapping1 = {v: ring1.gen(rename[v]) for v in src.variables + src.shifted}
        mapping1.update({e: ring1.gen(n) for e, n in zip(src.extra, extra)})
        I0 = src.I0.substitute(ring0, mapping0)
        I0 = I0.with_gens(ring0.gen(t) - ring0.substitute(f, mapping0) for t, f in zip(tgt.variables, self.f0))
        I1 = src.I1.substitute(ring1, mapping1)
        graph1 = []
        for t, s, f in zip(tgt.variables, tgt.shifted, self.f0):
            moved = ring0.substitute(f, mapping0)
            graph1.append(ring1.gen(t) - ring1.convert(moved))
            graph1.append(ring1.gen(s) - shift(moved, ring0, ring1, dict(zip(variables, shifted))))
        graph = DirectPresentation(src.field, variables, shifted, I0, I1.with_gens(graph1), extra, src.name)
        return graph, PresentationMorphism.projection(graph, tgt)

    def to_json(self) -> Dict:
        return {"f0": [self.source.ring0.format(f) for f in self.f0]}


@dataclass
class ValidationReport:
    """Outcome of :func:`validate`."""

    valid: bool
    errors: List[str] = field(default_factory=list)
    empty: bool = False
    reduced: Dict[str, Optional[bool]] = field(default_factory=dict)

    def to_json(self) -> Dict:
        return {"valid": self.valid, "errors": list(self.errors), "empty": self.empty, "reduced": dict(self.reduced)}


def validate(presentation: DirectPresentation, limits: Limits = DEFAULT_LIMITS) -> ValidationReport:
    """
    Check that π1 and π2 land in X0 and report reducedness of I0 and I1.

    Example:
        >>> validate(DirectPresentation.from_json({"field": "Q", "n": 1, "I0": ["x0 - 1"], "I1": ["y0 - x0"]})).valid
        False
    """
    P = presentation
    errors = []
    for g in P.I0.gens:
        if not P.I1.contains(P.at_x(g)):
            errors.append(f"π1 escapes X0: {P.ring1.format(P.at_x(g))} not in I1")
        if not P.I1.contains(P.at_y(g)):
            errors.append(f"π2 escapes X0ς: {P.ring1.format(P.at_y(g))} not in I1")
    report = ValidationReport(valid=not errors, errors=errors, empty=P.is_empty())
    report.reduced = {"I0": _is_radical(P.I0, limits), "I1": _is_radical(P.I1, limits)}
    return report


def _is_radical(ideal: Ideal, limits: Limits) -> Optional[bool]:
    try:
        primes = decompose_variety(ideal, limits)
    except DecompositionIncomplete:
        return None
    if not primes:
        return True
    radical = primes[0]
    for prime in primes[1:]:
        radical = radical.intersect(prime)
    return ideal.contains_ideal(radical)


def _projections(W: Ideal, P: DirectPresentation) -> Tuple[Ideal, Ideal]:
    """Closures of π1(W) in x and of π2(W)ς⁻¹, both as ideals of ring0."""
    first = W.eliminate(P.variables).in_ring(P.ring0)
    second = W.eliminate(P.shifted)
    back = dict(zip(P.shifted, P.variables))
    second = Ideal(P.ring0, tuple(shift(g, second.ring, P.ring0, back, power=-1) for g in second.gens))
    return first, second


def directly_integral(presentation: DirectPresentation, limits: Limits = DEFAULT_LIMITS) -> bool:
    P = presentation
    return is_prime(P.I0, limits) and is_prime(P.closure1(), limits)


def is_h_direct(presentation: DirectPresentation, limits: Limits = DEFAULT_LIMITS) -> bool:
    """
    Directly integral with both projections of X1 dominant onto X0 and X0ς.

    Raises:
        DecompositionIncomplete: If primality cannot be decided.
    """
    P = presentation
    if not directly_integral(P, limits):
        return False
    first, second = _projections(P.closure1(), P)
    return first.equals(P.I0) and second.equals(P.I0)


def direct_decompose(
    presentation: DirectPresentation, limits: Limits = DEFAULT_LIMITS, _depth: int = 0
) -> List[DirectPresentation]:
    """
    H-direct presentations whose realisations together are those of ``presentation``.

    Each component W of X1 gives X0' = closure of π1(W) meet π2(W)ς⁻¹ and
    X1' = W restricted to X0' × X0'ς; the pair is kept once it stops shrinking.

    Raises:
        DecompositionIncomplete: If some component cannot be certified prime.
    """
    P = presentation
    if P.I0.is_unit():
        return []
    if _depth > 2 * P.n + 16:
        raise DecompositionIncomplete(f"Direct decomposition of {P} did not stabilise", stage="presentations.direct_decompose")
    results: Dict[Tuple, DirectPresentation] = {}
    for W in decompose_variety(P.closure1(), limits):
        first, second = _projections(W, P)
        I0 = first + second
        if I0.is_unit():
            continue
        if I0.equals(P.I0) and W.equals(P.closure1()):
            candidate = P.with_ideals(P.I0, W)
            results.setdefault(candidate.key(), candidate)
            continue
        candidate = P.with_ideals(Ideal(P.ring0, I0.basis()), W)
        candidate = P.with_ideals(candidate.I0, candidate.closure1())
        for part in direct_decompose(candidate, limits, _depth + 1):
            results.setdefault(part.key(), part)
    logger.debug("Direct decomposition of %s has %d components", P, len(results))
    return [results[k] for k in sorted(results)]


def direct_localize(
    presentation: DirectPresentation,
    V0: Optional[Sequence] = None,
    V1: Optional[Sequence] = None,
) -> DirectPresentation:
    """
    The open sub-presentation over π1⁻¹(V0) ∩ π2⁻¹(V0ς) ∩ V1.

    Opens are given by the polynomials whose common zeros they remove: ``None``
    removes nothing and an empty list removes everything. A level-0 open must
    be principal: its single generator g gets a coordinate l with g l = 1
    (and L at level 1), so realisations stay in bijection with those of the
    open. Level-1 opens add extra correspondence coordinates k with
    Σ g_i k_i = 1, making the result almost-direct.

    Raises:
        UnsupportedCase: If the level-0 open has several nonzero generators;
            cover it by the principal opens of each generator instead.
    """
    P = presentation
    ring0, ring1 = P.ring0, P.ring1
    gens0 = None if V0 is None else [ring0.parse(g) if isinstance(g, str) else ring0.convert(g) for g in V0]
    gens1 = None if V1 is None else [P.ring_xy.parse(g) if isinstance(g, str) else P.ring_xy.convert(g) for g in V1]
    gens0 = None if gens0 is not None and Ideal(ring0, tuple(gens0)).is_unit() else gens0
    gens1 = None if gens1 is not None and Ideal(P.ring_xy, tuple(gens1)).is_unit() else gens1
    if gens0 is None and gens1 is None:
        return P
    if gens0 is not None and not [g for g in gens0 if g]:
        return P.with_ideals(Ideal.unit(ring0), Ideal.unit(ring1))
    if gens0 is not None:
        gens0 = [g for g in gens0 if g]
        if len(gens0) > 1:
            raise UnsupportedCase(
                f"Level-0 open needs a single generator, got {len(gens0)}", stage="presentations.direct_localize"
            )
    taken = P.variables + P.shifted + P.extra
    new_vars: Tuple[str, ...] = ()
    new_shifted: Tuple[str, ...] = ()
    if gens0 is not None:
        new_vars = fresh_names("l", len(gens0), taken)
        new_shifted = fresh_names("L", len(gens0), taken + new_vars)
    new_extra: Tuple[str, ...] = ()
    if gens1 is not None:
        new_extra = fresh_names("k", len(gens1), taken + new_vars + new_shifted)
    variables = P.variables + new_vars
    shifted = P.shifted + new_shifted
    extra = P.extra + new_extra
    big0 = Ring(P.field, variables)
    big1 = Ring(P.field, variables + shifted + extra)
    I0 = P.I0.in_ring(big0)
    I1 = P.I1.in_ring(big1)
    if gens0 is not None:
        unit0 = sum((big0.convert(g) * big0.gen(l) for g, l in zip(gens0, new_vars)), big0.zero) - 1
        I0 = I0.with_gens([unit0])
        I1 = I1.with_gens([big1.convert(unit0), shift(unit0, big0, big1, dict(zip(variables, shifted)))])
    if gens1 is not None:
        unit1 = sum((big1.convert(g) * big1.gen(k) for g, k in zip(gens1, new_extra)), big1.zero) - 1
        I1 = I1.with_gens([unit1])
    if gens1 is not None and not [g for g in gens1 if g]:
        I1 = Ideal.unit(big1)
    return DirectPresentation(P.field, variables, shifted, I0, I1, extra, P.name)


def fibre_product(first: PresentationMorphism, second: PresentationMorphism) -> DirectPresentation:
    """
    The fibre product of two morphisms with a common target.

    The ambient space juxtaposes both sources (the second renamed away from
    clashes); the ideals are summed and the two maps equated at both levels.
    """
    if first.target.variables != second.target.variables or first.target.field != second.target.field:
        raise VariableMismatch("Fibre product needs morphisms into the same presentation")
    P, Q = first.source, second.source
    taken = P.variables + P.shifted + P.extra
    rename: Dict[str, str] = {}
    for name in Q.variables + Q.shifted + Q.extra:
        if name in taken or name in rename.values():
            rename[name] = fresh_names(f"{name}_", 1, taken + tuple(rename.values()) + Q.variables + Q.shifted + Q.extra)[0]
        else:
            rename[name] = name
    variables = P.variables + tuple(rename[v] for v in Q.variables)
    shifted = P.shifted + tuple(rename[s] for s in Q.shifted)
    extra = P.extra + tuple(rename[e] for e in Q.extra)
    ring0 = Ring(P.field, variables)
    ring1 = Ring(P.field, variables + shifted + extra)
    map0 = {v: ring0.gen(rename[v]) for v in Q.variables}
    map1 = {v: ring1.gen(rename[v]) for v in Q.variables + Q.shifted + Q.extra}
    I0 = P.I0.in_ring(ring0) + Q.I0.substitute(ring0, map0)
    I0 = I0.with_gens(ring0.convert(f) - ring0.substitute(g, map0) for f, g in zip(first.f0, second.f0))
    I1 = P.I1.in_ring(ring1) + Q.I1.substitute(ring1, map1)
    equal = []
    for f, g in zip(first.f0, second.f0):
        diff = ring0.convert(f) - ring0.substitute(g, map0)
        equal.append(ring1.convert(diff))
        equal.append(shift(diff, ring0, ring1, dict(zip(variables, shifted))))
    return DirectPresentation(P.field, variables, shifted, I0, I1.with_gens(equal), extra)


def realisation_piece(presentation: DirectPresentation) -> Piece:
    """The closed piece of the ambient space cut out by a direct presentation."""
    P = presentation.as_direct()
    return Piece(LocallyClosed.closed_set(P.I0), LocallyClosed.closed_set(P.I1.in_ring(P.ring_xy)))
