"""
Splitting varieties into irreducible components and integrality certificates.

Components are found by factoring basis elements and by generic projections:
after saturating by the leading coefficients of an elimination basis, the
minimal polynomial of a generic linear form over k(U) (U a maximal independent
set) either factors, which splits the ideal, or has the degree of the generic
fibre, which certifies primality. Anything else is reported as incomplete.
"""

import logging
from itertools import product
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix, Rational

from diffqe.algebra.evaluation import Specializer
from diffqe.algebra.factor import coefficient_field, factor_multivariate
from diffqe.algebra.fields import GENERATOR, Field, lexmin_modulus
from diffqe.algebra.ideals import Ideal
from diffqe.algebra.polys import Ring, format_poly
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.errors import DecompositionIncomplete, Undecided

logger = logging.getLogger(__name__)

_GENERIC = "_u"


def decompose_variety(ideal: Ideal, limits: Limits = DEFAULT_LIMITS) -> List[Ideal]:
    """
    Minimal primes of an ideal, sorted by their basis text.

    Returns an empty list for the unit ideal.

    Raises:
        DecompositionIncomplete: If some component cannot be certified prime.

    Example:
        >>> R = Ring(Field.rationals(), ("x", "y"))
        >>> [P.canonical_texts() for P in decompose_variety(Ideal.from_text(R, ["x*y"]))]
        [['x'], ['y']]
    """
    if ideal.ring.field.kind == "Fq":
        flat = flatten(ideal)
        return sorted(
            (Ideal(ideal.ring, tuple(ideal.ring.convert(g) for g in P.gens)) for P in decompose_variety(flat, limits)),
            key=lambda P: P.key(),
        )
    primes = _primes(ideal, limits, 0)
    unique: Dict[Tuple[str, ...], Ideal] = {}
    for prime in primes:
        unique.setdefault(prime.key(), prime)
    candidates = list(unique.values())
    minimal = []
    for prime in candidates:
        if any(other is not prime and prime.contains_ideal(other) and not other.contains_ideal(prime) for other in candidates):
            continue
        minimal.append(Ideal(ideal.ring, prime.basis()))
    minimal.sort(key=lambda P: P.key())
    logger.debug("Decomposed %s into %d components", ideal, len(minimal))
    return minimal


def is_prime(ideal: Ideal, limits: Limits = DEFAULT_LIMITS) -> bool:
    components = decompose_variety(ideal, limits)
    return len(components) == 1 and components[0].equals(ideal)


def _primes(ideal: Ideal, limits: Limits, depth: int) -> List[Ideal]:
    if ideal.is_unit():
        return []
    if depth > 64:
        raise DecompositionIncomplete(f"Splitting did not terminate on {ideal.texts()}")
    ring = ideal.ring
    relations = set(ring.relations())
    for g in ideal.basis():
        if g in relations or g.is_ground:
            continue
        factors = factor_multivariate(g, ring, limits)
        if len(factors) > 1 or factors[0][1] > 1:
            parts = []
            for h, _ in factors:
                parts.extend(_primes(ideal.with_gens([h]), limits, depth + 1))
            return parts
    independent = ideal.independent_set()
    fibre = [v for v in ring.symbols if v not in independent]
    if not fibre:
        return [ideal]
    lex = Ring(ring.field, tuple(v for v in ring.variables if v not in independent) + tuple(independent), "lex")
    moved = Ideal(lex, tuple(lex.convert(g) for g in ideal.gens))
    leading = _leading_coefficients(moved.basis("lex"), lex, fibre)
    h = lex.one
    for c in leading:
        h *= c
    if not h.is_ground:
        h = ring.convert(h)
        saturated = ideal.saturate_by(h)
        if not saturated.equals(ideal):
            return _primes(saturated, limits, depth + 1) + _primes(ideal.with_gens([h]), limits, depth + 1)
    count = _standard_monomial_count(moved.basis("lex"), lex, fibre)
    if count == 1:
        return [ideal]
    if count > limits.generic_degree:
        raise DecompositionIncomplete(
            f"Generic fibre of degree {count} exceeds {limits.generic_degree} on {ideal.texts()}"
        )
    for attempt in range(limits.coordinate_changes):
        form = _linear_form(ring, fibre, attempt)
        minimal = _generic_minimal_polynomial(ideal, form, independent)
        if minimal is None:
            continue
        poly, big = minimal
        factors = factor_multivariate(poly, big, limits)
        if len(factors) > 1 or factors[0][1] > 1:
            parts = []
            for factor, _ in factors:
                image = ring.substitute(factor, {_GENERIC: form})
                parts.extend(_primes(ideal.with_gens([image]), limits, depth + 1))
            return parts
        if factors[0][0].degree(big.gen(_GENERIC)) == count:
            return [ideal]
    raise DecompositionIncomplete(f"Cannot certify primality of {ideal.texts()} over {ring.field}")


def _leading_coefficients(basis, ring: Ring, fibre: Sequence[str]) -> List:
    fibre_idx = [ring.index(v) for v in fibre]
    result = []
    for g in basis:
        lm = g.LM
        key = tuple(lm[i] for i in fibre_idx)
        coeff = ring.zero
        for monom, c in g.iterterms():
            if tuple(monom[i] for i in fibre_idx) == key:
                rest = list(monom)
                for i in fibre_idx:
                    rest[i] = 0
                coeff += ring.sympy_ring({tuple(rest): c})
        result.append(coeff)
    return result


def _standard_monomial_count(basis, ring: Ring, fibre: Sequence[str]) -> int:
    """Dimension over k(U) of the generic fibre k(U)[fibre]/I."""
    fibre_idx = [ring.index(v) for v in fibre]
    leading = [tuple(g.LM[i] for i in fibre_idx) for g in basis]
    if any(not any(lm) for lm in leading):
        return 0
    bounds = []
    for k in range(len(fibre_idx)):
        pure = [lm[k] for lm in leading if lm[k] and all(e == 0 for j, e in enumerate(lm) if j != k)]
        if not pure:
            raise DecompositionIncomplete("Generic fibre is not finite over the independent set")
        bounds.append(min(pure))
    count = 0
    for exps in product(*[range(b) for b in bounds]):
        if not any(all(e >= l for e, l in zip(exps, lm)) for lm in leading):
            count += 1
    return count


def quotient_dimension(ideal: Ideal, fibre: Sequence[str]) -> int:
    """Vector-space dimension of the generic fibre over the remaining variables."""
    names = list(fibre) + ([GENERATOR] if ideal.ring.field.kind == "Fq" else [])
    ideal = flatten(ideal)
    ring = ideal.ring
    rest = tuple(v for v in ring.variables if v not in names)
    lex = Ring(ring.field, tuple(v for v in ring.variables if v in names) + rest, "lex")
    moved = Ideal(lex, tuple(lex.convert(g) for g in ideal.gens))
    return _standard_monomial_count(moved.basis("lex"), lex, names)


def _linear_form(ring: Ring, fibre: Sequence[str], attempt: int):
    form = ring.zero
    for i, v in enumerate(fibre):
        form += ring.gen(v) * (attempt + 1) ** i
    return form


def _generic_minimal_polynomial(ideal: Ideal, form, independent: Sequence[str]):
    ring = ideal.ring
    big = ring.extend([_GENERIC])
    u = big.gen(_GENERIC)
    extended = Ideal(big, tuple(big.convert(g) for g in ideal.gens) + (u - big.convert(form),))
    keep = tuple(independent) + (_GENERIC,)
    keep = tuple(v for v in keep if v != GENERATOR)
    eliminated = extended.eliminate(keep)
    basis = [g for g in eliminated.basis() if g not in set(eliminated.ring.relations())]
    if len(basis) != 1:
        return None
    return basis[0], eliminated.ring


def splitting_algebra(f, ring: Ring, var: str, prefix: str = "r") -> Tuple[Ideal, Tuple[str, ...]]:
    """
    The splitting algebra of a monic polynomial in ``var`` via Cauchy modules.

    The result lives in the ring of the remaining variables of ``ring`` plus
    root variables ``r1, ..., rd``.
    """
    f = ring.convert(f)
    x = ring.gen(var)
    degree = f.degree(x)
    lead = f.coeff_wrt(x, degree)
    if not lead.is_ground:
        raise ValueError(f"{format_poly(f, ring.field)} is not monic in {var}")
    f = f.quo_ground(lead.LC)
    params = tuple(v for v in ring.variables if v != var)
    names = tuple(f"{prefix}{i + 1}" for i in range(degree))
    target = Ring(ring.field, params + names, ring.order)
    module = target.substitute(f, {var: target.gen(names[0])})
    gens = [module]
    for k in range(1, degree):
        shifted = target.substitute(module, {names[k - 1]: target.gen(names[k])})
        module = (module - shifted).exquo(target.gen(names[k - 1]) - target.gen(names[k]))
        gens.append(module)
    return Ideal(target, tuple(gens)), names


def splitting_algebra_component(
    f, ring: Ring, var: str, base: Sequence = (), limits: Limits = DEFAULT_LIMITS, prefix: str = "r"
) -> Tuple[Ideal, Tuple[str, ...]]:
    """
    One minimal prime of the splitting algebra (over the base ideal ``base``).

    The residue field of the component is a splitting field of ``f`` over the
    function field of the base.
    """
    algebra, names = splitting_algebra(f, ring, var, prefix)
    target = algebra.ring
    with_base = algebra.with_gens([target.convert(g) for g in base])
    components = decompose_variety(with_base, limits)
    if not components:
        raise DecompositionIncomplete(f"Splitting algebra of {format_poly(f, ring.field)} is empty")
    return components[0], names


def is_geometrically_integral(ideal: Ideal, limits: Limits = DEFAULT_LIMITS) -> bool:
    """
    Whether V(I) stays integral over finite extensions of the base field.

    Positive certificates: a smooth rational point, or a hypersurface equation
    that is linear in a variable or has an indecomposable Newton polygon.
    Over finite fields the ideal is otherwise base-changed to F_{q^j} for
    j up to ``limits.integrality_degree`` and re-decomposed.

    Raises:
        Undecided: Over Q when no certificate applies.
    """
    if not is_prime(ideal, limits):
        return False
    if ideal.is_zero() or hypersurface_certificate(ideal, ()) is not None:
        return True
    if smooth_rational_point(ideal, limits) is not None:
        return True
    field = ideal.ring.field
    if not field.is_finite:
        raise Undecided(f"No integrality certificate for {ideal.texts()} over Q")
    for j in range(2, limits.integrality_degree + 1):
        extended = base_change(ideal, j)
        components = decompose_variety(extended, limits)
        if len(components) != 1:
            logger.debug("%s splits over the degree-%d extension", ideal.texts(), j)
            return False
    return True


def base_change(ideal: Ideal, degree: int) -> Ideal:
    """The ideal over the degree-``degree`` extension of a finite base field."""
    field = ideal.ring.field
    target_field = Field.extension(field.p, field.degree * degree, list(lexmin_modulus(field.p, field.degree * degree)))
    target = Ring(target_field, ideal.ring.variables, ideal.ring.order)
    if field.kind != "Fq":
        return Ideal(target, tuple(target.substitute(g, {}) for g in ideal.gens))
    gf = coefficient_field(target_field)
    spec = Specializer(ideal.ring, gf)
    encoded = int(spec.generator_value)
    t = target.gen(GENERATOR)
    image = target.zero
    k = 0
    while encoded:
        image += (encoded % field.p) * t**k
        encoded //= field.p
        k += 1
    return Ideal(target, tuple(target.substitute(g, {GENERATOR: image}) for g in ideal.gens))


def hypersurface_certificate(ideal: Ideal, parameters: Sequence[str]) -> Optional[List]:
    """
    Absolute irreducibility certificate for a principal ideal over k(parameters).

    Returns the list of polynomials in the parameters whose simultaneous
    nonvanishing keeps the certificate valid after specialisation, or ``None``
    when no certificate applies. The zero ideal is certified with no condition.
    """
    ring = ideal.ring
    if ring.field.kind == "Fq":
        return None
    basis = list(ideal.basis())
    if not basis:
        return []
    if len(basis) != 1:
        return None
    g = basis[0]
    params = set(parameters)
    fibre = [v for v in ring.variables_of(g) if v not in params]
    if not fibre:
        return None
    idx = {v: ring.index(v) for v in ring.symbols}
    if any(min(m[idx[v]] for m in g.itermonoms()) for v in fibre):
        return None
    for v in fibre:
        x = ring.gen(v)
        if g.degree(x) != 1:
            continue
        lead = g.coeff_wrt(x, 1)
        if set(ring.variables_of(lead)) <= params:
            return [lead] if not lead.is_ground else []
    if len(fibre) != 2:
        return None
    support: Dict[Tuple[int, int], object] = {}
    for monom, c in g.iterterms():
        key = (monom[idx[fibre[0]]], monom[idx[fibre[1]]])
        rest = list(monom)
        rest[idx[fibre[0]]] = rest[idx[fibre[1]]] = 0
        support[key] = support.get(key, ring.zero) + ring.sympy_ring({tuple(rest): c})
    vertices = _convex_hull(list(support))
    if not _indecomposable(vertices):
        return None
    return [support[v] for v in vertices if not support[v].is_ground]


def _convex_hull(points: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: List[Tuple[int, int]] = []
    for pt in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    upper: List[Tuple[int, int]] = []
    for pt in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], pt) <= 0:
            upper.pop()
        upper.append(pt)
    return lower[:-1] + upper[:-1]


def _indecomposable(vertices: List[Tuple[int, int]]) -> bool:
    """Segments of lattice length one and triangles whose edge lengths are coprime."""
    if len(vertices) == 2:
        (a, b), (c, d) = vertices
        return gcd(c - a, d - b) == 1
    if len(vertices) != 3:
        return False
    lengths = []
    for i in range(3):
        (a, b), (c, d) = vertices[i], vertices[(i + 1) % 3]
        lengths.append(gcd(c - a, d - b))
    return gcd(gcd(lengths[0], lengths[1]), lengths[2]) == 1


def smooth_rational_point(ideal: Ideal, limits: Limits = DEFAULT_LIMITS) -> Optional[Tuple]:
    """
    A rational point of V(I) where the Jacobian has rank n - dim, if one is found.

    Finite fields are scanned exhaustively within the budget; over Q an integer
    box of half-width ``limits.smooth_point_box`` is searched.
    """
    ring = ideal.ring
    variables = ring.variables
    gens = [g for g in ideal.gens if g not in set(ring.relations())]
    dim = ideal.dimension()
    codim = len(variables) - dim
    if not gens or not variables:
        return None
    jacobian = [[g.diff(ring.gen(v)) for v in variables] for g in gens]
    if ring.field.is_finite:
        gf = coefficient_field(ring.field)
        if gf.order ** len(variables) > limits.budget:
            return None
        spec = Specializer(ring, gf)
        grids = np.meshgrid(*[np.arange(gf.order)] * len(variables), indexing="ij")
        values = {v: gf(grid.ravel()) for v, grid in zip(variables, grids)}
        mask = np.ones(grids[0].size, dtype=bool)
        for g in gens:
            mask &= np.broadcast_to(np.asarray(spec.evaluate(g, values) == 0), mask.shape)
        for idx in np.flatnonzero(mask):
            point = {v: gf(int(values[v][idx])) for v in variables}
            matrix = gf([[int(spec.evaluate(d, point)) for d in row] for row in jacobian])
            if np.linalg.matrix_rank(matrix) == codim:
                return tuple(int(point[v]) for v in variables)
        return None
    box = range(-limits.smooth_point_box, limits.smooth_point_box + 1)
    for values in product(box, repeat=len(variables)):
        if all(g(*values) == 0 for g in gens):
            rows = [[Rational(str(d(*values))) for d in row] for row in jacobian]
            if Matrix(rows).rank() == codim:
                return values
    return None


def flatten(ideal: Ideal) -> Ideal:
    """
    An ideal over F_{p^b} as an ideal of F_p[x, t] containing the modulus of ``t``.

    Primes of the two rings correspond, so decomposition runs over the prime field.
    """
    ring = ideal.ring
    if ring.field.kind != "Fq":
        return ideal
    flat = Ring(Field.prime(ring.field.p), ring.variables + (GENERATOR,), ring.order)
    return Ideal(flat, tuple(flat.convert(g) for g in ideal.gens) + tuple(flat.convert(r) for r in ring.relations()))
