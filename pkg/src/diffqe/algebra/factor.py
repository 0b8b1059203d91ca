"""
Factorisation of polynomials over the supported fields.

Univariate factorisation goes through sympy over Q and through galois over
F_{p^b}. sympy cannot factor multivariate polynomials over prime fields, so those
are factored by Kronecker substitution followed by a search over subsets of the
univariate factors.
"""

import logging
from functools import lru_cache
from itertools import combinations
from math import lcm
from typing import List, Tuple

import galois

from diffqe.algebra.fields import GENERATOR, Field, FieldExtensionDesc, finite_field
from diffqe.algebra.polys import Ring, coefficient_int, format_poly
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.errors import DecompositionIncomplete, VariableMismatch

logger = logging.getLogger(__name__)

Factorisation = List[Tuple[object, int]]


@lru_cache(maxsize=None)
def coefficient_field(field: Field):
    """The galois field whose elements encode coefficients c(t) of ``field``."""
    if field.kind == "Fq":
        modulus = galois.Poly(list(field.modulus), field=galois.GF(field.p))
        return galois.GF(field.p**field.degree, irreducible_poly=modulus)
    return galois.GF(field.p)


def _main_variable(f, ring: Ring) -> str:
    names = [v for v in ring.variables_of(f) if v != GENERATOR or ring.field.kind != "Fq"]
    if len(names) != 1:
        raise VariableMismatch(f"Expected a univariate polynomial, got {format_poly(f, ring.field)}")
    return names[0]


def to_galois(f, ring: Ring, var: str) -> "galois.Poly":
    """Convert a polynomial in ``var`` (with coefficients in t) to a galois polynomial."""
    gf = coefficient_field(ring.field)
    p = ring.field.p
    vi = ring.index(var)
    ti = ring.index(GENERATOR) if ring.field.kind == "Fq" else None
    degree = f.degree(ring.gen(var))
    coeffs = [0] * (degree + 1)
    for monom, c in f.iterterms():
        slot = degree - monom[vi]
        weight = p ** monom[ti] if ti is not None else 1
        coeffs[slot] = coeffs[slot] + coefficient_int(c, p) * weight
    if ti is not None:
        values = []
        for encoded in coeffs:
            values.append(_reduce_in(gf, encoded))
        return galois.Poly(gf(values))
    return galois.Poly([c % p for c in coeffs], field=gf)


def _reduce_in(gf, encoded: int) -> int:
    """Reduce a base-p encoding of a polynomial in t (any degree) into ``gf``."""
    p = gf.characteristic
    total = gf(0)
    alpha = gf(p) if gf.degree > 1 else gf(1)
    power = gf(1)
    while encoded:
        total = total + gf(encoded % p) * power
        power = power * alpha
        encoded //= p
    return int(total)


def from_galois(poly, ring: Ring, var: str):
    """Inverse of :func:`to_galois`."""
    p = ring.field.p
    x = ring.gen(var)
    t = ring.gen(GENERATOR) if ring.field.kind == "Fq" else None
    result = ring.zero
    coeffs = [int(c) for c in poly.coeffs]
    degree = len(coeffs) - 1
    for i, encoded in enumerate(coeffs):
        power = degree - i
        k = 0
        while encoded:
            digit = encoded % p
            if digit:
                result += digit * (t**k if t is not None else 1) * x**power
            encoded //= p
            k += 1
    return result


def factor_univariate(f, ring: Ring) -> Factorisation:
    """
    Irreducible factors of a univariate polynomial with multiplicities.

    The product of the factors (each monic) equals ``f`` up to a unit.

    Raises:
        ValueError: If ``f`` is zero.

    Example:
        >>> R = Ring(Field.prime(7), ("x",))
        >>> [format_poly(g, R.field) for g, _ in factor_univariate(R.parse("x^2 - 1"), R)]
        ['x + 1', 'x - 1']
    """
    f = ring.convert(f)
    if not f:
        raise ValueError("Cannot factor the zero polynomial")
    if f.is_ground:
        return []
    if ring.field.kind == "Q":
        _, factors = f.factor_list()
        return sorted(((g.monic(), e) for g, e in factors), key=lambda item: format_poly(item[0], ring.field))
    var = _main_variable(f, ring)
    poly = to_galois(f, ring, var)
    poly = poly // galois.Poly(poly.coeffs[:1], field=poly.field)
    factors, multiplicities = poly.factors()
    result = [(from_galois(g, ring, var), int(e)) for g, e in zip(factors, multiplicities)]
    return sorted(result, key=lambda item: format_poly(item[0], ring.field))


def splitting_field(f, ring: Ring, limits: Limits = DEFAULT_LIMITS) -> FieldExtensionDesc:
    """
    A splitting field of a univariate polynomial as an extension description.

    Over finite fields the extension is F_{q^L} with L the lcm of the factor
    degrees, generated by one element ``a``; the roots are listed as
    polynomials in ``a``. Over Q the extension is the residue field of a minimal
    prime of the splitting algebra in root variables ``r1, ..., rd``.
    """
    f = ring.convert(f)
    var = _main_variable(f, ring)
    field = ring.field
    factors = factor_univariate(f, ring)
    if field.is_finite:
        degree = lcm(*[g.degree(ring.gen(var)) for g, _ in factors]) if factors else 1
        big = finite_field(field.p, field.degree * degree)
        relation = format_poly(_galois_to_text_ring(big.irreducible_poly), Field.prime(field.p))
        roots = _roots_in(f, ring, var, big)
        return FieldExtensionDesc(
            base=field,
            generators=("a",),
            relations=(relation,),
            degree=degree,
            roots=tuple(_render(r, big) for r in roots),
        )
    from diffqe.algebra.decompose import quotient_dimension, splitting_algebra_component

    component, names = splitting_algebra_component(f, ring, var, (), limits)
    degree = quotient_dimension(component, names)
    return FieldExtensionDesc(
        base=field,
        generators=names,
        relations=tuple(component.canonical_texts()),
        degree=degree,
        roots=names,
    )


def _galois_to_text_ring(poly):
    ring = Ring(Field.prime(poly.field.characteristic), ("a",))
    a = ring.gen("a")
    return sum((int(c) * a ** (poly.degree - i) for i, c in enumerate(poly.coeffs)), ring.zero)


def _roots_in(f, ring: Ring, var: str, big) -> List[int]:
    from diffqe.algebra.evaluation import Specializer

    spec = Specializer(ring, big)
    poly = spec.univariate(f, var, {})
    return sorted(int(r) for r in poly.roots()) if poly.degree > 0 else []


def _render(element: int, gf) -> str:
    from diffqe.algebra.evaluation import render_element

    return render_element(element, gf)


def factor_multivariate(f, ring: Ring, limits: Limits = DEFAULT_LIMITS) -> Factorisation:
    """
    Irreducible factors of a multivariate polynomial over Q or F_p.

    Over extension fields the generator ``t`` is treated as an ordinary
    variable, so the result is a factorisation over the prime field.

    Raises:
        DecompositionIncomplete: If the subset search exceeds its cap.
    """
    f = ring.convert(f)
    if not f:
        raise ValueError("Cannot factor the zero polynomial")
    if f.is_ground:
        return []
    if ring.field.kind == "Q":
        _, factors = f.factor_list()
        return sorted(((g.monic(), e) for g, e in factors), key=lambda item: format_poly(item[0], ring.field))
    factors: dict = {}
    remaining = f.monic()
    for i, exp in enumerate(_monomial_content(remaining)):
        if exp:
            x = ring.sympy_ring.gens[i]
            factors[x] = factors.get(x, 0) + exp
            remaining = remaining.exquo(x**exp)
    while not remaining.is_ground:
        g = _kronecker_factor(remaining, ring, limits)
        g = g.monic()
        count = 0
        while True:
            quotient, rest = remaining.div([g])
            if rest:
                break
            remaining = quotient[0]
            count += 1
        factors[g] = factors.get(g, 0) + count
    return sorted(factors.items(), key=lambda item: format_poly(item[0], ring.field))


def _monomial_content(f) -> Tuple[int, ...]:
    monoms = list(f.itermonoms())
    return tuple(min(m[i] for m in monoms) for i in range(len(monoms[0])))


def _kronecker_factor(f, ring: Ring, limits: Limits):
    """One irreducible factor of ``f`` (``f`` itself when irreducible)."""
    n = len(ring.symbols)
    degrees = [max(m[i] for m in f.itermonoms()) for i in range(n)]
    used = [i for i in range(n) if degrees[i] > 0]
    if len(used) <= 1:
        var = ring.symbols[used[0]]
        uni = Ring(Field.prime(ring.field.p), (var,))
        factors = factor_univariate(uni.convert(f), uni)
        return ring.convert(factors[0][0])
    base = max(degrees) + 1
    p = ring.field.p
    gf = galois.GF(p)
    size = sum(degrees[i] * base**k for k, i in enumerate(used))
    coeffs = [0] * (size + 1)
    for monom, c in f.iterterms():
        exponent = sum(monom[i] * base**k for k, i in enumerate(used))
        coeffs[size - exponent] = (coeffs[size - exponent] + coefficient_int(c, p)) % p
    image = galois.Poly(coeffs, field=gf)
    image = image // galois.Poly(image.coeffs[:1], field=gf)
    irreducibles, multiplicities = image.factors()
    pool = [g for g, e in zip(irreducibles, multiplicities) for _ in range(int(e))]
    logger.debug("Kronecker image of degree %d has %d factors", image.degree, len(pool))
    examined = 0
    for size_k in range(1, len(pool) // 2 + 1):
        seen = set()
        for subset in combinations(range(len(pool)), size_k):
            key = tuple(sorted(tuple(int(c) for c in pool[i].coeffs) for i in subset))
            if key in seen:
                continue
            seen.add(key)
            examined += 1
            if examined > limits.factor_subsets:
                raise DecompositionIncomplete(
                    f"Factor search over {len(pool)} Kronecker factors exceeded {limits.factor_subsets} subsets"
                )
            product = galois.Poly([1], field=gf)
            for i in subset:
                product = product * pool[i]
            candidate = _inverse_kronecker(product, ring, used, base)
            if candidate is None or candidate.is_ground:
                continue
            _, rest = f.div([candidate])
            if not rest:
                return candidate
    return f


def _inverse_kronecker(poly, ring: Ring, used: List[int], base: int):
    result = ring.zero
    coeffs = [int(c) for c in poly.coeffs]
    degree = len(coeffs) - 1
    for i, c in enumerate(coeffs):
        if not c:
            continue
        exponent = degree - i
        monom = [0] * len(ring.symbols)
        for k in used:
            monom[k] = exponent % base
            exponent //= base
        if exponent:
            return None
        result += ring.sympy_ring({tuple(monom): c})
    return result


def is_irreducible(f, ring: Ring, limits: Limits = DEFAULT_LIMITS) -> bool:
    factors = factor_multivariate(f, ring, limits)
    return len(factors) == 1 and factors[0][1] == 1
