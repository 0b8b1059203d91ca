"""
Evaluation of polynomials at points of finite fields.

A :class:`Specializer` maps the coefficients of a ring over Q, F_p or F_{p^b}
into a galois field GF(p^k) and evaluates polynomials there, vectorised over
numpy broadcasting.
"""

from functools import cached_property
from typing import Dict, Mapping, Optional

import galois

from diffqe.algebra.fields import GENERATOR, generator_root
from diffqe.algebra.polys import Ring, coefficient_int
from diffqe.errors import UnsupportedField


class Specializer:
    """
    Coefficient map from a polynomial ring into a finite field.

    Attributes:
        ring: The polynomial ring.
        gf: Target galois field class.
    """

    def __init__(self, ring: Ring, gf, generator: Optional[int] = None):
        self.ring = ring
        self.gf = gf
        self._generator = generator
        field = ring.field
        p = gf.characteristic
        if field.is_finite and field.p != p:
            raise UnsupportedField(f"Cannot specialise {field} into characteristic {p}")
        if field.kind == "Fq" and gf.degree % field.degree:
            raise UnsupportedField(f"{field} does not embed in GF({gf.order})")
        self._coefficients: Dict[object, object] = {}

    @cached_property
    def generator_value(self):
        if self.ring.field.kind != "Fq":
            return None
        if self._generator is not None:
            return self.gf(int(self._generator))
        return self.gf(generator_root(self.ring.field, self.gf))

    def coefficient(self, c):
        if c in self._coefficients:
            return self._coefficients[c]
        gf = self.gf
        p = gf.characteristic
        if self.ring.field.kind == "Q":
            num, den = int(c.numerator), int(c.denominator)
            if den % p == 0:
                raise UnsupportedField(f"Coefficient {num}/{den} has a pole at p={p}")
            value = gf(num % p) / gf(den % p)
        else:
            value = gf(coefficient_int(c, p))
        self._coefficients[c] = value
        return value

    def _value_of(self, name: str, values: Mapping[str, object]):
        if name == GENERATOR and self.ring.field.kind == "Fq":
            return self.generator_value
        try:
            return values[name]
        except KeyError:
            raise KeyError(f"No value for variable {name}") from None

    def evaluate(self, f, values: Mapping[str, object]):
        """
        Evaluate ``f`` with variables bound to field scalars or broadcastable arrays.
        """
        f = self.ring.convert(f)
        names = self.ring.symbols
        result = self.gf(0)
        powers: Dict[tuple, object] = {}
        for monom, c in f.iterterms():
            term = self.coefficient(c)
            for i, exp in enumerate(monom):
                if not exp:
                    continue
                key = (i, exp)
                if key not in powers:
                    powers[key] = self._value_of(names[i], values) ** exp
                term = term * powers[key]
            result = result + term
        return result

    def univariate(self, f, var: str, values: Mapping[str, object]) -> "galois.Poly":
        """``f`` as a univariate polynomial in ``var`` after substituting scalars for the rest."""
        f = self.ring.convert(f)
        names = self.ring.symbols
        vi = names.index(var)
        degree = max((m[vi] for m in f.itermonoms()), default=0)
        coeffs = [self.gf(0)] * (degree + 1)
        for monom, c in f.iterterms():
            term = self.coefficient(c)
            for i, exp in enumerate(monom):
                if exp and i != vi:
                    term = term * self._value_of(names[i], values) ** exp
            slot = degree - monom[vi]
            coeffs[slot] = coeffs[slot] + term
        return galois.Poly(self.gf([int(c) for c in coeffs]))


def render_element(value: int, gf, generator: str = "a") -> str:
    """
    Render a field element as a polynomial in the field generator.

    Elements of prime fields render as integers.
    """
    value = int(value)
    p = gf.characteristic
    if gf.degree == 1:
        return str(value)
    digits = []
    k = 0
    while value:
        digits.append((k, value % p))
        value //= p
        k += 1
    terms = []
    for k, d in reversed(digits):
        if not d:
            continue
        mono = "" if k == 0 else (generator if k == 1 else f"{generator}^{k}")
        if not mono:
            terms.append(str(d))
        elif d == 1:
            terms.append(mono)
        else:
            terms.append(f"{d}*{mono}")
    return " + ".join(terms) if terms else "0"


def parse_element(text: str, gf, generator: str = "a") -> int:
    """Inverse of :func:`render_element`."""
    p = gf.characteristic
    text = text.strip()
    if gf.degree == 1:
        return int(text) % p
    total = 0
    for term in text.split("+"):
        term = term.strip()
        coeff, _, mono = term.rpartition("*") if "*" in term else ("", "", term)
        if mono == generator:
            power = 1
        elif mono.startswith(f"{generator}^"):
            power = int(mono[len(generator) + 1 :])
        else:
            coeff, power = mono, 0
        total += (int(coeff) if coeff else 1) % p * p**power
    return total
