"""
Base fields of the difference rings: Q, prime fields and their extensions.

Descriptor strings are ``Q``, ``F5`` and ``F9:t^2+1``. Extension fields carry a
monic irreducible modulus in the generator ``t``; when none is given the
lexicographically least one is used so field towers are reproducible.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Tuple

import galois
import numpy as np
import sympy
from sympy.polys.domains import GF, QQ

from diffqe.errors import UnsupportedField

logger = logging.getLogger(__name__)

GENERATOR = "t"


@dataclass(frozen=True)
class Field:
    """
    An effective base field.

    Attributes:
        kind: One of ``"Q"``, ``"Fp"`` or ``"Fq"``.
        p: The characteristic (0 for Q).
        degree: Degree over the prime field.
        modulus: Coefficients of the monic modulus in ``t``, highest degree first
            (only for ``"Fq"``).
    """

    kind: str
    p: int = 0
    degree: int = 1
    modulus: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in ("Q", "Fp", "Fq"):
            raise UnsupportedField(f"Unknown field kind: {self.kind}")
        if self.kind != "Q" and not sympy.isprime(self.p):
            raise UnsupportedField(f"Characteristic {self.p} is not prime")
        if self.kind == "Fq":
            if len(self.modulus) != self.degree + 1 or self.modulus[0] != 1:
                raise UnsupportedField(f"Modulus of F{self.order} must be monic of degree {self.degree}")
            if not galois.Poly(list(self.modulus), field=galois.GF(self.p)).is_irreducible():
                raise UnsupportedField(f"Modulus {self.modulus_text()} is reducible over F{self.p}")

    @classmethod
    def rationals(cls) -> "Field":
        return cls("Q")

    @classmethod
    def prime(cls, p: int) -> "Field":
        return cls("Fp", p)

    @classmethod
    def extension(cls, p: int, degree: int, modulus: Optional[List[int]] = None) -> "Field":
        if degree == 1:
            return cls.prime(p)
        if modulus is None:
            modulus = lexmin_modulus(p, degree)
        return cls("Fq", p, degree, tuple(int(c) % p for c in modulus))

    @classmethod
    def parse(cls, descriptor: str) -> "Field":
        """
        Parse a field descriptor.

        Example:
            >>> Field.parse("F9:t^2+1").order
            9
        """
        text = descriptor.strip()
        if text == "Q":
            return cls.rationals()
        if not text.startswith("F"):
            raise UnsupportedField(f"Unknown field descriptor: {descriptor}")
        order_text, _, modulus_text = text[1:].partition(":")
        try:
            order = int(order_text)
        except ValueError:
            raise UnsupportedField(f"Unknown field descriptor: {descriptor}") from None
        powers = sympy.perfect_power(order) if not sympy.isprime(order) else (order, 1)
        if not powers or not sympy.isprime(powers[0]):
            raise UnsupportedField(f"{order} is not a prime power")
        p, degree = int(powers[0]), int(powers[1])
        if not modulus_text:
            return cls.extension(p, degree)
        t = sympy.Symbol(GENERATOR)
        try:
            poly = sympy.Poly(sympy.sympify(modulus_text.replace("^", "**"), locals={GENERATOR: t}), t)
        except (sympy.SympifyError, sympy.PolynomialError, TypeError) as exc:
            raise UnsupportedField(f"Bad modulus {modulus_text!r}: {exc}") from None
        coeffs = [int(c) % p for c in poly.all_coeffs()]
        if len(coeffs) - 1 != degree:
            raise UnsupportedField(f"Modulus {modulus_text!r} does not have degree {degree}")
        return cls.extension(p, degree, coeffs)

    @property
    def characteristic(self) -> int:
        return self.p

    @property
    def order(self) -> int:
        return 0 if self.kind == "Q" else self.p**self.degree

    @property
    def is_finite(self) -> bool:
        return self.kind != "Q"

    @property
    def domain(self):
        """The sympy coefficient domain (QQ or GF(p))."""
        return QQ if self.kind == "Q" else GF(self.p)

    @property
    def extra_symbols(self) -> Tuple[str, ...]:
        """Symbols adjoined to every polynomial ring over this field."""
        return (GENERATOR,) if self.kind == "Fq" else ()

    def modulus_text(self) -> str:
        terms = []
        for i, c in enumerate(self.modulus):
            power = len(self.modulus) - 1 - i
            if c == 0:
                continue
            mono = "" if power == 0 else (GENERATOR if power == 1 else f"{GENERATOR}^{power}")
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            else:
                terms.append(f"{c}*{mono}")
        return "+".join(terms)

    def descriptor(self) -> str:
        if self.kind == "Q":
            return "Q"
        if self.kind == "Fp":
            return f"F{self.p}"
        return f"F{self.order}:{self.modulus_text()}"

    def __str__(self) -> str:
        return self.descriptor()


@dataclass(frozen=True)
class FieldExtensionDesc:
    """
    A finite extension presented by adjoined generators and their relations.

    Attributes:
        base: The field being extended.
        generators: Names of the adjoined elements, in tower order.
        relations: Polynomial relations (text) among the generators and any
            parameters, one minimal polynomial per tower step.
        degree: The degree of the extension.
        roots: For splitting fields, the generators that are roots of the
            split polynomial.
    """

    base: Field
    generators: Tuple[str, ...]
    relations: Tuple[str, ...]
    degree: int
    roots: Tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "base": self.base.descriptor(),
            "generators": list(self.generators),
            "relations": list(self.relations),
            "degree": self.degree,
            "roots": list(self.roots),
        }


@lru_cache(maxsize=None)
def lexmin_modulus(p: int, degree: int) -> Tuple[int, ...]:
    """Lexicographically least monic irreducible polynomial of the given degree."""
    poly = galois.irreducible_poly(p, degree, method="min")
    return tuple(int(c) for c in poly.coeffs)


@lru_cache(maxsize=None)
def finite_field(p: int, degree: int):
    """The galois field class GF(p^degree), cached."""
    logger.debug("Building GF(%d^%d)", p, degree)
    return galois.GF(p**degree)


def poly_roots(gf, coeffs: List[int]) -> List[int]:
    """Sorted integer encodings of the roots in ``gf`` of a prime-field polynomial."""
    poly = galois.Poly([int(c) for c in coeffs], field=gf)
    if poly.degree == 0:
        return []
    return sorted(int(r) for r in poly.roots())


def generator_root(base: Field, gf) -> int:
    """
    Image of the generator ``t`` of an extension base field inside ``gf``.

    Raises:
        UnsupportedField: If the modulus has no root in ``gf``.
    """
    roots = poly_roots(gf, list(base.modulus))
    if not roots:
        raise UnsupportedField(f"{base.descriptor()} does not embed in GF({gf.order})")
    return roots[0]


def embedding_table(small, big) -> np.ndarray:
    """
    Integer lookup table sending each element of ``small`` into ``big``.

    Both arguments are galois field classes of the same characteristic with
    ``small.degree`` dividing ``big.degree``.
    """
    p = small.characteristic
    if small.degree == big.degree and small.irreducible_poly == big.irreducible_poly:
        return np.arange(small.order, dtype=np.int64)
    alpha = big(poly_roots(big, [int(c) for c in small.irreducible_poly.coeffs])[0])
    powers = [big(1)]
    for _ in range(small.degree - 1):
        powers.append(powers[-1] * alpha)
    ints = np.arange(small.order, dtype=np.int64)
    image = big.Zeros(small.order)
    for i, power in enumerate(powers):
        digits = big((ints // p**i) % p)
        image = image + digits * power
    return as_ints(image)


def as_ints(array) -> np.ndarray:
    """Plain int64 copy of a galois field array."""
    return np.asarray(np.asarray(array).view(np.ndarray), dtype=np.int64)
