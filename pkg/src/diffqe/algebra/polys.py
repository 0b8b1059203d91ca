"""
Polynomial rings over the supported base fields.

Polynomials are sympy ``PolyElement`` objects (sparse maps from exponent vectors
to nonzero coefficients). A :class:`Ring` fixes the field, the ordered variable
names and a monomial order; over an extension field F_{p^b} the generator ``t``
is appended as a last variable and the modulus is carried as a relation.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from sympy import Symbol
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations
from sympy.polys.rings import PolyRing

from diffqe.algebra.fields import GENERATOR, Field
from diffqe.errors import PolynomialSyntaxError, VariableMismatch

ORDERS = ("lex", "grlex", "grevlex")
_TRANSFORMATIONS = standard_transformations + (convert_xor,)


@dataclass(frozen=True)
class Ring:
    """
    A polynomial ring k[x_1, ..., x_n] with a monomial order.

    Attributes:
        field: The coefficient field.
        variables: Ordered variable names (the generator ``t`` excluded).
        order: Monomial order used by Gröbner computations in this ring.
    """

    field: Field
    variables: Tuple[str, ...]
    order: str = "grevlex"

    def __post_init__(self):
        if self.order not in ORDERS:
            raise ValueError(f"Unknown monomial order: {self.order}")
        if len(set(self.variables)) != len(self.variables):
            raise VariableMismatch(f"Repeated variables in {self.variables}")
        if GENERATOR in self.variables and self.field.kind == "Fq":
            raise VariableMismatch(f"'{GENERATOR}' is reserved for the field generator")

    @cached_property
    def symbols(self) -> Tuple[str, ...]:
        return tuple(self.variables) + self.field.extra_symbols

    @cached_property
    def sympy_ring(self) -> PolyRing:
        return PolyRing([Symbol(s) for s in self.symbols], self.field.domain, self.order)

    @property
    def zero(self):
        return self.sympy_ring.zero

    @property
    def one(self):
        return self.sympy_ring.one

    def gen(self, name: str):
        try:
            return self.sympy_ring.gens[self.symbols.index(name)]
        except ValueError:
            raise VariableMismatch(f"{name} is not a variable of {self}") from None

    def index(self, name: str) -> int:
        return self.symbols.index(name)

    def with_order(self, order: str) -> "Ring":
        return Ring(self.field, self.variables, order)

    def reordered(self, variables: Sequence[str], order: str = None) -> "Ring":
        return Ring(self.field, tuple(variables), order or self.order)

    def extend(self, names: Iterable[str]) -> "Ring":
        extra = tuple(n for n in names if n not in self.variables)
        return Ring(self.field, self.variables + extra, self.order)

    def relations(self) -> List:
        """The defining relation of the field generator, if any."""
        if self.field.kind != "Fq":
            return []
        t = self.gen(GENERATOR)
        deg = len(self.field.modulus) - 1
        return [sum((c * t ** (deg - i) for i, c in enumerate(self.field.modulus)), self.zero)]

    def parse(self, text: str):
        """
        Parse polynomial text such as ``"y0 - x0^2"``.

        Raises:
            PolynomialSyntaxError: On malformed text.
            VariableMismatch: If the text names an unknown variable.
        """
        local = {s: Symbol(s) for s in self.symbols}
        try:
            expr = parse_expr(str(text), local_dict=local, transformations=_TRANSFORMATIONS)
        except Exception as exc:
            raise PolynomialSyntaxError(f"Cannot parse {text!r}: {exc}") from None
        unknown = sorted(str(s) for s in expr.free_symbols if str(s) not in self.symbols)
        if unknown:
            raise VariableMismatch(f"Unknown variables {unknown} in {text!r}")
        try:
            return self.sympy_ring.from_expr(expr)
        except Exception as exc:
            raise PolynomialSyntaxError(f"{text!r} is not a polynomial: {exc}") from None

    def convert(self, f):
        """Move ``f`` from another ring with compatible variables into this one."""
        if f.ring == self.sympy_ring:
            return f
        if f.ring.domain != self.sympy_ring.domain:
            raise VariableMismatch("Rings have different coefficient fields")
        try:
            return f.set_ring(self.sympy_ring)
        except Exception:
            names = [str(s) for s in f.ring.symbols]
            raise VariableMismatch(f"Cannot move polynomial in {names} into {self.symbols}") from None

    def format(self, f) -> str:
        return format_poly(f, self.field)

    def substitute(self, f, mapping: Mapping[str, object]):
        """
        Substitute polynomials of this ring for the variables of ``f``.

        Variables of ``f`` missing from ``mapping`` are kept by name and must
        exist in this ring.
        """
        names = [str(s) for s in f.ring.symbols]
        images = []
        for name in names:
            if name in mapping:
                image = mapping[name]
                images.append(self.convert(image) if hasattr(image, "ring") else self.sympy_ring(image))
            elif name in self.symbols:
                images.append(self.gen(name))
            else:
                images.append(None)
        domain = self.sympy_ring.domain
        result = self.zero
        powers: Dict[Tuple[int, int], object] = {}
        for monom, coeff in f.iterterms():
            term = self.sympy_ring(domain.convert(coeff, f.ring.domain))
            for i, exp in enumerate(monom):
                if exp == 0:
                    continue
                if images[i] is None:
                    raise VariableMismatch(f"No image for variable {names[i]}")
                key = (i, exp)
                if key not in powers:
                    powers[key] = images[i] ** exp
                term = term * powers[key]
            result += term
        return result

    def reduce_generator(self, f):
        """Reduce ``f`` modulo the field relation (identity over prime fields)."""
        relations = self.relations()
        return f.rem(relations) if relations and f else f

    def twist(self, f, power: int = 1):
        """
        Apply the base automorphism ``t -> t^(p^power)`` to the coefficients of ``f``.

        Over Q and prime fields the automorphism is the identity.
        """
        if self.field.kind != "Fq" or power % self.field.degree == 0:
            return f
        t = self.gen(GENERATOR)
        exponent = self.field.p ** (power % self.field.degree)
        return self.reduce_generator(self.substitute(f, {GENERATOR: t**exponent}))

    def variables_of(self, f) -> List[str]:
        used = set()
        for monom in f.itermonoms():
            used.update(i for i, e in enumerate(monom) if e)
        return [self.symbols[i] for i in sorted(used)]

    def __str__(self) -> str:
        return f"{self.field.descriptor()}[{', '.join(self.variables)}]"


def coefficient_int(c, p: int) -> int:
    """Integer representative in [0, p) of a prime-field coefficient."""
    return int(c) % p


def format_coefficient(c, field: Field) -> Tuple[bool, str]:
    """Sign and magnitude text of a coefficient (symmetric residues mod p)."""
    if field.kind == "Q":
        num, den = int(c.numerator), int(c.denominator)
        negative = num < 0
        num = abs(num)
        return negative, str(num) if den == 1 else f"{num}/{den}"
    value = coefficient_int(c, field.p)
    if value > field.p // 2:
        value -= field.p
    return value < 0, str(abs(value))


def format_poly(f, field: Field) -> str:
    """
    Canonical text for a polynomial: terms by descending graded order.

    Example:
        ``y0 - x0^2`` formats as ``-x0^2 + y0``.
    """
    if not f:
        return "0"
    names = [str(s) for s in f.ring.symbols]
    pieces = []
    for monom, coeff in f.terms(order="grlex"):
        negative, magnitude = format_coefficient(coeff, field)
        factors = []
        for name, exp in zip(names, monom):
            if exp == 1:
                factors.append(name)
            elif exp > 1:
                factors.append(f"{name}^{exp}")
        mono = "*".join(factors)
        if not mono:
            body = magnitude
        elif magnitude == "1":
            body = mono
        else:
            body = f"{magnitude}*{mono}"
        pieces.append((negative, body))
    text = ("-" if pieces[0][0] else "") + pieces[0][1]
    for negative, body in pieces[1:]:
        text += (" - " if negative else " + ") + body
    return text


def total_degree(f) -> int:
    return max((sum(m) for m in f.itermonoms()), default=-1)
