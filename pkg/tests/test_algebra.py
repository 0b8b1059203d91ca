"""
Tests for polynomial rings, ideals, factorisation, decomposition and
relative algebraic closure.
"""

from itertools import product

import numpy as np
import pytest
from sympy import QQ
from diffqe.algebra.closure import FunctionFieldTower, TowerGenerator, relative_algebraic_closure
from diffqe.algebra.decompose import decompose_variety, is_geometrically_integral, is_prime
from diffqe.algebra.evaluation import Specializer, parse_element, render_element
from diffqe.algebra.factor import factor_multivariate, factor_univariate, is_irreducible, splitting_field
from diffqe.algebra.fields import Field, finite_field
from diffqe.algebra.ideals import Ideal, ideal_combine
from diffqe.algebra.polys import Ring, format_poly
from diffqe.errors import PolynomialSyntaxError, PresentationInsufficient, UnsupportedField, VariableMismatch


@pytest.fixture
def qxy():
    return Ring(Field.rationals(), ("x", "y"))


class TestRing:
    """Tests for polynomial rings."""

    def test_format_orders_terms(self):
        """Test that formatting leads with the highest degree term."""
        R = Ring(Field.rationals(), ("x0", "y0"))
        assert R.format(R.parse("y0 - x0^2")) == "-x0^2 + y0"

    def test_format_fractions(self):
        """Test rational coefficients."""
        R = Ring(Field.rationals(), ("x",))
        assert R.format(R.parse("x/2 + 1")) == "1/2*x + 1"

    def test_format_symmetric_residues(self):
        """Test that prime field coefficients print as symmetric residues."""
        R = Ring(Field.prime(5), ("x",))
        assert R.format(R.parse("x + 4")) == "x - 1"

    def test_repeated_variables(self):
        """Test that repeated names are refused."""
        with pytest.raises(VariableMismatch):
            Ring(Field.rationals(), ("x", "x"))

    def test_generator_is_reserved(self):
        """Test that t cannot be a variable over an extension field."""
        with pytest.raises(VariableMismatch):
            Ring(Field.parse("F9"), ("t",))

    def test_unknown_variable(self, qxy):
        """Test parsing a polynomial in a foreign variable."""
        with pytest.raises(VariableMismatch, match="Unknown variables"):
            qxy.parse("x + z")

    def test_syntax_error(self, qxy):
        """Test parsing malformed text."""
        with pytest.raises(PolynomialSyntaxError):
            qxy.parse("x + (")

    def test_substitute(self, qxy):
        """Test substituting polynomials for variables."""
        f = qxy.parse("x*y + 1")
        assert qxy.substitute(f, {"y": qxy.parse("x - 1")}) == qxy.parse("x^2 - x + 1")

    def test_twist_frobenius_on_generator(self):
        """Test that twisting sends t to t^p modulo the field relation."""
        R = Ring(Field.parse("F9"), ("x",))
        assert R.twist(R.parse("t*x")) == R.parse("-t*x")
        assert R.twist(R.parse("t*x"), 2) == R.parse("t*x")

    def test_twist_identity_over_prime_field(self):
        """Test that the base automorphism of F_p is trivial."""
        R = Ring(Field.prime(5), ("x",))
        f = R.parse("2*x + 3")
        assert R.twist(f) == f


class TestIdeal:
    """Tests for ideal operations."""

    def test_membership(self, qxy):
        """Test the normal-form membership check."""
        I = Ideal.from_text(qxy, ["x*y"])
        assert I.contains(qxy.parse("x^2*y"))
        assert qxy.parse("x") not in I

    def test_unit_and_zero(self, qxy):
        """Test trivial ideals."""
        assert Ideal.unit(qxy).is_unit()
        assert Ideal.zero(qxy).is_zero()
        assert Ideal.from_text(qxy, ["x", "x - 1"]).is_unit()

    @pytest.mark.parametrize(
        "gens,expected",
        [([], 2), (["x*y"], 1), (["x", "y"], 0), (["1"], -1)],
    )
    def test_dimension(self, qxy, gens, expected):
        """Test Krull dimension from independent sets."""
        assert Ideal.from_text(qxy, gens).dimension() == expected

    def test_eliminate(self):
        """Test the implicit equation of the cusp."""
        R = Ring(Field.rationals(), ("s", "x", "y"))
        I = Ideal.from_text(R, ["x - s^2", "y - s^3"])
        result = I.eliminate(["x", "y"])
        assert result.ring.variables == ("x", "y")
        assert result.equals(Ideal.from_text(result.ring, ["y^2 - x^3"]))

    def test_eliminate_unknown_variable(self, qxy):
        """Test keeping a variable outside the ring."""
        with pytest.raises(VariableMismatch):
            Ideal.zero(qxy).eliminate(["z"])

    def test_radical_membership(self, qxy):
        """Test that x vanishes on V(x^2) without lying in (x^2)."""
        I = Ideal.from_text(qxy, ["x^2"])
        assert I.radical_contains(qxy.parse("x"))
        assert not I.contains(qxy.parse("x"))

    def test_combine_modes(self, qxy):
        """Test intersection, quotient and saturation."""
        xy = Ideal.from_text(qxy, ["x*y"])
        x = Ideal.from_text(qxy, ["x"])
        y = Ideal.from_text(qxy, ["y"])
        assert ideal_combine(x, y, "intersect").equals(xy)
        assert ideal_combine(xy, x, "quotient").equals(y)
        assert ideal_combine(Ideal.from_text(qxy, ["x^2*y"]), x, "saturate").equals(y)

    def test_quotient_over_extension_field(self):
        """Test that I:(h) over F9 ignores the modulus of the generator."""
        R = Ring(Field.parse("F9:t^2 + 1"), ("x", "y"))
        xy = Ideal.from_text(R, ["x*y"])
        assert xy.quotient_by(R.parse("x")).canonical_texts() == ["y"]
        twisted = Ideal.from_text(R, ["x*(x + t)*y"])
        expected = Ideal.from_text(R, ["(x + t)*y"])
        assert ideal_combine(twisted, Ideal.from_text(R, ["x"]), "quotient").equals(expected)
        assert twisted.quotient_by(R.parse("t*x")).equals(expected)

    def test_combine_rejects(self, qxy):
        """Test unknown modes and mismatched rings."""
        I = Ideal.zero(qxy)
        with pytest.raises(ValueError, match="Unknown combine mode"):
            ideal_combine(I, I, "union")
        with pytest.raises(VariableMismatch):
            ideal_combine(I, Ideal.zero(Ring(Field.rationals(), ("x",))), "intersect")


class TestFactor:
    """Tests for factorisation."""

    def test_univariate_prime_field(self):
        """Test splitting x^2 - 1 over F7."""
        R = Ring(Field.prime(7), ("x",))
        factors = factor_univariate(R.parse("x^2 - 1"), R)
        assert [format_poly(g, R.field) for g, _ in factors] == ["x + 1", "x - 1"]
        assert all(e == 1 for _, e in factors)

    def test_univariate_zero(self):
        """Test that zero has no factorisation."""
        R = Ring(Field.prime(7), ("x",))
        with pytest.raises(ValueError):
            factor_univariate(R.zero, R)

    def test_multivariate_prime_field(self):
        """Test Kronecker factorisation over F5."""
        R = Ring(Field.prime(5), ("x", "y"))
        factors = factor_multivariate(R.parse("x^2 - y^2"), R)
        assert sorted(format_poly(g, R.field) for g, _ in factors) == ["x + y", "x - y"]

    def test_irreducible(self):
        """Test irreducibility depends on the field."""
        R7 = Ring(Field.prime(7), ("x",))
        R5 = Ring(Field.prime(5), ("x",))
        assert is_irreducible(R7.parse("x^2 + 1"), R7)
        assert not is_irreducible(R5.parse("x^2 + 1"), R5)

    def test_splitting_field_finite(self):
        """Test that x^2 + 1 splits over F49."""
        R = Ring(Field.prime(7), ("x",))
        desc = splitting_field(R.parse("x^2 + 1"), R)
        assert desc.degree == 2
        assert len(desc.roots) == 2

    def test_splitting_field_rationals(self):
        """Test the splitting field of x^2 - 2 over Q."""
        R = Ring(Field.rationals(), ("x",))
        assert splitting_field(R.parse("x^2 - 2"), R).degree == 2


class TestDecompose:
    """Tests for minimal primes."""

    def test_union_of_lines(self, qxy):
        """Test the two axes."""
        primes = decompose_variety(Ideal.from_text(qxy, ["x*y"]))
        assert [P.canonical_texts() for P in primes] == [["x"], ["y"]]

    def test_unit_has_no_components(self, qxy):
        """Test the empty variety."""
        assert decompose_variety(Ideal.unit(qxy)) == []

    def test_prime(self, qxy):
        """Test primality of a parabola and of a pair of points."""
        assert is_prime(Ideal.from_text(qxy, ["y - x^2"]))
        assert not is_prime(Ideal.from_text(qxy, ["x^2 - 1", "y"]))

    def test_depends_on_field(self):
        """Test that x^2 + 1 splits over F5 only."""
        R5 = Ring(Field.prime(5), ("x",))
        RQ = Ring(Field.rationals(), ("x",))
        assert len(decompose_variety(Ideal.from_text(R5, ["x^2 + 1"]))) == 2
        assert len(decompose_variety(Ideal.from_text(RQ, ["x^2 + 1"]))) == 1

    def test_geometric_integrality(self, qxy):
        """Test a parabola and a point that splits over F25."""
        assert is_geometrically_integral(Ideal.from_text(qxy, ["x - y^2"]))
        R5 = Ring(Field.prime(5), ("x",))
        assert not is_geometrically_integral(Ideal.from_text(R5, ["x^2 + 2"]))


class TestClosure:
    """Tests for relative algebraic closure."""

    def test_quadratic_step(self):
        """Test a square root of the parameter."""
        tower = FunctionFieldTower(Field.prime(5), ("t",), (TowerGenerator("s", "algebraic", "s^2 - t"),))
        desc = relative_algebraic_closure(tower)
        assert desc.degree == 2
        assert desc.generators == ("s",)

    def test_transcendental_step(self):
        """Test that a free generator adds nothing algebraic."""
        tower = FunctionFieldTower(Field.rationals(), ("u",), (TowerGenerator("v", "transcendental"),))
        desc = relative_algebraic_closure(tower)
        assert desc.degree == 1
        assert desc.generators == ()

    def test_missing_relation(self):
        """Test that algebraic steps need a relation."""
        with pytest.raises(PresentationInsufficient):
            TowerGenerator("s", "algebraic")


class TestSpecializer:
    """Tests for evaluation into finite fields."""

    def test_rational_coefficients(self):
        """Test that 1/2 maps to the inverse of 2."""
        R = Ring(Field.rationals(), ("x",))
        gf = finite_field(7, 1)
        spec = Specializer(R, gf)
        assert int(spec.evaluate(R.parse("x/2"), {"x": gf(1)})) == 4

    def test_pole(self):
        """Test that a denominator divisible by p is refused."""
        R = Ring(Field.rationals(), ("x",))
        spec = Specializer(R, finite_field(3, 1))
        with pytest.raises(UnsupportedField, match="pole"):
            spec.coefficient(QQ(1, 3))

    def test_characteristic_mismatch(self):
        """Test specialising F5 into characteristic 7."""
        with pytest.raises(UnsupportedField):
            Specializer(Ring(Field.prime(5), ("x",)), finite_field(7, 1))

    def test_render_element(self):
        """Test rendering an element of F9 in its generator."""
        gf = finite_field(3, 2)
        assert render_element(5, gf) == "a + 2"
        assert parse_element("a + 2", gf) == 5
        assert render_element(2, finite_field(3, 1)) == "2"


def random_poly(rng, ring, degree, terms=4):
    """A nonzero polynomial with small coefficients and total degree at most ``degree``."""
    monomials = [e for e in product(range(degree + 1), repeat=len(ring.symbols)) if 0 < sum(e) <= degree]
    while True:
        f = ring.zero
        for k in rng.choice(len(monomials), size=terms):
            term = ring.one * int(rng.integers(-3, 4))
            for name, exponent in zip(ring.symbols, monomials[k]):
                term *= ring.gen(name) ** int(exponent)
            f += term
        f += int(rng.integers(-3, 4))
        if f and not f.is_ground:
            return f


def random_linear(rng, ring):
    f = ring.one * int(rng.integers(-3, 4))
    for name in ring.symbols:
        f += int(rng.integers(-3, 4)) * ring.gen(name)
    return f


class TestRandomInstances:
    """Seeded properties of the algebra substrate on small random inputs."""

    @pytest.mark.parametrize("seed", range(40))
    def test_groebner_mutual_membership(self, seed):
        """Test that a lex basis and the generators span the same ideal."""
        rng = np.random.default_rng(seed)
        p = int(rng.choice([5, 7]))
        n = int(rng.integers(2, 4))
        R = Ring(Field.prime(p), ("x", "y", "z")[:n])
        degree = int(rng.integers(1, 5 if n == 2 else 4))
        I = Ideal(R, tuple(random_poly(rng, R, degree) for _ in range(2)))
        J = Ideal(R, I.basis("lex"))
        assert J.contains_ideal(I)
        assert I.contains_ideal(J)

    @pytest.mark.parametrize("seed", range(30))
    def test_factor_product(self, seed):
        """Test that the factors multiply back to the polynomial up to a constant."""
        rng = np.random.default_rng(seed)
        field = Field.rationals() if seed % 2 else Field.prime(int(rng.choice([5, 7])))
        R = Ring(field, ("x", "y"))
        f = random_poly(rng, R, 2, terms=3) * random_poly(rng, R, 2, terms=3)
        factors = factor_multivariate(f, R)
        product_ = R.one
        for g, e in factors:
            product_ *= g**e
        quotient, remainder = f.div(product_)
        assert not remainder
        assert quotient.is_ground

    @pytest.mark.parametrize("seed", range(30))
    def test_decompose_radical(self, seed):
        """Test that I lies in every prime and a product over the primes lies in rad(I)."""
        rng = np.random.default_rng(seed)
        R = Ring(Field.prime(7), ("x", "y", "z"))
        line = Ideal(R, (random_linear(rng, R), random_linear(rng, R)))
        surface = Ideal(R, (random_poly(rng, R, 2, terms=3),))
        I = line.product(surface)
        primes = decompose_variety(I)
        assert all(P.contains_ideal(I) for P in primes)
        witness = R.one
        for P in primes:
            witness *= next(g for g in P.basis() if g)
        assert I.radical_contains(witness)
