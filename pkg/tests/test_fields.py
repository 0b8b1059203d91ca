"""
Tests for base fields and finite field helpers.
"""

import numpy as np
import pytest
from diffqe.algebra.fields import (
    GENERATOR,
    Field,
    embedding_table,
    finite_field,
    lexmin_modulus,
    poly_roots,
)
from diffqe.errors import UnsupportedField


class TestFieldParse:
    """Tests for descriptor parsing."""

    @pytest.mark.parametrize("descriptor", ["Q", "F5", "F9:t^2+1"])
    def test_descriptor_round_trip(self, descriptor):
        """Test that descriptors print back unchanged."""
        assert Field.parse(descriptor).descriptor() == descriptor

    def test_kinds(self):
        """Test the three kinds of base field."""
        assert Field.parse("Q").kind == "Q"
        assert Field.parse("F7").kind == "Fp"
        assert Field.parse("F9:t^2+1").kind == "Fq"
        assert Field.parse("F9").order == 9

    def test_default_modulus_is_lexmin(self):
        """Test that an extension without modulus gets the least irreducible one."""
        assert Field.parse("F9").modulus == lexmin_modulus(3, 2)
        assert lexmin_modulus(3, 2) == (1, 0, 1)

    def test_generator_symbol(self):
        """Test that only extension fields adjoin the generator."""
        assert Field.parse("F9").extra_symbols == (GENERATOR,)
        assert Field.parse("F5").extra_symbols == ()

    @pytest.mark.parametrize("descriptor", ["F6", "R", "Fx", "F9:t^2+2*t+1"])
    def test_rejects(self, descriptor):
        """Test that non-fields and reducible moduli are refused."""
        with pytest.raises(UnsupportedField):
            Field.parse(descriptor)

    def test_properties(self):
        """Test characteristic and finiteness."""
        assert Field.rationals().characteristic == 0
        assert not Field.rationals().is_finite
        assert Field.prime(5).is_finite
        assert Field.rationals().order == 0


class TestFiniteFieldHelpers:
    """Tests for the galois-backed helpers."""

    def test_poly_roots(self):
        """Test root finding in a prime field."""
        assert poly_roots(finite_field(7, 1), [1, 0, -2 % 7]) == [3, 4]
        assert poly_roots(finite_field(7, 1), [1, 0, 1]) == []

    def test_identity_embedding(self):
        """Test that a field embeds into itself identically."""
        gf = finite_field(5, 1)
        assert np.array_equal(embedding_table(gf, gf), np.arange(5))

    def test_prime_field_embedding_fixes_integers(self):
        """Test that F_p sits inside F_{p^2} as the integers."""
        table = embedding_table(finite_field(3, 1), finite_field(3, 2))
        assert list(table) == [0, 1, 2]
