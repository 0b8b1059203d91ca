"""
Tests for Frobenius difference fields and point enumeration.
"""

import numpy as np
import pytest
from diffqe.algebra.fields import Field
from diffqe.config import DEFAULT_LIMITS
from diffqe.errors import BudgetExceeded, UnsupportedField
from diffqe.points import (
    DiffField,
    enumerate_points,
    enumerate_realisations,
    is_point,
    nonempty_witness,
    render_points,
)
from diffqe.presentations import DirectPresentation

Q = Field.rationals()


def presentation(I0, I1, field="Q", n=1):
    return DirectPresentation.from_json({"field": field, "n": n, "I0": I0, "I1": I1})


class TestDiffField:
    """Tests for (F_{q^m}, x -> x^q)."""

    def test_from_prime_power(self):
        """Test that q = 9 has p = 3 and e = 2."""
        K = DiffField.from_q(Q, 9, 2)
        assert (K.p, K.e, K.m) == (3, 2, 2)
        assert K.order == 81
        assert K.to_json() == {"p": 3, "q": 9, "m": 2}

    @pytest.mark.parametrize("q", [1, 6, 12])
    def test_not_prime_power(self, q):
        """Test that q must be a prime power."""
        with pytest.raises(UnsupportedField):
            DiffField.from_q(Q, q)

    def test_characteristic_mismatch(self):
        """Test that F5 cannot be evaluated in characteristic 7."""
        with pytest.raises(UnsupportedField, match="characteristic"):
            DiffField.from_q(Field.prime(5), 7)

    def test_extension_base(self):
        """Test when an F9 base embeds with a compatible Frobenius."""
        F9 = Field.parse("F9")
        assert DiffField.from_q(F9, 3, 2).generator_value is not None
        with pytest.raises(UnsupportedField):
            DiffField.from_q(F9, 3, 1)
        with pytest.raises(UnsupportedField):
            DiffField.from_q(F9, 9, 1)

    def test_frobenius(self):
        """Test that the Frobenius of F_9 over F_3 has order two."""
        K = DiffField.from_q(Q, 3, 2)
        x = K.elements()
        assert (K.frobenius(x, 2) == x).all()
        assert not (K.frobenius(x) == x).all()

    def test_frobenius_is_ring_map(self):
        """Test additivity and multiplicativity on random elements of F_25."""
        K = DiffField.from_q(Q, 5, 2)
        rng = np.random.default_rng(0)
        a = K.gf(rng.integers(0, K.order, size=64))
        b = K.gf(rng.integers(0, K.order, size=64))
        assert (K.frobenius(a + b) == K.frobenius(a) + K.frobenius(b)).all()
        assert (K.frobenius(a * b) == K.frobenius(a) * K.frobenius(b)).all()

    def test_extension(self):
        """Test the degree of an extension."""
        assert DiffField.from_q(Q, 3).extension(2).order == 9


class TestEnumerate:
    """Tests for realisations and points."""

    def test_square_graph(self):
        """Test σx = x^2 over F_3."""
        P = presentation(["0"], ["y0 - x0^2"])
        assert enumerate_realisations(P, DiffField.from_q(Q, 3)) == [(0,), (1,)]

    def test_fixed_points_over_extension(self):
        """Test that σx = x picks out F_q inside F_{q^m}."""
        P = presentation(["0"], ["y0 - x0"])
        assert len(enumerate_realisations(P, DiffField.from_q(Q, 3, 2))) == 3

    def test_points_of_direct_presentation(self):
        """Test that each realisation gives one point (x, φ(x))."""
        P = presentation(["0"], ["y0 - x0^2"])
        points = enumerate_points(P, DiffField.from_q(Q, 3))
        assert [p.x1 for p in points] == [(0, 0), (1, 1)]

    def test_budget(self):
        """Test that a scan larger than the budget is refused."""
        P = presentation(["0"], ["0"], n=2)
        with pytest.raises(BudgetExceeded):
            enumerate_realisations(P, DiffField.from_q(Q, 7), DEFAULT_LIMITS.replace(budget=10))

    def test_is_point(self):
        """Test membership of single tuples."""
        P = presentation(["0"], ["y0 - x0^2"])
        K = DiffField.from_q(Q, 3)
        assert is_point(P, [1], K)
        assert not is_point(P, [2], K)
        with pytest.raises(ValueError):
            is_point(P, [1, 1], K)

    def test_render(self):
        """Test element text in F_9."""
        K = DiffField.from_q(Q, 3, 2)
        assert render_points([(5,)], K) == [["a + 2"]]


class TestNonemptyWitness:
    """Tests for witness search."""

    def test_first_degree(self):
        """Test a presentation with a rational point."""
        assert nonempty_witness(presentation(["0"], ["y0 - x0^2"]), 5) == (1, (0,))

    def test_needs_extension(self):
        """Test σx = -x with x^2 = -1, which needs F_9 over F_3."""
        P = presentation(["x0^2 + 1"], ["x0^2 + 1", "y0 + x0"])
        found = nonempty_witness(P, 3)
        assert found is not None
        assert found[0] == 2

    def test_none(self):
        """Test an empty presentation."""
        assert nonempty_witness(presentation(["1"], ["1"]), 5, 2) is None
