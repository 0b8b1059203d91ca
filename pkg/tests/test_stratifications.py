"""
Tests for Galois stratifications, their evaluation and property stratifications.
"""

import pytest
from diffqe.algebra.fields import Field
from diffqe.algebra.ideals import Ideal
from diffqe.data import load_catalog
from diffqe.errors import InvalidCover
from diffqe.pieces import Piece
from diffqe.points import DiffField
from diffqe.presentations import DirectPresentation, PresentationMorphism
from diffqe.properties import jacobian_minors, stratify_by_property
from diffqe.stratifications import (
    GaloisStratification,
    boolean_combine,
    bottom,
    evaluate,
    indicator,
    inflate,
    pullback,
    refine,
    restrict_cover,
    restrict_ambient,
    top,
)


def affine(n, field="Q"):
    return DirectPresentation.from_json({"field": field, "n": n, "I0": ["0"], "I1": ["0"]})


@pytest.fixture(scope="module")
def catalog():
    return load_catalog()


@pytest.fixture
def kummer(catalog):
    return catalog.stratifications["kummer_nontrivial"]


@pytest.fixture
def F7():
    return DiffField.from_q(Field.rationals(), 7)


class TestEvaluate:
    """Tests for evaluating stratifications over finite fields."""

    def test_nonsquares(self, kummer, F7):
        """Test that the nontrivial class picks out the non-squares of F7."""
        result = evaluate(kummer, F7)
        assert result.points == [(3,), (5,), (6,)]
        assert (5,) in result
        assert (2,) not in result

    def test_attribution(self, kummer, F7):
        """Test that the origin falls into the closed stratum."""
        result = evaluate(kummer, F7)
        assert result.attribution[(0,)] == 1
        assert result.stratum_sizes() == {0: 6, 1: 1}

    def test_to_json(self, kummer, F7):
        """Test the serialised result."""
        data = evaluate(kummer, F7).to_json()
        assert data["points"] == [["3"], ["5"], ["6"]]
        assert data["strata"] == {"0": 6, "1": 1}
        assert data["q"] == 7

    def test_top_and_bottom(self):
        """Test that ⊤ selects every realisation and ⊥ none."""
        K = DiffField.from_q(Field.rationals(), 5)
        line = affine(1)
        assert len(evaluate(top(line), K).points) == 5
        assert evaluate(bottom(line), K).points == []

    def test_indicator(self):
        """Test the indicator of the origin."""
        line = affine(1)
        piece = Piece.from_json({"closed": ["x0"]}, line.ring0, line.ring_xy)
        K = DiffField.from_q(Field.rationals(), 5)
        assert evaluate(indicator(line, piece), K).points == [(0,)]

    def test_validate(self, kummer):
        """Test that the catalog stratification is well formed."""
        assert kummer.validate() == []


class TestCombine:
    """Tests for Boolean operations on stratifications."""

    def test_negation(self, kummer, F7):
        """Test that negation selects the squares, the origin included."""
        negated = boolean_combine(kummer, None, "not")
        assert evaluate(negated, F7).points == [(0,), (1,), (2,), (4,)]

    def test_and_top(self, kummer, F7):
        """Test that ⊤ is neutral for conjunction."""
        both = boolean_combine(kummer, top(kummer.ambient), "and")
        assert evaluate(both, F7).points == [(3,), (5,), (6,)]

    def test_or_bottom(self, kummer, F7):
        """Test that ⊥ is neutral for disjunction."""
        either = boolean_combine(kummer, bottom(kummer.ambient), "or")
        assert evaluate(either, F7).points == [(3,), (5,), (6,)]

    def test_or_negation(self, kummer, F7):
        """Test that a formula or its negation holds everywhere."""
        everything = boolean_combine(kummer, boolean_combine(kummer, None, "not"), "or")
        assert len(evaluate(everything, F7).points) == 7

    def test_unknown_connective(self, kummer):
        """Test that only and, or and not are accepted."""
        with pytest.raises(ValueError, match="Unknown connective"):
            boolean_combine(kummer, kummer, "xor")
        with pytest.raises(ValueError):
            boolean_combine(kummer, None, "and")


class TestInflateRefine:
    """Tests for changing covers and splitting strata."""

    def test_inflate_identity(self, kummer, F7):
        """Test that inflating along the identity keeps the points."""
        cover = kummer.strata[0].cover
        inflated = inflate(kummer, {0: (cover, {"e": "e", "g": "g"})})
        assert inflated.strata[0].domain.elements == frozenset({"g"})
        assert evaluate(inflated, F7).points == [(3,), (5,), (6,)]

    def test_inflate_not_surjective(self, kummer):
        """Test that the group map must be onto."""
        cover = kummer.strata[0].cover
        with pytest.raises(InvalidCover, match="not surjective"):
            inflate(kummer, {0: (cover, {"e": "e", "g": "e"})})

    def test_refine(self, kummer, F7):
        """Test that splitting off x0 = 1 keeps the points."""
        ring0, ring_xy = kummer.ambient.ring0, kummer.ambient.ring_xy
        pieces = [
            Piece.from_json({"closed": ["x0 - 1"]}, ring0, ring_xy),
            Piece.from_json({"open": ["x0 - 1"]}, ring0, ring_xy),
        ]
        refined = refine(kummer, 0, pieces)
        assert len(refined.strata) == 3
        assert evaluate(refined, F7).points == [(3,), (5,), (6,)]

    def test_restrict_cover_picks_stable_component(self, catalog):
        """Test that the level-1 component over Z0 carries a surjective stabiliser."""
        D = catalog.covers["kummer_full"]
        line = D.base
        piece = Piece.from_json({"open": ["x0"]}, line.ring0, line.ring_xy)
        restricted = restrict_cover(D, piece, Ideal.from_text(D.cover.ring0, ["z0^2 - x0"]))
        assert restricted.G0.order == 2
        assert restricted.G1.elements == ("e", "st")
        level1 = restricted.level1_ideal()
        assert level1.contains(level1.ring.parse("w0 - z0"))


class TestAmbientChanges:
    """Tests for pullbacks and restrictions."""

    def test_pullback(self):
        """Test that ⊤ on the line pulls back to ⊤ on the plane."""
        plane, line = affine(2), affine(1)
        pulled = pullback(top(line), PresentationMorphism.projection(plane, line))
        assert pulled.ambient == plane
        assert len(evaluate(pulled, DiffField.from_q(Field.rationals(), 3)).points) == 9

    def test_restrict_ambient(self):
        """Test that restriction selects nothing outside the piece."""
        line = affine(1)
        piece = Piece.from_json({"closed": ["x0 - 1"]}, line.ring0, line.ring_xy)
        restricted = restrict_ambient(top(line), piece)
        assert evaluate(restricted, DiffField.from_q(Field.rationals(), 5)).points == [(1,)]

    def test_unknown_cover_reference(self):
        """Test that named covers must exist."""
        line = affine(1)
        with pytest.raises(KeyError):
            GaloisStratification.from_json({"strata": [{"cover": "missing", "domain": []}]}, line, {})


class TestPropertyStratification:
    """Tests for stratifying morphisms by fibre properties."""

    def test_square_is_etale(self):
        """Test that squaring over F5 is étale on both pieces."""
        line = affine(1, "F5")
        square = PresentationMorphism.from_texts(line, line, ["x0^2"])
        assert [s.holds for s in stratify_by_property(square, "etale").strata] == [True, True]

    def test_projection_is_smooth(self):
        """Test that the plane is smooth but not étale over the line."""
        plane, line = affine(2), affine(1)
        projection = PresentationMorphism.projection(plane, line)
        assert [s.holds for s in stratify_by_property(projection, "smooth").strata] == [True]
        assert [s.holds for s in stratify_by_property(projection, "etale").strata] == [False]

    def test_unsupported_property(self):
        """Test that unknown properties are refused."""
        line = affine(1)
        with pytest.raises(ValueError, match="Unsupported property"):
            stratify_by_property(PresentationMorphism.from_texts(line, line, ["x0"]), "flat")

    def test_jacobian_minors(self):
        """Test the derivative of the parabola along its fibre coordinate."""
        line = affine(1)
        graph, _ = PresentationMorphism.from_texts(line, line, ["x0^2"]).as_projection()
        fibre = graph.variables[1:]
        assert jacobian_minors(graph.I0, ("x0",), 1).is_unit()
        minors = jacobian_minors(graph.I0, fibre, 1)
        assert len(minors.gens) == 1
        assert not minors.is_unit()
