"""
Tests for presentations, their morphisms and locally closed pieces.
"""

import pytest
from diffqe.algebra.fields import Field
from diffqe.algebra.ideals import Ideal
from diffqe.errors import InvalidPresentation, UnsupportedCase, VariableMismatch
from diffqe.pieces import LocallyClosed, Piece
from diffqe.points import DiffField, enumerate_realisations
from diffqe.presentations import (
    DirectPresentation,
    PresentationMorphism,
    direct_decompose,
    direct_localize,
    directly_integral,
    fibre_product,
    is_h_direct,
    validate,
)


def presentation(I0, I1, field="Q", n=1):
    return DirectPresentation.from_json({"field": field, "n": n, "I0": I0, "I1": I1})


@pytest.fixture
def free_line():
    return presentation(["0"], ["0"])


class TestDirectPresentation:
    """Tests for building presentations."""

    def test_default_names(self):
        """Test that n alone gives x and y coordinates."""
        P = presentation(["0"], ["y0 - x0^2"])
        assert P.variables == ("x0",)
        assert P.shifted == ("y0",)
        assert not P.almost

    def test_json_round_trip(self):
        """Test that the canonical form parses back to an equal presentation."""
        P = presentation(["0"], ["y0 - x0^2"], field="F5")
        assert DirectPresentation.from_json(P.to_json()) == P
        assert P.to_json()["I1"] == ["-x0^2 + y0"]

    def test_custom_names(self):
        """Test explicit variables and shifted copies."""
        P = DirectPresentation.from_json(
            {"field": "Q", "variables": ["u"], "shifted": ["su"], "I0": ["0"], "I1": ["su - u"]}
        )
        assert P.to_json()["variables"] == ["u"]
        assert P.shift_map() == {"u": "su"}

    def test_mismatched_shifted(self):
        """Test that each variable needs one shifted copy."""
        with pytest.raises(InvalidPresentation):
            DirectPresentation.from_json({"field": "Q", "variables": ["u", "v"], "shifted": ["su"], "I0": [], "I1": []})

    def test_unknown_variable(self):
        """Test that ideals may only use the presentation's variables."""
        with pytest.raises(VariableMismatch):
            presentation(["0"], ["y0 - z"])

    def test_is_empty(self):
        """Test emptiness at either level."""
        assert presentation(["1"], ["1"]).is_empty()
        assert presentation(["0"], ["x0", "x0 - 1"]).is_empty()
        assert not presentation(["0"], ["y0"]).is_empty()

    def test_twisted_shift_over_extension(self):
        """Test that shifting twists the coefficients by the base Frobenius."""
        P = presentation(["x0 - t"], ["x0 - t", "y0 - t^3"], field="F9")
        assert validate(P).valid


class TestValidate:
    """Tests for presentation validation."""

    def test_valid(self):
        """Test a well-formed presentation."""
        report = validate(presentation(["x0^2 - 1"], ["x0^2 - 1", "y0 - x0"]))
        assert report.valid
        assert report.errors == []
        assert report.reduced == {"I0": True, "I1": True}

    def test_projections_escape(self):
        """Test that X1 must map into X0 and X0ς."""
        report = validate(presentation(["x0 - 1"], ["y0 - x0"]))
        assert not report.valid
        assert len(report.errors) == 2
        assert "π1" in report.errors[0]

    def test_non_reduced(self):
        """Test that a double point is reported as non-reduced."""
        report = validate(presentation(["x0^2"], ["x0^2", "y0^2"]))
        assert report.reduced["I0"] is False


class TestDirectDecompose:
    """Tests for direct decomposition."""

    def test_h_direct_is_its_own_decomposition(self):
        """Test that the fixed line is already H-direct."""
        P = presentation(["0"], ["y0 - x0"])
        assert is_h_direct(P)
        assert [W.key() for W in direct_decompose(P)] == [P.key()]

    def test_directly_integral(self):
        """Test that two fixed points are not directly integral."""
        assert directly_integral(presentation(["0"], ["y0 - x0"]))
        assert not directly_integral(presentation(["x0^2 - 1"], ["x0^2 - 1", "y0 - x0"]))

    def test_two_fixed_points(self):
        """Test that x^2 = 1 with σx = x splits into two points."""
        components = direct_decompose(presentation(["x0^2 - 1"], ["x0^2 - 1", "y0 - x0"]))
        assert sorted(W.I0.canonical_texts() for W in components) == [["x0 + 1"], ["x0 - 1"]]
        assert all(is_h_direct(W) for W in components)

    def test_zero_shift(self):
        """Test that σx = 0 shrinks to the origin."""
        P = presentation(["0"], ["y0"], field="F5")
        assert not is_h_direct(P)
        components = direct_decompose(P)
        assert [W.I0.canonical_texts() for W in components] == [["x0"]]

    def test_empty(self):
        """Test that the empty presentation has no components."""
        assert direct_decompose(presentation(["1"], ["1"])) == []

    def test_realisations_preserved(self):
        """Test that the components realise the same tuples."""
        P = presentation(["x0^2 - 1"], ["x0^2 - 1", "y0 - x0"])
        K = DiffField.from_q(Field.rationals(), 5)
        union = sorted(p for W in direct_decompose(P) for p in enumerate_realisations(W, K))
        assert union == enumerate_realisations(P, K)


class TestDirectLocalize:
    """Tests for open sub-presentations."""

    def test_removes_zero(self, free_line):
        """Test that localising at x0 drops the origin."""
        local = direct_localize(free_line, V0=["x0"])
        assert local.n == 2
        K = DiffField.from_q(Field.rationals(), 5)
        assert len(enumerate_realisations(local, K)) == 4

    def test_zero_generators_are_dropped(self, free_line):
        """Test that a zero generator does not add a coordinate."""
        local = direct_localize(free_line, V0=["x0", "0"])
        assert local.n == 2
        assert len(enumerate_realisations(local, DiffField.from_q(Field.rationals(), 5))) == 4

    def test_open_must_be_principal(self, free_line):
        """Test that several level-0 generators are refused."""
        with pytest.raises(UnsupportedCase, match="single generator"):
            direct_localize(free_line, V0=["x0", "x0^2"])

    def test_nothing_removed(self, free_line):
        """Test that None leaves the presentation unchanged."""
        assert direct_localize(free_line) is free_line

    def test_everything_removed(self, free_line):
        """Test that an empty list of opens removes everything."""
        assert direct_localize(free_line, V0=[]).is_empty()

    def test_level_one_open_is_almost_direct(self, free_line):
        """Test that a level-1 open adds correspondence coordinates."""
        local = direct_localize(free_line, V1=["y0 - x0"])
        assert local.almost
        K = DiffField.from_q(Field.rationals(), 5)
        assert enumerate_realisations(local, K) == []
        assert len(enumerate_realisations(local, DiffField.from_q(Field.rationals(), 5, 2))) == 20


class TestMorphisms:
    """Tests for morphisms of presentations."""

    def test_validate(self, free_line):
        """Test that squaring is a morphism of the free line."""
        square = PresentationMorphism.from_texts(free_line, free_line, ["x0^2"])
        assert square.validate() == []
        assert not square.is_projection()

    def test_validate_escape(self):
        """Test a map that does not respect the shifted equation."""
        fixed = presentation(["0"], ["y0 - x0"])
        graph = presentation(["0"], ["y0 - x0^2"])
        errors = PresentationMorphism.from_texts(fixed, graph, ["x0"]).validate()
        assert errors and "f1^*" in errors[0]

    def test_component_count(self, free_line):
        """Test that one polynomial is needed per target variable."""
        with pytest.raises(VariableMismatch):
            PresentationMorphism.from_texts(free_line, free_line, ["x0", "x0"])

    def test_projection(self):
        """Test projecting the plane onto its first coordinate."""
        plane = presentation(["0"], ["0"], n=2)
        line = presentation(["0"], ["0"])
        f = PresentationMorphism.projection(plane, line)
        assert f.is_projection()
        assert f.as_projection() == (plane, f)

    def test_graph(self, free_line):
        """Test that the graph of squaring projects onto the target."""
        square = PresentationMorphism.from_texts(free_line, free_line, ["x0^2"])
        graph, projection = square.as_projection()
        assert graph.n == 2
        assert projection.is_projection()
        K = DiffField.from_q(Field.rationals(), 5)
        assert sorted(p[0] for p in enumerate_realisations(graph, K)) == [0, 1, 1, 4, 4]

    def test_fibre_product(self, free_line):
        """Test the pairs with equal squares."""
        square = PresentationMorphism.from_texts(free_line, free_line, ["x0^2"])
        product = fibre_product(square, square)
        assert product.n == 2
        assert len(enumerate_realisations(product, DiffField.from_q(Field.rationals(), 7))) == 13


class TestPieces:
    """Tests for locally closed pieces."""

    def test_empty(self):
        """Test that V(x) minus V(x) is empty."""
        R = presentation(["0"], ["0"]).ring0
        assert LocallyClosed.from_texts(R, ["x0"], ["x0"]).is_empty()
        assert not LocallyClosed.from_texts(R, [], ["x0"]).is_empty()

    def test_complement(self):
        """Test that the complement of V(x0) minus V(x1) has two parts."""
        R = presentation(["0"], ["0"], n=2).ring0
        parts = LocallyClosed.from_texts(R, ["x0"], ["x1"]).complement()
        assert len(parts) == 2
        assert parts[1].closed.equals(Ideal.from_text(R, ["x0", "x1"]))

    def test_json(self):
        """Test the level-1 keys of a piece."""
        P = presentation(["0"], ["0"])
        piece = Piece.from_json({"closed": ["x0"], "open1": ["y0"]}, P.ring0, P.ring_xy)
        assert piece.to_json() == {"closed": ["x0"], "open1": ["y0"]}
        assert not piece.is_whole()
        assert P.whole_piece().is_whole()
