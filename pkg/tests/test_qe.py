"""
Tests for direct images and quantifier elimination.
"""

import numpy as np
import pytest
from diffqe.algebra.fields import Field
from diffqe.data import load_catalog
from diffqe.errors import OutOfFragment, VariableMismatch
from diffqe.logic import parse, realisations
from diffqe.logic.syntax import Atom, Sigma, Var
from diffqe.pieces import Piece
from diffqe.points import DiffField
from diffqe.presentations import DirectPresentation, PresentationMorphism
from diffqe.qe import (
    DirectImageTask,
    affine_space,
    direct_image,
    image_points,
    pointwise_image,
    quantifier_eliminate,
    stein_factorize,
)
from diffqe.qe.eliminate import atom_piece, term_to_poly
from diffqe.stratifications import evaluate, indicator, top

Q = Field.rationals()


def affine(n):
    return DirectPresentation.from_json({"field": "Q", "n": n, "I0": ["0"], "I1": ["0"]})


def fixed_line():
    return DirectPresentation.from_json({"field": "Q", "n": 1, "I0": ["0"], "I1": ["y0 - x0"]})


def units(X):
    """⊤ on x0 ≠ 0 and ⊥ on the origin."""
    return indicator(X, Piece.from_json({"open": ["x0"]}, X.ring0, X.ring_xy))


@pytest.fixture
def square():
    line = fixed_line()
    return PresentationMorphism.from_texts(line, line, ["x0^2"])


@pytest.fixture(scope="module")
def catalog():
    return load_catalog()


@pytest.fixture
def F7():
    return DiffField.from_q(Q, 7)


class TestDirectImage:
    """Tests for images of stratifications along morphisms."""

    def test_squares(self, square, F7):
        """Test that the image of squaring on the fixed units is the set of nonzero squares."""
        task = DirectImageTask(square, units(square.source), "finite_etale")
        result = evaluate(direct_image(task), F7)
        assert result.points == [(1,), (2,), (4,)]
        assert result.points == pointwise_image(square, units(square.source), F7)

    def test_composite_squares(self, square, F7):
        """Test that the composite case factors squaring as a finite map."""
        task = DirectImageTask(square, units(square.source))
        assert evaluate(direct_image(task), F7).points == [(1,), (2,), (4,)]

    @pytest.mark.parametrize("case", ["finite_etale", "composite"])
    @pytest.mark.parametrize("q, m", [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1), (7, 2)])
    def test_squares_agree_with_pointwise_image(self, square, case, q, m):
        """Test the image of squaring against the pointwise image over F_{q^m}."""
        K = DiffField.from_q(Q, q, m)
        A = units(square.source)
        computed = evaluate(direct_image(DirectImageTask(square, A, case)), K).points
        assert computed == pointwise_image(square, A, K)

    def test_projection_is_surjective(self):
        """Test that the plane projects onto the line."""
        plane, line = affine(2), affine(1)
        task = DirectImageTask(PresentationMorphism.projection(plane, line), top(plane), "fibration")
        assert len(evaluate(direct_image(task), DiffField.from_q(Q, 5)).points) == 5

    @pytest.mark.parametrize("name", ["kummer_plane_image", "kummer_pair_image"])
    def test_pulled_back_kummer(self, catalog, name, F7):
        """Test that the pushed cover keeps the nonsquare condition on x0."""
        task = catalog.tasks[name]
        result = evaluate(direct_image(task), F7)
        assert result.points == [(3,), (5,), (6,)]
        assert result.points == pointwise_image(task.morphism, task.stratification, F7)

    @pytest.mark.parametrize("q, m", [(3, 1), (5, 1), (3, 2)])
    def test_reducible_source(self, catalog, q, m):
        """Test that the two fixed axes project onto the whole fixed line."""
        task = catalog.tasks["axes_image"]
        K = DiffField.from_q(Q, q, m)
        computed = evaluate(direct_image(task), K).points
        assert len(computed) == q
        assert computed == pointwise_image(task.morphism, task.stratification, K)

    def test_task_validation(self, square):
        """Test unknown cases and stratifications on the wrong space."""
        with pytest.raises(ValueError, match="Unknown direct image case"):
            DirectImageTask(square, top(square.source), "proper")
        with pytest.raises(VariableMismatch):
            DirectImageTask(square, top(affine(2)))

    def test_image_points(self, square, F7):
        """Test that ±3 both square to 2 in F7."""
        assert image_points(square, [(3,), (4,)], F7) == [(2,)]

    def test_stein_factorisation(self, square):
        """Test the finite and fibration parts of two projections."""
        assert stein_factorize(square).is_finite
        plane, line = affine(2), affine(1)
        assert stein_factorize(PresentationMorphism.projection(plane, line)).is_fibration


class TestAtoms:
    """Tests for turning equations into pieces."""

    def test_affine_space(self):
        """Test the shifted names of a fresh affine space."""
        X = affine_space(Q, ["v1", "v1_s"])
        assert X.shifted == ("v1_s_", "v1_s_s")

    def test_level_of_atom(self):
        """Test that only equations with σ need the correspondence."""
        X = affine_space(Q, ["v1"])
        assert atom_piece(parse("v1 = 0"), X).level1.is_whole()
        assert atom_piece(parse("s(v1) = v1"), X).level0.is_whole()

    def test_nested_sigma(self):
        """Test that σ² is outside the polynomial fragment."""
        X = affine_space(Q, ["v1"])
        with pytest.raises(OutOfFragment):
            term_to_poly(Sigma(Var("v1"), 2), X.ring_xy, X.shift_map())
        with pytest.raises(OutOfFragment):
            atom_piece(Atom(Sigma(Var("v1"), 2), Var("v1")), X)


class TestQuantifierEliminate:
    """Tests for eliminating quantifiers to stratifications."""

    def test_fixed_square_root(self, F7):
        """Test that a σ-fixed square root exists exactly over the squares."""
        A = quantifier_eliminate(parse("E z. z*z - v1 = 0 & s(z) - z = 0"), Q)
        assert evaluate(A, F7).points == [(0,), (1,), (2,), (4,)]

    def test_quantifier_free(self, F7):
        """Test that an equation evaluates to its own solutions."""
        formula = parse("s(v1) - v1^2 = 0")
        A = quantifier_eliminate(formula, Q)
        assert evaluate(A, F7).points == realisations(formula, ["v1"], F7)

    def test_negation(self):
        """Test the complement of the origin."""
        A = quantifier_eliminate(parse("~(v1 = 0)"), Q)
        assert evaluate(A, DiffField.from_q(Q, 5)).points == [(1,), (2,), (3,), (4,)]

    def test_truth(self):
        """Test that true selects every point of the listed variables."""
        A = quantifier_eliminate(parse("true"), Q, ["v1"])
        assert A.ambient.variables == ("v1",)
        assert len(evaluate(A, DiffField.from_q(Q, 5)).points) == 5

    def test_prolonged_ambient(self):
        """Test that σ² on a free variable adds a coordinate to the ambient space."""
        A = quantifier_eliminate(parse("s(s(v1)) = v1"), Q)
        assert A.ambient.variables == ("v1", "v1_p1")
        points = evaluate(A, DiffField.from_q(Q, 3, 2)).points
        assert len(points) == 9
        assert sorted({p[0] for p in points}) == list(range(9))

    def test_non_monic_fibre(self):
        """Test that an inverse exists exactly away from the origin."""
        A = quantifier_eliminate(parse("E z. z*v1 - 1 = 0"), Q)
        assert evaluate(A, DiffField.from_q(Q, 5)).points == [(1,), (2,), (3,), (4,)]

    def test_square_roots_over_the_closure(self, F7):
        """Test that every element has a square root once witnesses range over F_49."""
        formula = parse("E z. z*z - v1 = 0")
        points = evaluate(quantifier_eliminate(formula, Q), F7).points
        assert len(points) == 7
        assert points == realisations(formula, ["v1"], F7, witness_degree=2)
        assert len(realisations(formula, ["v1"], F7)) == 4

    @pytest.mark.parametrize(
        "text, witness_degree",
        [
            ("E z. z*z - v1 = 0", 2),
            ("E z. z*z - v1 = 0 & s(z) + z = 0", 2),
            ("E z. z*z - v1 = 0 & s(v1) - v1 = 0", 2),
            ("E z. z*z - v1 = 0 & s(z) - z = 0", 1),
            ("E z. z*v1 - 1 = 0", 1),
        ],
    )
    @pytest.mark.parametrize("q, m", [(5, 1), (7, 1), (5, 2)])
    def test_agrees_with_oracle(self, text, witness_degree, q, m):
        """Test elimination against brute-force realisations with witnesses in the splitting degree."""
        formula = parse(text)
        K = DiffField.from_q(Q, q, m)
        A = quantifier_eliminate(formula, Q, ["v1"])
        assert evaluate(A, K).points == realisations(formula, ["v1"], K, witness_degree=witness_degree)


class TestRandomFormulas:
    """Seeded comparisons of elimination with the brute-force oracle."""

    @pytest.mark.parametrize("seed", range(8))
    def test_affine_families(self, seed):
        """Test shifted square roots and scaled inverses with random coefficients."""
        rng = np.random.default_rng(seed)
        a, b = (int(c) for c in rng.integers(1, 5, size=2))
        K = DiffField.from_q(Q, int(rng.choice([5, 7])))
        for text, witness_degree in ((f"E z. z*z - {a}*v1 - {b} = 0", 2), (f"E z. {a}*z*v1 - {b} = 0", 1)):
            formula = parse(text)
            A = quantifier_eliminate(formula, Q, ["v1"])
            assert evaluate(A, K).points == realisations(formula, ["v1"], K, witness_degree=witness_degree)
