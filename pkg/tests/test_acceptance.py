"""
Tests for end-to-end properties swept over the catalog and small Frobenius fields.
"""

import pytest
from diffqe.algebra.fields import Field
from diffqe.covers import lift_classes
from diffqe.data import load_catalog
from diffqe.logic import galois_to_fo, realisations
from diffqe.points import DiffField, enumerate_realisations, nonempty_witness
from diffqe.presentations import direct_decompose, is_h_direct
from diffqe.qe import direct_image, pointwise_image
from diffqe.stratifications import AND, NOT, OR, boolean_combine, evaluate

Q = Field.rationals()
CATALOG = load_catalog()


def compatible(field, q):
    return field.p == 0 or q % field.p == 0


def grid(field, q_values, m_values):
    return [(q, m) for q in q_values for m in m_values if compatible(field, q)]


DECOMPOSED = [
    "empty",
    "fixed_pair",
    "fixed_plane",
    "line_pair",
    "square_graph",
    "translation_line",
    "zero_shift",
]


def decomposition_cases():
    for name in DECOMPOSED:
        P = CATALOG.presentations[name]
        m_values = (1, 2, 3) if P.n == 1 else (1, 2)
        for q, m in grid(P.field, (2, 3, 5, 7), m_values):
            yield name, q, m


class TestDecompositionSweep:
    """Tests that direct components cover exactly the realisations."""

    @pytest.mark.parametrize("name, q, m", list(decomposition_cases()))
    def test_union_of_components(self, name, q, m):
        """Test that the components' realisations union to the input's."""
        P = CATALOG.presentations[name]
        K = DiffField.from_q(P.field, q, m)
        union = set()
        for W in direct_decompose(P):
            union.update(enumerate_realisations(W, K))
        assert sorted(union) == enumerate_realisations(P, K)


class TestKummerCounts:
    """Tests for the Frobenius classes of the square-root cover."""

    @pytest.mark.parametrize("q", [3, 5, 7, 9, 11, 13])
    def test_half_of_the_units(self, q):
        """Test that each class takes half of the fixed units."""
        K = DiffField.from_q(Q, q)
        nonsquares = evaluate(CATALOG.stratifications["kummer_nontrivial"], K).points
        squares = evaluate(CATALOG.stratifications["kummer_squares"], K).points
        assert len(nonsquares) == len(squares) == (q - 1) // 2
        assert sorted(nonsquares + squares) == evaluate(CATALOG.stratifications["fixed_units"], K).points


def lift_cases():
    for name, D in sorted(CATALOG.covers.items()):
        if D.base.n == 1:
            cells = [(q, m) for q in (3, 5, 7, 9, 11, 13) for m in (1, 2)]
        else:
            cells = [(3, 1), (5, 1), (7, 1)]
        for q, m in cells:
            yield name, q, m


class TestLiftIndependence:
    """Tests that every lift over a base point gives one twisted class."""

    @pytest.mark.parametrize("name, q, m", list(lift_cases()))
    def test_one_class_per_point(self, name, q, m):
        """Test all lifts over every unramified realisation of the base."""
        D = CATALOG.covers[name]
        K = DiffField.from_q(D.base.field, q, m)
        for x in enumerate_realisations(D.base, K):
            if 0 in x:
                continue
            classes = lift_classes(D, x, K)
            assert classes
            assert len(set(classes)) == 1


BOOLEAN_PAIRS = [
    ("kummer_nontrivial", "fixed_units"),
    ("kummer_nontrivial", "kummer_squares"),
    ("kummer_squares", "fixed_units"),
]


class TestBooleanLaws:
    """Tests that connectives evaluate to the set operations."""

    @pytest.mark.parametrize("first, second", BOOLEAN_PAIRS)
    @pytest.mark.parametrize("q, m", [(3, 1), (5, 1), (7, 1), (3, 2)])
    def test_connectives(self, first, second, q, m):
        """Test conjunction, disjunction and negation against their point sets."""
        A, B = CATALOG.stratifications[first], CATALOG.stratifications[second]
        K = DiffField.from_q(Q, q, m)
        a, b = set(evaluate(A, K).points), set(evaluate(B, K).points)
        everything = set(enumerate_realisations(A.ambient, K))
        assert evaluate(boolean_combine(A, B, AND), K).points == sorted(a & b)
        assert evaluate(boolean_combine(A, B, OR), K).points == sorted(a | b)
        assert evaluate(boolean_combine(A, None, NOT), K).points == sorted(everything - a)


TRANSLATED = ["fixed_units", "free_line_top", "kummer_nontrivial", "kummer_squares"]


class TestTranslationSweep:
    """Tests that first-order translations have the stratification's points."""

    @pytest.mark.parametrize("name", TRANSLATED)
    @pytest.mark.parametrize("q", [3, 5, 7])
    def test_translation(self, name, q):
        """Test evaluation against the oracle with witnesses in the cover's splitting degree."""
        A = CATALOG.stratifications[name]
        K = DiffField.from_q(Q, q)
        witness_degree = max(s.cover.G0.order for s in A.strata)
        formula = galois_to_fo(A)
        expected = realisations(formula, list(A.ambient.variables), K, witness_degree=witness_degree)
        assert evaluate(A, K).points == expected


class TestFibrationSweep:
    """Tests for images along the projection of the fixed plane."""

    @pytest.mark.parametrize("name", ["kummer_plane_image", "kummer_pair_image", "axes_image"])
    @pytest.mark.parametrize("q, m", [(3, 1), (5, 1), (7, 1), (3, 2)])
    def test_image_is_pointwise(self, name, q, m):
        """Test that the computed image equals the image of the evaluated input."""
        task = CATALOG.tasks[name]
        K = DiffField.from_q(Q, q, m)
        computed = evaluate(direct_image(task), K).points
        assert computed == pointwise_image(task.morphism, task.stratification, K)


def witness_cases():
    for name, P in sorted(CATALOG.presentations.items()):
        if P.is_empty() or not is_h_direct(P):
            continue
        for q in (3, 5, 7):
            if compatible(P.field, q):
                yield name, q


class TestWitnessSweep:
    """Tests that H-direct presentations acquire points in small extensions."""

    @pytest.mark.parametrize("name, q", list(witness_cases()))
    def test_nonempty_and_stable(self, name, q):
        """Test that a witness exists within six degrees and is reproducible."""
        P = CATALOG.presentations[name]
        found = nonempty_witness(P, q, 6)
        assert found is not None
        assert nonempty_witness(P, q, 6) == found
