"""
Tests for the harness: agreement metrics, subassignments and Frobenius scans.
"""

import json

import pytest
from diffqe.algebra.fields import Field
from diffqe.data import load_catalog
from diffqe.harness import (
    Evaluator,
    FormulaSubassignment,
    ImageSubassignment,
    PresentationSubassignment,
    StratificationSubassignment,
    agreement_threshold,
    disagreement,
    frobenius_scan,
    parse_grid,
    symmetric_difference,
)
from diffqe.harness.metrics import failures_below, nonempty_threshold
from diffqe.logic import parse
from diffqe.points import DiffField
from diffqe.stratifications import top

Q = Field.rationals()


@pytest.fixture(scope="module")
def catalog():
    return load_catalog()


class TestSymmetricDifference:
    """Tests for point set comparison."""

    def test_missing_and_extra(self):
        """Test both sides of the difference."""
        diff = symmetric_difference([(0,), (1,)], [(1,), (2,)])
        assert diff == {"missing": [(0,)], "extra": [(2,)]}
        assert disagreement([(0,), (1,)], [(1,), (2,)]) == 2

    def test_equal_sets(self):
        """Test that order and duplicates do not matter."""
        assert disagreement([(1,), (0,), (0,)], [(0,), (1,)]) == 0


class TestAgreementThreshold:
    """Tests for the empirical threshold."""

    def test_threshold(self):
        """Test the least q beyond which everything agrees."""
        assert agreement_threshold({(3, 1): False, (5, 1): True, (7, 1): True}) == 5

    def test_late_failure(self):
        """Test that a failure at the largest q gives no threshold."""
        assert agreement_threshold({(3, 1): True, (5, 1): False}) is None

    def test_all_degrees_must_agree(self):
        """Test that one failing extension degree fails the whole q."""
        outcomes = {(3, 1): True, (3, 2): False, (5, 1): True, (5, 2): True}
        assert agreement_threshold(outcomes) == 5
        assert failures_below(outcomes, 5) == [(3, 2)]

    def test_always(self):
        """Test agreement from the smallest tested q."""
        assert agreement_threshold({(2, 1): True, (3, 1): True}) == 2

    def test_nonempty_threshold(self):
        """Test thresholds on witness degrees."""
        assert nonempty_threshold({3: None, 5: 2, 7: 1}) == 5


class TestParseGrid:
    """Tests for grid descriptions."""

    def test_plain(self):
        """Test a list of q values."""
        assert parse_grid("7, 3,5") == [(3, 1), (5, 1), (7, 1)]

    def test_degrees(self):
        """Test explicit degrees and default degrees."""
        assert parse_grid("3:2,5", m_values=(1, 2)) == [(3, 2), (5, 1), (5, 2)]

    def test_malformed(self):
        """Test that non-integers are refused."""
        with pytest.raises(ValueError):
            parse_grid("3,five")


class TestSubassignments:
    """Tests for evaluable subassignments."""

    def test_presentation(self, catalog):
        """Test the realisations of σx = x^2 over F3."""
        sub = PresentationSubassignment(catalog.presentations["square_graph"])
        assert sub.arity == 1
        assert sub(DiffField.from_q(Q, 3)) == [(0,), (1,)]
        assert "square_graph" in repr(sub)

    def test_stratification(self, catalog):
        """Test the evaluation of the Kummer stratification."""
        sub = StratificationSubassignment(catalog.stratifications["kummer_nontrivial"])
        assert sub.points(DiffField.from_q(Q, 7)) == [(3,), (5,), (6,)]

    def test_stratification_projection(self):
        """Test that extra ambient coordinates are projected away."""
        plane = load_catalog().presentations["free_plane"]
        sub = StratificationSubassignment(top(plane), arity=1)
        assert sub.points(DiffField.from_q(Q, 3)) == [(0,), (1,), (2,)]

    def test_formula(self):
        """Test the oracle for a formula with default variables."""
        sub = FormulaSubassignment(parse("E z. z*z - v1 = 0"), field=Q)
        assert sub.variables == ("v1",)
        assert sub.points(DiffField.from_q(Q, 5)) == [(0,), (1,), (4,)]

    def test_image(self, catalog):
        """Test the pointwise image of squaring on the fixed units."""
        task = catalog.tasks["square_image"]
        sub = ImageSubassignment(task.morphism, task.stratification)
        assert sub.points(DiffField.from_q(Q, 7)) == [(1,), (2,), (4,)]


class TestFrobeniusScan:
    """Tests for threshold scans."""

    def test_presentation(self, catalog):
        """Test that σx = x^2 has a point for every q."""
        report = frobenius_scan(catalog.presentations["square_graph"], [(2, 1), (3, 1), (5, 1)])
        assert report.N == 2
        assert report.holds
        assert report.witnesses == {2: 1, 3: 1, 5: 1}

    def test_pair_disagreement(self):
        """Test a pair that never agrees and its failure details."""
        first = FormulaSubassignment(parse("v1 = 0"), field=Q)
        second = FormulaSubassignment(parse("v1 = 1"), field=Q)
        report = frobenius_scan((first, second), [(3, 1), (5, 1)], "zero vs one")
        assert report.N is None
        assert not report.holds
        assert report.to_json()["instance"] == "zero vs one"

    def test_pair_agreement(self):
        """Test two descriptions of the squares."""
        first = FormulaSubassignment(parse("E z. z*z = v1"), field=Q)
        second = FormulaSubassignment(parse("E w. v1 - w^2 = 0"), field=Q)
        assert frobenius_scan((first, second), [(3, 1), (5, 1), (7, 1)]).N == 3

    def test_unknown_field(self):
        """Test that a pair needs a base field."""
        first = FormulaSubassignment(parse("v1 = 0"))
        with pytest.raises(ValueError):
            frobenius_scan((first, first), [(3, 1)])


class TestEvaluator:
    """Tests for catalog-wide runs."""

    def test_formulas(self, catalog):
        """Test that elimination agrees with the oracle on the Kummer formula."""
        reports = Evaluator(catalog, [(3, 1), (5, 1), (7, 1)]).run_formulas()
        assert reports["kummer_fixed_root"]["N"] == 3
        assert reports["tautology"]["N"] == 3
        assert reports["square_root"]["N"] == 3
        assert reports["inverse"]["N"] == 3

    def test_field_mismatch_is_reported(self, catalog):
        """Test that an F5 formula scanned at q = 3 records its error."""
        reports = Evaluator(catalog, [(3, 1)]).run_formulas()
        assert "characteristic" in reports["fixed_or_zero"]["error"]["detail"]
        assert "N" not in reports["fixed_or_zero"]

    def test_tasks(self, catalog):
        """Test that catalog images agree with their pointwise images."""
        reports = Evaluator(catalog, [(5, 1), (7, 1)]).run_tasks()
        assert reports["square_image"]["N"] == 5
        assert reports["kummer_plane_image"]["N"] == 5
        assert reports["axes_image"]["N"] == 5

    def test_save_results(self, catalog, tmp_path):
        """Test that reports are written as JSON."""
        evaluator = Evaluator(catalog, [(3, 1), (5, 1)])
        evaluator.run_presentations()
        output = tmp_path / "results" / "reports.json"
        evaluator.save_results(output)
        data = json.loads(output.read_text())
        assert data["square_graph"]["N"] == 3
