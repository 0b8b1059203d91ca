"""
Tests for difference-ring formulas: parsing, printing, semantics, prolongation
and translation from geometric objects.
"""

import pytest
from diffqe.algebra.fields import Field
from diffqe.config import DEFAULT_LIMITS
from diffqe.data import load_catalog
from diffqe.errors import BudgetExceeded, FormulaSyntaxError, UnsupportedField, VariableMismatch
from diffqe.logic import (
    Exists,
    eval_formula,
    free_vars,
    from_json,
    galois_to_fo,
    parse,
    parse_term,
    presentation_to_fo,
    quantifier_depth,
    realisations,
    sigma_depth,
    to_json,
    to_text,
    truth_by_degree,
)
from diffqe.logic.prolong import prolong, push_sigma
from diffqe.logic.syntax import And, Implies, Or, Sigma, Var, term_text
from diffqe.points import DiffField
from diffqe.presentations import DirectPresentation
from diffqe.stratifications import bottom, top

Q = Field.rationals()


@pytest.fixture
def F7():
    return DiffField.from_q(Q, 7)


class TestParser:
    """Tests for reading formulas."""

    @pytest.mark.parametrize(
        "text",
        [
            "E z. z*z - v1 = 0",
            "s(v1) - v1 = 0 | v1 = 0",
            "~(v1 = 0 & v2 = 1)",
            "(E z. z = v1) & v2 = 0",
            "s(s(v1)) = 1/2",
            "v1 = -1",
            "true",
        ],
    )
    def test_text_round_trip(self, text):
        """Test that printing reproduces the parsed text."""
        assert to_text(parse(text)) == text

    def test_precedence(self):
        """Test that & binds tighter than | and -> nests to the right."""
        assert isinstance(parse("v1 = 0 & v2 = 0 | v3 = 0"), Or)
        assert isinstance(parse("v1 = 0 | v2 = 0 & v3 = 0").right, And)
        nested = parse("v1 = 0 -> v2 = 0 -> v3 = 0")
        assert isinstance(nested.right, Implies)

    def test_nested_sigma_merges(self):
        """Test that s(s(v1)) is one σ² node."""
        formula = parse("s(s(v1)) = v1")
        assert formula.left == Sigma(Var("v1"), 2)
        assert sigma_depth(formula) == 2

    def test_unexpected_character(self):
        """Test the reported offset of a bad character."""
        with pytest.raises(FormulaSyntaxError) as info:
            parse("v1 # 2")
        assert info.value.position == 3

    @pytest.mark.parametrize("text", ["v1 = 0 &", "E s. s = 0", "v1 = 1/0", "v1 +"])
    def test_rejects(self, text):
        """Test malformed formulas."""
        with pytest.raises(FormulaSyntaxError):
            parse(text)

    def test_bound_name(self):
        """Test that reserved names cannot be quantified."""
        with pytest.raises(FormulaSyntaxError, match="cannot be bound"):
            parse("E s. s = 0")

    def test_term(self):
        """Test parsing a lone term."""
        assert term_text(parse_term("s(v1) - v1^2")) == "s(v1) - v1^2"
        with pytest.raises(FormulaSyntaxError):
            parse_term("v1 = 0")


class TestSyntax:
    """Tests for syntax helpers."""

    def test_free_vars(self):
        """Test that bound variables are not free."""
        formula = parse("E z. z*z - v1 = 0 & s(z) - z = 0")
        assert free_vars(formula) == {"v1"}
        assert quantifier_depth(formula) == 1
        assert isinstance(formula, Exists)

    def test_json_round_trip(self):
        """Test the tagged JSON tree."""
        formula = parse("A z. ~(s(z) = v1) -> z^2 = 1/3")
        assert from_json(to_json(formula)) == formula
        assert to_json(parse("v1 = 0"))["op"] == "eq"

    def test_unknown_tag(self):
        """Test that unknown JSON tags are refused."""
        with pytest.raises(ValueError, match="Unknown node tag"):
            from_json({"op": "xor", "args": []})


class TestSemantics:
    """Tests for brute-force evaluation."""

    def test_square_roots(self, F7):
        """Test square roots in F7."""
        assert eval_formula(parse("E z. z*z = 2"), {}, F7)
        assert not eval_formula(parse("E z. z*z = 3"), {}, F7)

    def test_witness_degree(self, F7):
        """Test that a square root of 3 exists in F49."""
        values = truth_by_degree(parse("E z. z*z = 3"), {}, F7, [1, 2])
        assert values == {1: False, 2: True}

    def test_forall(self, F7):
        """Test universal quantification."""
        assert eval_formula(parse("A z. z*z - 2*z + 1 = (z - 1)^2"), {}, F7)
        assert not eval_formula(parse("A z. z*z = 1"), {}, F7)

    def test_realisations(self, F7):
        """Test the solutions of σx = x^2 and the squares of F7."""
        assert realisations(parse("s(v1) - v1^2 = 0"), ["v1"], F7) == [(0,), (1,)]
        assert realisations(parse("E z. z*z - v1 = 0"), ["v1"], F7) == [(0,), (1,), (2,), (4,)]

    def test_frobenius_over_extension(self):
        """Test that σ fixes exactly F3 inside F9."""
        K = DiffField.from_q(Q, 3, 2)
        assert realisations(parse("s(v1) = v1"), ["v1"], K) == [(0,), (1,), (2,)]

    def test_missing_assignment(self, F7):
        """Test that every free variable needs a value."""
        with pytest.raises(VariableMismatch):
            eval_formula(parse("v1 = 0"), {}, F7)
        with pytest.raises(VariableMismatch):
            realisations(parse("v1 = v2"), ["v1"], F7)

    def test_pole(self):
        """Test that 1/3 has no value in characteristic 3."""
        with pytest.raises(UnsupportedField, match="pole"):
            eval_formula(parse("1/3 = 0"), {}, DiffField.from_q(Q, 3))

    def test_budget(self, F7):
        """Test that large quantifier expansions are refused."""
        with pytest.raises(BudgetExceeded):
            realisations(parse("E z. z = v1"), ["v1"], F7, DEFAULT_LIMITS.replace(budget=10))


class TestProlong:
    """Tests for rewriting to σ-depth one."""

    def test_push_sigma(self):
        """Test that σ distributes over sums and products."""
        assert term_text(push_sigma(parse_term("s(v1*v2 + 1)"))) == "s(v1)*s(v2) + 1"

    def test_free_variable(self):
        """Test that σ² on a free variable adds one prolongation variable."""
        result = prolong(parse("s(s(v1)) = v1"))
        assert to_text(result.formula) == "s(v1) = v1_p1 & s(v1_p1) = v1"
        assert result.added == {"v1": ("v1_p1",)}
        assert result.ambient == ("v1", "v1_p1")
        assert sigma_depth(result.formula) == 1

    def test_depth_one_unchanged(self):
        """Test that formulas of σ-depth one only get σ pushed inwards."""
        result = prolong(parse("s(v1) - v1 = 0"))
        assert result.added == {}
        assert to_text(result.formula) == "s(v1) - v1 = 0"

    def test_bound_variable(self):
        """Test that a bound variable is quantified with its prolongation."""
        result = prolong(parse("E z. s(s(z)) = v1"))
        assert sigma_depth(result.formula) == 1
        assert quantifier_depth(result.formula) == 2
        assert free_vars(result.formula) == {"v1"}

    def test_same_realisations(self):
        """Test that projecting the prolonged solutions recovers the original ones."""
        K = DiffField.from_q(Q, 3, 2)
        original = parse("s(s(v1)) = v1")
        result = prolong(original)
        prolonged = realisations(result.formula, result.ambient, K)
        assert sorted({p[:1] for p in prolonged}) == realisations(original, ["v1"], K)
        assert len(prolonged) == 9


class TestTranslate:
    """Tests for formulas of presentations and stratifications."""

    def test_presentation(self):
        """Test the formula of the graph of squaring."""
        P = DirectPresentation.from_json({"field": "Q", "n": 1, "I0": ["0"], "I1": ["y0 - x0^2"]})
        assert to_text(presentation_to_fo(P)) == "-x0^2 + s(x0) = 0"

    def test_top_and_bottom(self):
        """Test the constant stratifications."""
        X = DirectPresentation.from_json({"field": "Q", "n": 1, "I0": ["0"], "I1": ["0"]})
        assert to_text(galois_to_fo(bottom(X))) == "false"
        assert to_text(galois_to_fo(top(X))) == "true"

    def test_kummer_stratification(self, F7):
        """Test that the Frobenius condition selects the non-squares with witnesses in F49."""
        A = load_catalog().stratifications["kummer_nontrivial"]
        formula = galois_to_fo(A)
        assert free_vars(formula) == {"x0"}
        assert realisations(formula, ["x0"], F7, witness_degree=2) == [(3,), (5,), (6,)]
