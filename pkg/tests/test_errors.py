"""
Tests for the exception hierarchy.
"""

import pytest
from diffqe.errors import (
    BundleError,
    DiffQEError,
    FormulaSyntaxError,
    OutOfFragment,
    UnsupportedField,
)


class TestDiffQEError:
    """Tests for the base error."""

    def test_default_stage(self):
        """Test that each class carries its own stage."""
        assert DiffQEError("x").stage == "diffqe"
        assert UnsupportedField("x").stage == "algebra"

    def test_stage_override(self):
        """Test that an explicit stage wins over the class default."""
        error = UnsupportedField("bad", stage="points")
        assert error.stage == "points"
        assert error.to_json() == {"error": {"stage": "points", "detail": "bad"}}

    def test_value_error_compatibility(self):
        """Test that input errors are also ValueErrors."""
        with pytest.raises(ValueError):
            raise UnsupportedField("F6 is not a field")


class TestSpecialisedErrors:
    """Tests for errors with extra payload."""

    def test_formula_syntax_position(self):
        """Test that the offset is kept and reported."""
        error = FormulaSyntaxError("Unexpected token", 4)
        assert error.position == 4
        assert "position 4" in error.detail

    def test_out_of_fragment_subformula(self):
        """Test that the offending subformula is serialised."""
        error = OutOfFragment("Nested shift", "s(s(v1)) = 0")
        data = error.to_json()
        assert data["error"]["subformula"] == "s(s(v1)) = 0"
        assert data["error"]["stage"] == "qe"
        assert error.detail == "Nested shift: s(s(v1)) = 0"

    def test_bundle_error_pointer(self):
        """Test that bundle errors lead with their JSON pointer."""
        error = BundleError("Unresolved reference", "/tasks/t/morphism")
        assert error.path == "/tasks/t/morphism"
        assert error.detail.startswith("/tasks/t/morphism: ")
        assert BundleError("No bundle").detail == "/: No bundle"
