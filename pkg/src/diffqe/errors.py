"""
Exception hierarchy for diffqe.

Every error carries the pipeline ``stage`` that raised it and a human-readable
``detail``. The CLI serialises both into ``{"error": {"stage": ..., "detail": ...}}``.
"""

from typing import Any, Dict, Optional


class DiffQEError(Exception):
    """Base class for all domain errors raised by diffqe."""

    stage: str = "diffqe"

    def __init__(self, detail: str, stage: Optional[str] = None):
        super().__init__(detail)
        self.detail = detail
        if stage is not None:
            self.stage = stage

    def to_json(self) -> Dict[str, Any]:
        return {"error": {"stage": self.stage, "detail": self.detail}}


class UnsupportedField(DiffQEError, ValueError):
    stage = "algebra"


class VariableMismatch(DiffQEError, ValueError):
    stage = "algebra"


class PolynomialSyntaxError(DiffQEError, ValueError):
    stage = "algebra.parse"


class DecompositionIncomplete(DiffQEError):
    """The splitting strategy could not certify primality of a component."""

    stage = "algebra.decompose"


class Undecided(DiffQEError):
    """No certificate applies at the configured bound."""

    stage = "algebra.geometric_integrality"


class PresentationInsufficient(DiffQEError):
    stage = "algebra.relative_closure"


class BudgetExceeded(DiffQEError):
    stage = "points"


class InvalidPresentation(DiffQEError, ValueError):
    stage = "presentations"


class InvalidCover(DiffQEError, ValueError):
    stage = "covers"


class NoGroupElement(DiffQEError):
    stage = "covers.find_group_element"


class NonUnique(DiffQEError):
    stage = "covers.find_group_element"


class LiftNotFound(DiffQEError):
    stage = "covers.local_frobenius"


class NotEtale(DiffQEError):
    stage = "covers.local_frobenius"


class FormulaSyntaxError(DiffQEError, ValueError):
    """Syntax error in formula text, with the offending character offset."""

    stage = "logic.parse"

    def __init__(self, detail: str, position: int):
        super().__init__(f"{detail} at position {position}")
        self.position = position


class OutOfFragment(DiffQEError):
    """A formula step outside the supported elimination fragment."""

    stage = "qe"

    def __init__(self, detail: str, subformula: str = "", stage: Optional[str] = None):
        super().__init__(f"{detail}: {subformula}" if subformula else detail, stage)
        self.subformula = subformula

    def to_json(self) -> Dict[str, Any]:
        data = super().to_json()
        data["error"]["subformula"] = self.subformula
        return data


class UnsupportedCase(DiffQEError):
    stage = "qe.direct_image"


class BundleError(DiffQEError, ValueError):
    """Schema violation in an artifact bundle, located by a JSON pointer."""

    stage = "bundle"

    def __init__(self, detail: str, path: str = ""):
        super().__init__(f"{path or '/'}: {detail}")
        self.path = path
