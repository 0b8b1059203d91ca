"""
Things that can be evaluated on a Frobenius difference field.
"""

from abc import ABC, abstractmethod
from typing import List, Optional, Sequence

from diffqe.algebra.fields import GENERATOR, Field
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.logic.semantics import realisations
from diffqe.logic.syntax import Formula, free_vars, to_text
from diffqe.points import DiffField, Point, enumerate_realisations
from diffqe.presentations import DirectPresentation, PresentationMorphism
from diffqe.qe.direct_image import pointwise_image
from diffqe.stratifications import GaloisStratification, evaluate


class Subassignment(ABC):
    """
    Abstract base class for definable subassignments.

    A subassignment picks out a set of tuples over every difference field
    (F_{q^m}, x -> x^q). Implementations wrap presentations, Galois
    stratifications, formulas and pointwise images so the harness can compare
    any two of them.
    """

    def __init__(self, name: str = "", field: Optional[Field] = None):
        self.name = name
        self.field = field

    @property
    @abstractmethod
    def arity(self) -> int:
        """Length of the tuples."""

    @abstractmethod
    def points(self, K: DiffField, limits: Limits = DEFAULT_LIMITS) -> List[Point]:
        """
        The sorted tuples selected over K.

        Raises:
            BudgetExceeded: If the evaluation does not fit ``limits.budget``.
        """

    def __call__(self, K: DiffField, limits: Limits = DEFAULT_LIMITS) -> List[Point]:
        return self.points(K, limits)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name='{self.name}')"


class PresentationSubassignment(Subassignment):
    """The realisations of a presentation."""

    def __init__(self, presentation: DirectPresentation, name: str = ""):
        super().__init__(name or presentation.name, presentation.field)
        self.presentation = presentation

    @property
    def arity(self) -> int:
        return self.presentation.n

    def points(self, K: DiffField, limits: Limits = DEFAULT_LIMITS) -> List[Point]:
        return enumerate_realisations(self.presentation, K, limits)


class StratificationSubassignment(Subassignment):
    """
    The evaluation of a Galois stratification, projected onto its first ``arity`` coordinates.

    Projection drops prolongation coordinates added by quantifier elimination.
    """

    def __init__(self, stratification: GaloisStratification, arity: Optional[int] = None, name: str = ""):
        super().__init__(name or stratification.name, stratification.ambient.field)
        self.stratification = stratification
        self._arity = stratification.ambient.n if arity is None else arity

    @property
    def arity(self) -> int:
        return self._arity

    def points(self, K: DiffField, limits: Limits = DEFAULT_LIMITS) -> List[Point]:
        selected = evaluate(self.stratification, K, limits).points
        return sorted({p[: self._arity] for p in selected})


class FormulaSubassignment(Subassignment):
    """The brute-force realisations of a formula, the oracle for elimination."""

    def __init__(
        self,
        formula: Formula,
        variables: Optional[Sequence[str]] = None,
        witness_degree: int = 1,
        name: str = "",
        field: Optional[Field] = None,
    ):
        super().__init__(name or to_text(formula), field)
        self.formula = formula
        if variables is None:
            constants = {GENERATOR} if field is not None and field.kind == "Fq" else set()
            variables = sorted(free_vars(formula) - constants)
        self.variables = tuple(variables)
        self.witness_degree = witness_degree

    @property
    def arity(self) -> int:
        return len(self.variables)

    def points(self, K: DiffField, limits: Limits = DEFAULT_LIMITS) -> List[Point]:
        return realisations(self.formula, self.variables, K, limits, self.witness_degree)


class ImageSubassignment(Subassignment):
    """f0 applied to the evaluation of a stratification on the source of f."""

    def __init__(self, morphism: PresentationMorphism, stratification: GaloisStratification, name: str = ""):
        super().__init__(name, morphism.source.field)
        self.morphism = morphism
        self.stratification = stratification

    @property
    def arity(self) -> int:
        return self.morphism.target.n

    def points(self, K: DiffField, limits: Limits = DEFAULT_LIMITS) -> List[Point]:
        return pointwise_image(self.morphism, self.stratification, K, limits)
