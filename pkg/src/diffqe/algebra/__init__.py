"""
Exact polynomial and ideal arithmetic over Q and finite fields.
"""

from diffqe.algebra.closure import FunctionFieldTower, TowerGenerator, relative_algebraic_closure
from diffqe.algebra.decompose import decompose_variety, is_geometrically_integral, is_prime
from diffqe.algebra.factor import factor_multivariate, factor_univariate, splitting_field
from diffqe.algebra.fields import Field, FieldExtensionDesc
from diffqe.algebra.ideals import Ideal, dimension, eliminate, groebner, ideal_combine, ideal_membership
from diffqe.algebra.polys import Ring, format_poly

__all__ = [
    "Field",
    "FieldExtensionDesc",
    "FunctionFieldTower",
    "Ideal",
    "Ring",
    "TowerGenerator",
    "decompose_variety",
    "dimension",
    "eliminate",
    "factor_multivariate",
    "factor_univariate",
    "format_poly",
    "groebner",
    "ideal_combine",
    "ideal_membership",
    "is_geometrically_integral",
    "is_prime",
    "relative_algebraic_closure",
    "splitting_field",
]
