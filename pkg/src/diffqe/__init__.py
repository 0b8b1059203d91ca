"""
diffqe: Galois stratifications and quantifier elimination for difference fields.

This package provides direct presentations of difference varieties, direct
Galois covers and stratifications, their evaluation over Frobenius difference
fields, translation to first-order formulas, direct images, and quantifier
elimination checked against brute-force evaluation.
"""

__version__ = "0.1.0"
__author__ = "diffqe developers"

from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.data import ArtifactBundle, load, load_catalog, save
from diffqe.errors import DiffQEError
from diffqe.harness import Evaluator, frobenius_scan
from diffqe.points import DiffField
from diffqe.presentations import DirectPresentation, PresentationMorphism
from diffqe.qe import direct_image, quantifier_eliminate
from diffqe.stratifications import GaloisStratification, evaluate

__all__ = [
    "__version__",
    "DEFAULT_LIMITS",
    "ArtifactBundle",
    "DiffField",
    "DiffQEError",
    "DirectPresentation",
    "Evaluator",
    "GaloisStratification",
    "Limits",
    "PresentationMorphism",
    "direct_image",
    "evaluate",
    "frobenius_scan",
    "load",
    "load_catalog",
    "quantifier_eliminate",
    "save",
]
