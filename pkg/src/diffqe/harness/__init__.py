"""
Empirical harness for Frobenius statements.

This module compares computed stratifications with brute-force evaluations
over grids of finite difference fields and reports agreement thresholds.
"""

from diffqe.harness.evaluator import Evaluator, FrobReport, frobenius_scan
from diffqe.harness.metrics import agreement_threshold, disagreement, parse_grid, symmetric_difference
from diffqe.harness.subassignments import (
    FormulaSubassignment,
    ImageSubassignment,
    PresentationSubassignment,
    StratificationSubassignment,
    Subassignment,
)

__all__ = [
    "Evaluator",
    "FormulaSubassignment",
    "FrobReport",
    "ImageSubassignment",
    "PresentationSubassignment",
    "StratificationSubassignment",
    "Subassignment",
    "agreement_threshold",
    "disagreement",
    "frobenius_scan",
    "parse_grid",
    "symmetric_difference",
]
