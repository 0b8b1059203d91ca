"""
Frobenius threshold scans and catalog-wide agreement runs.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from diffqe.algebra.fields import Field
from diffqe.config import DEFAULT_LIMITS, Limits
from diffqe.data import ArtifactBundle
from diffqe.errors import DiffQEError
from diffqe.harness.metrics import (
    GridCell,
    agreement_threshold,
    failures_below,
    nonempty_threshold,
    symmetric_difference,
)
from diffqe.harness.subassignments import (
    FormulaSubassignment,
    ImageSubassignment,
    StratificationSubassignment,
    Subassignment,
)
from diffqe.points import DiffField, nonempty_witness
from diffqe.presentations import DirectPresentation, is_h_direct
from diffqe.qe.direct_image import direct_image
from diffqe.qe.eliminate import quantifier_eliminate

logger = logging.getLogger(__name__)

Pair = Tuple[Subassignment, Subassignment]


@dataclass
class FrobReport:
    """
    Outcome of a Frobenius scan.

    Attributes:
        instance: Name of the scanned object.
        grid: The tested (q, m) cells.
        N: Least tested q beyond which the property held at every tested cell;
            ``None`` if it failed at the largest q.
        failures: Failing cells below N, with the points in disagreement when known.
        witnesses: For nonemptiness scans, the least witness degree per q.
    """

    instance: str
    grid: List[GridCell]
    N: Optional[int]
    failures: List[Dict[str, Any]] = field(default_factory=list)
    witnesses: Dict[int, Optional[int]] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.N is not None

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "instance": self.instance,
            "grid": [list(cell) for cell in self.grid],
            "N": self.N,
            "failures": self.failures,
        }
        if self.witnesses:
            data["witnesses"] = {str(q): m for q, m in sorted(self.witnesses.items())}
        return data


def _scan_presentation(
    P: DirectPresentation, grid: Sequence[GridCell], instance: str, limits: Limits, verbose: bool
) -> FrobReport:
    qs = sorted({q for q, _ in grid})
    m_max = max([m for _, m in grid] + [limits.m_max])
    witnesses: Dict[int, Optional[int]] = {}
    for q in tqdm(qs, desc=f"Witnesses for {instance}", disable=not verbose):
        found = nonempty_witness(P, q, m_max, limits)
        witnesses[q] = found[0] if found else None
    N = nonempty_threshold(witnesses)
    failures = [{"q": q, "m": None} for q, m in sorted(witnesses.items()) if m is None and (N is None or q < N)]
    logger.info("Nonemptiness of %s: N=%s", instance, N)
    return FrobReport(instance, sorted(grid), N, failures, witnesses)


def _scan_pair(
    pair: Pair, grid: Sequence[GridCell], instance: str, base: Field, limits: Limits, verbose: bool
) -> FrobReport:
    first, second = pair
    outcomes: Dict[GridCell, bool] = {}
    details: Dict[GridCell, Dict[str, Any]] = {}
    for q, m in tqdm(sorted(grid), desc=f"Comparing {instance}", disable=not verbose):
        K = DiffField.from_q(base, q, m)
        diff = symmetric_difference(first.points(K, limits), second.points(K, limits))
        outcomes[(q, m)] = not diff["missing"] and not diff["extra"]
        if not outcomes[(q, m)]:
            details[(q, m)] = {"q": q, "m": m, "missing": [list(p) for p in diff["missing"]], "extra": [list(p) for p in diff["extra"]]}
    N = agreement_threshold(outcomes)
    failures = [details[cell] for cell in failures_below(outcomes, N)]
    for failure in failures:
        logger.debug("Disagreement below N for %s at q=%d, m=%d", instance, failure["q"], failure["m"])
    logger.info("Agreement of %s: N=%s over %d cells", instance, N, len(outcomes))
    return FrobReport(instance, sorted(grid), N, failures)


def frobenius_scan(
    target: Union[DirectPresentation, Pair],
    grid: Sequence[GridCell],
    instance: str = "",
    limits: Limits = DEFAULT_LIMITS,
    verbose: bool = False,
) -> FrobReport:
    """
    The empirical Frobenius threshold of a presentation or of a pair of subassignments.

    For a presentation, the threshold is the least tested q beyond which a
    realisation exists over F_{q^m} for some m up to ``limits.m_max``. For a pair,
    it is the least tested q beyond which both sides select the same tuples at
    every tested m.

    Raises:
        BudgetExceeded: If an evaluation exceeds ``limits.budget``.
        ValueError: If neither side of a pair knows its base field.

    Example:
        >>> P = load_catalog().presentations["square_graph"]
        >>> frobenius_scan(P, [(2, 1), (3, 1), (5, 1)]).N
        2
    """
    if isinstance(target, DirectPresentation):
        return _scan_presentation(target, grid, instance or target.name, limits, verbose)
    first, second = target
    base = first.field or second.field
    if base is None:
        raise ValueError("Cannot scan a pair whose base field is unknown")
    return _scan_pair(target, grid, instance or f"{first.name} vs {second.name}", base, limits, verbose)


class Evaluator:
    """
    Catalog-wide agreement runs.

    Each run compares a computed object with its brute-force counterpart over
    a grid of difference fields and collects one :class:`FrobReport` per
    instance. Instances outside the supported class are reported with their
    error instead of a threshold.

    Attributes:
        bundle: The artifact bundle under test.
        grid: The (q, m) cells to test.
        limits: Configured bounds.
        results: Reports of the last run, by instance.

    Example:
        >>> evaluator = Evaluator(load_catalog(), [(3, 1), (5, 1), (7, 1)])
        >>> reports = evaluator.run_formulas()
        >>> reports["kummer_fixed_root"]["N"]
        3
    """

    def __init__(self, bundle: ArtifactBundle, grid: Sequence[GridCell], limits: Limits = DEFAULT_LIMITS):
        self.bundle = bundle
        self.grid = sorted(grid)
        self.limits = limits
        self.results: Dict[str, Dict[str, Any]] = {}

    def _record(self, name: str, compute) -> Dict[str, Any]:
        try:
            report = compute().to_json()
        except DiffQEError as exc:
            logger.warning("%s: %s", name, exc)
            report = {"instance": name, **exc.to_json()}
        self.results[name] = report
        return report

    def run_presentations(self, verbose: bool = False) -> Dict[str, Dict[str, Any]]:
        """Nonemptiness thresholds of every H-direct catalog presentation."""
        reports = {}
        for name, P in tqdm(sorted(self.bundle.presentations.items()), desc="Presentations", disable=not verbose):
            if P.is_empty() or not is_h_direct(P, self.limits):
                continue
            reports[name] = self._record(name, lambda: frobenius_scan(P, self.grid, name, self.limits))
        return reports

    def run_tasks(self, verbose: bool = False) -> Dict[str, Dict[str, Any]]:
        """Direct images against pointwise images."""
        reports = {}
        for name, task in tqdm(sorted(self.bundle.tasks.items()), desc="Direct images", disable=not verbose):

            def compute(task=task, name=name):
                output = direct_image(task, self.limits)
                pair = (StratificationSubassignment(output), ImageSubassignment(task.morphism, task.stratification))
                return frobenius_scan(pair, self.grid, name, self.limits)

            reports[name] = self._record(name, compute)
        return reports

    def run_formulas(self, verbose: bool = False) -> Dict[str, Dict[str, Any]]:
        """Quantifier elimination against the brute-force oracle."""
        reports = {}
        for name, entry in tqdm(sorted(self.bundle.formulas.items()), desc="Formulas", disable=not verbose):

            def compute(entry=entry, name=name):
                A = quantifier_eliminate(entry.formula, entry.field, entry.variables, self.limits)
                oracle = FormulaSubassignment(entry.formula, entry.variables, entry.witness_degree, name, entry.field)
                pair = (StratificationSubassignment(A, len(entry.variables), name), oracle)
                return frobenius_scan(pair, self.grid, name, self.limits)

            reports[name] = self._record(name, compute)
        return reports

    def run(self, verbose: bool = False) -> Dict[str, Dict[str, Any]]:
        """All scans; returns the collected reports."""
        self.results = {}
        self.run_presentations(verbose)
        self.run_tasks(verbose)
        self.run_formulas(verbose)
        return dict(self.results)

    def save_results(self, output_path: Path) -> None:
        """Save the reports to a JSON file."""
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w") as f:
            json.dump(self.results, f, indent=2, sort_keys=True)
