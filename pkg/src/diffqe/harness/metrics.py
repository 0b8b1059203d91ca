"""
Agreement metrics between evaluated subassignments.

This module compares point sets over a grid of difference fields and extracts
the empirical threshold beyond which two subassignments agree.
"""

from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from diffqe.points import Point

GridCell = Tuple[int, int]


def symmetric_difference(first: Iterable[Point], second: Iterable[Point]) -> Dict[str, List[Point]]:
    """
    Points in exactly one of the two sets.

    Returns:
        ``{"missing": [...], "extra": [...]}`` with the points of ``first``
        absent from ``second`` and the points of ``second`` absent from ``first``.
    """
    a, b = set(first), set(second)
    return {"missing": sorted(a - b), "extra": sorted(b - a)}


def disagreement(first: Iterable[Point], second: Iterable[Point]) -> int:
    """Size of the symmetric difference."""
    diff = symmetric_difference(first, second)
    return len(diff["missing"]) + len(diff["extra"])


def agreement_threshold(outcomes: Mapping[GridCell, bool]) -> Optional[int]:
    """
    The least tested q such that every cell with q' >= q agrees.

    Returns ``None`` when the largest tested q still disagrees.

    Example:
        >>> agreement_threshold({(3, 1): False, (5, 1): True, (7, 1): True})
        5
    """
    qs = sorted({q for q, _ in outcomes})
    threshold = None
    for q in reversed(qs):
        if all(ok for (q2, _), ok in outcomes.items() if q2 == q):
            threshold = q
        else:
            break
    return threshold


def nonempty_threshold(witnesses: Mapping[int, Optional[int]]) -> Optional[int]:
    """The least tested q beyond which every tested q has a witness degree."""
    return agreement_threshold({(q, 1): m is not None for q, m in witnesses.items()})


def failures_below(outcomes: Mapping[GridCell, bool], threshold: Optional[int]) -> List[GridCell]:
    """Disagreeing cells; all of them lie below ``threshold``."""
    return sorted(cell for cell, ok in outcomes.items() if not ok and (threshold is None or cell[0] < threshold))


def parse_grid(text: str, m_values: Sequence[int] = (1,)) -> List[GridCell]:
    """
    Parse ``"3,5,7"`` or ``"3:1,3:2,5:1"`` into (q, m) cells.

    Raises:
        ValueError: On malformed entries.
    """
    cells: List[GridCell] = []
    for entry in text.split(","):
        entry = entry.strip()
        if not entry:
            continue
        if ":" in entry:
            q, m = entry.split(":", 1)
            cells.append((int(q), int(m)))
        else:
            cells.extend((int(entry), m) for m in m_values)
    return sorted(set(cells))
