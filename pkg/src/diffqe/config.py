"""
Tunable limits shared by every module.
"""

from dataclasses import dataclass, replace
from pathlib import Path

DEFAULT_CATALOG_PATH = Path(__file__).parent.parent.parent / "data" / "catalog.json"


@dataclass(frozen=True)
class Limits:
    """
    Bounds for enumeration and certification.

    Attributes:
        budget: Maximum number of field-element tuples scanned by one enumeration.
        m_max: Largest extension degree tried when searching for witnesses.
        integrality_degree: Extension degrees j checked by the geometric
            integrality test over finite fields.
        lift_degree: Largest extension degree searched for a cover lift; ``0``
            means the order of the cover's group.
        factor_subsets: Cap on subsets examined by multivariate factorisation
            over prime fields.
        coordinate_changes: Number of linear forms tried when certifying primality.
        generic_degree: Largest generic fibre degree whose minimal polynomial is
            computed when certifying primality.
        smooth_point_box: Half-width of the integer box searched for smooth
            rational points over Q.
        devissage_slack: Extra recursion levels allowed to direct images beyond
            the dimension of the source.
    """

    budget: int = 10**7
    m_max: int = 6
    integrality_degree: int = 4
    lift_degree: int = 0
    factor_subsets: int = 1 << 16
    coordinate_changes: int = 8
    generic_degree: int = 24
    smooth_point_box: int = 2
    devissage_slack: int = 2

    def replace(self, **changes) -> "Limits":
        return replace(self, **changes)


DEFAULT_LIMITS = Limits()
