"""
Direct Galois covers: groups, validation, local Frobenius and constructions.
"""

from diffqe.covers.constructions import (
    GaloisClosure,
    Pushforward,
    closure_of,
    fibre_polynomial,
    galois_closure,
    image_presentation,
    product_cover,
    pushforward_cover,
)
from diffqe.covers.galois_cover import (
    CoverReport,
    GaloisCoverDesc,
    find_group_element,
    lift_classes,
    local_frobenius,
    to_direct_cover,
    validate_cover,
)
from diffqe.covers.groups import (
    FiniteGroupDesc,
    TwistedConjugacyDomain,
    cyclic_group,
    permutation_group,
    product_group,
    quotient_group,
    symmetric_group,
    trivial_group,
    twisted_closure,
)

__all__ = [
    "CoverReport",
    "FiniteGroupDesc",
    "GaloisClosure",
    "GaloisCoverDesc",
    "Pushforward",
    "TwistedConjugacyDomain",
    "closure_of",
    "cyclic_group",
    "fibre_polynomial",
    "find_group_element",
    "galois_closure",
    "image_presentation",
    "lift_classes",
    "local_frobenius",
    "permutation_group",
    "product_cover",
    "product_group",
    "pushforward_cover",
    "quotient_group",
    "symmetric_group",
    "to_direct_cover",
    "trivial_group",
    "twisted_closure",
    "validate_cover",
]
