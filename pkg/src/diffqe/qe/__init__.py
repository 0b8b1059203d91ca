"""
Direct images and quantifier elimination.
"""

from diffqe.qe.direct_image import (
    COMPOSITE,
    FIBRATION,
    FINITE_ETALE,
    DirectImageTask,
    SteinFactorization,
    direct_image,
    direct_image_fibration,
    direct_image_finite_etale,
    image_points,
    pointwise_image,
    stein_factorize,
)
from diffqe.qe.eliminate import affine_space, quantifier_eliminate

__all__ = [
    "COMPOSITE",
    "FIBRATION",
    "FINITE_ETALE",
    "DirectImageTask",
    "SteinFactorization",
    "affine_space",
    "direct_image",
    "direct_image_fibration",
    "direct_image_finite_etale",
    "image_points",
    "pointwise_image",
    "quantifier_eliminate",
    "stein_factorize",
]
