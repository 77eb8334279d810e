"""Strength of geometric simplices.

The strength ``sigma(T) = vol^2(T) / p(T)^(2n-1)`` of a simplex on n+1
points in R^n vanishes exactly on degenerate simplices and, unlike the
volume, is Lipschitz continuous under perturbation of the vertices.
"""
from .bounds import BoundTable, c_n_bound, lambda_bound, lemma_bounds, rencontre
from .cayley_menger import (
    HatMatrix,
    build_hat,
    hat_determinant,
    hat_partial_derivative,
    squared_volume,
)
from .errors import InvalidInputError, InvalidMetricError, OutOfDomainError
from .geometry import (
    DistanceMatrix,
    PointCloudSimplex,
    edge_matrix_det,
    half_perimeter,
    orientation_sign,
    pairwise_distances,
)
from .strength import (
    StrengthResult,
    normalized_triangle_strength,
    signed_strength,
    strength_from_distances,
    triangle_strength_heron,
)

__version__ = "0.1.0"
