"""Derangement counts and the per-dimension Lipschitz and lemma bounds.

All bounds are evaluated as exact integer ratios before the final float
conversion, so they stay accurate (and finite) for any dimension.
"""
from dataclasses import dataclass, asdict
from math import factorial, sqrt
from typing import Optional

from .errors import InvalidInputError

LAMBDA_1 = 2.0
LAMBDA_2 = sqrt(3.0)


def rencontre(n):
    """Number of permutations of n elements without a fixed point.

    Uses ``r_n = n * r_(n-1) + (-1)**n`` on Python integers, so the result
    is exact for every n (no overflow limit).
    """
    if n < 0:
        raise InvalidInputError("rencontre numbers are defined for n >= 0")
    r = 1
    for k in range(1, n + 1):
        r = k * r + (-1) ** k
    return r


def _check_dim(n, least=1):
    if int(n) != n or n < least:
        raise InvalidInputError(f"dimension must be an integer >= {least}, got {n}")
    return int(n)


def b_n_bound(n):
    """``2**(n + 0.5) / (n! * n**(2n - 4))`` for n >= 3."""
    n = _check_dim(n, 3)
    return 2 ** n / (factorial(n) * n ** (2 * n - 4)) * sqrt(2.0)


def lambda_bound(n):
    n = _check_dim(n)
    if n == 1:
        return LAMBDA_1
    if n == 2:
        return LAMBDA_2
    return b_n_bound(n)


def c_n_bound(n):
    """Gradient bound of the strength in distance space, n >= 3.

    ``(2 r_n + 2 r_(n+1) + r_(n+2)) * 2**(n - 0.5) * sqrt(n + 1) / ((n!)**2 * n**(2n - 1.5))``
    """
    n = _check_dim(n, 3)
    weight = 2 * rencontre(n) + 2 * rencontre(n + 1) + rencontre(n + 2)
    exact = weight * 2 ** n / (factorial(n) ** 2 * n ** (2 * n - 2))
    # 2**(-0.5) * sqrt(n + 1) / n**0.5
    return exact * sqrt((n + 1) / (2.0 * n))


def gradient_norm_bound(n):
    """Upper bound on the Euclidean norm of d(sigma)/d(d_ij) over all pairs."""
    n = _check_dim(n)
    if n == 1:
        return 2.0
    if n == 2:
        return 2.0 * sqrt(3.0)
    return c_n_bound(n)


def edge_ratio_bound(n):
    return 2.0 / _check_dim(n)


def det_ratio_bound(n):
    """``r_(n+2) * (2/n)**(2n)``, bounding ``|det D^| / p**(2n)``."""
    n = _check_dim(n)
    return rencontre(n + 2) * 2 ** (2 * n) / n ** (2 * n)


def det_derivative_bound(n):
    """``4 (r_n + r_(n+1)) (2/n)**(2n-1)``, bounding ``|d det D^ / d d_ij| / p**(2n-1)``."""
    n = _check_dim(n)
    return 4 * (rencontre(n) + rencontre(n + 1)) * 2 ** (2 * n - 1) / n ** (2 * n - 1)


@dataclass(frozen=True)
class BoundTable:
    dim: int
    rencontre_n_plus_2: int
    lambda_n: float
    c_n: Optional[float]
    b_n: Optional[float]
    edge_ratio_bound: float
    det_ratio_bound: float
    det_derivative_bound: float

    def as_dict(self):
        return asdict(self)


def lemma_bounds(n):
    n = _check_dim(n)
    return BoundTable(
        dim=n,
        rencontre_n_plus_2=rencontre(n + 2),
        lambda_n=lambda_bound(n),
        c_n=c_n_bound(n) if n >= 3 else None,
        b_n=b_n_bound(n) if n >= 3 else None,
        edge_ratio_bound=edge_ratio_bound(n),
        det_ratio_bound=det_ratio_bound(n),
        det_derivative_bound=det_derivative_bound(n),
    )


BOUND_FIELDS = [
    "dim",
    "rencontre_n_plus_2",
    "lambda_n",
    "c_n",
    "b_n",
    "edge_ratio_bound",
    "det_ratio_bound",
    "det_derivative_bound",
]
