"""Strength ``sigma = vol^2 / p^(2n-1)`` and signed strength of a simplex."""
from dataclasses import dataclass
from math import factorial
from typing import Optional

import numpy as np

from . import kernels
from .cayley_menger import half_perimeters, squared_volumes
from .errors import InvalidInputError, InvalidMetricError, OutOfDomainError
from .geometry import DEFAULT_SIGN_TOL, as_distances, as_simplex, rescaled_points

TRIANGLE_SLACK = 1e-12
DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class StrengthResult:
    """Strength of one simplex.

    ``sign`` and ``signed`` are None when only distances were given, since
    orientation needs coordinates.
    """

    sigma: float
    sign: Optional[int]
    signed: Optional[float]
    volume_squared: float
    half_perimeter: float


def _sigma(vol2, p, n):
    with np.errstate(divide="ignore", invalid="ignore"):
        s = vol2 / p ** (2 * n - 1)
    # all vertices coincide: continuous extension is 0
    return np.where(p == 0.0, 0.0, s)


def strengths_from_distances(dists):
    """Batch strength from distance matrices ``(B, n+1, n+1)``.

    Returns ``(sigma, vol2, p)``; non-realizable rows carry NaN.
    """
    d = np.asarray(dists, dtype=np.float64)
    n = d.shape[1] - 1
    # power-of-two rescaling is exact and keeps p**(2n-1) representable
    _, e = np.frexp(d.max(axis=(1, 2)))
    d_s = np.ldexp(d, -e[:, None, None])
    p_s = half_perimeters(d_s)
    vol2_s, _ = squared_volumes(d_s, p_s)
    sigma = np.ldexp(_sigma(vol2_s, p_s, n), e)
    with np.errstate(over="ignore"):
        vol2 = np.ldexp(vol2_s, 2 * n * e)
    return sigma, vol2, np.ldexp(p_s, e)


def strength_from_distances(d):
    d = as_distances(d)
    sigma, vol2, _ = strengths_from_distances(d.d[None])
    if np.isnan(vol2[0]):
        raise InvalidMetricError(f"distances are not realizable in R^{d.dim}")
    return float(sigma[0])


def strengths(points, tol=DEFAULT_SIGN_TOL):
    """Batch strength and orientation for points ``(B, n+1, n)``.

    Returns a dict of arrays with keys ``sigma``, ``sign``, ``signed``,
    ``volume_squared``, ``half_perimeter``.

    The squared volume comes from the Cayley-Menger determinant. Degeneracy
    is decided once, by the orientation test: a simplex whose sign is 0 has
    strength 0, and a non-degenerate one whose Cayley-Menger value rounded
    to zero falls back to ``(det / n!)**2`` of the edge matrix.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = pts.shape[2]
    # work in units of 2**e so tiny or huge simplices neither underflow nor
    # overflow; the scaling is exact, sigma is homogeneous of degree 1
    pts, e = rescaled_points(pts)
    d = kernels.pairwise_distances(pts)
    p = half_perimeters(d)
    vol2, _ = squared_volumes(d, p)
    det, norms = kernels.edge_det(pts)
    sign = np.sign(det).astype(np.int64)
    degenerate = (norms == 0.0) | (np.abs(det) <= tol * norms)
    sign[degenerate] = 0
    vol2 = np.where(degenerate, 0.0, vol2)
    lost = ~degenerate & ~(vol2 > 0.0)
    if lost.any():
        vol2[lost] = (det[lost] / factorial(n)) ** 2
    sigma = np.ldexp(_sigma(vol2, p, n), e)
    with np.errstate(over="ignore"):
        # vol^2 itself may not be representable; sigma always is
        vol2 = np.ldexp(vol2, 2 * n * e)
    return {
        "sigma": sigma,
        "sign": sign,
        "signed": sign * sigma,
        "volume_squared": vol2,
        "half_perimeter": np.ldexp(p, e),
    }


def signed_strength(s, tol=DEFAULT_SIGN_TOL):
    s = as_simplex(s)
    r = strengths(s.vertices[None], tol)
    return StrengthResult(
        sigma=float(r["sigma"][0]),
        sign=int(r["sign"][0]),
        signed=float(r["signed"][0]),
        volume_squared=float(r["volume_squared"][0]),
        half_perimeter=float(r["half_perimeter"][0]),
    )


def strength_result_from_distances(d):
    """StrengthResult for distance-only input; the sign is unavailable."""
    d = as_distances(d)
    sigma, vol2, p = strengths_from_distances(d.d[None])
    if np.isnan(vol2[0]):
        raise InvalidMetricError(f"distances are not realizable in R^{d.dim}")
    return StrengthResult(float(sigma[0]), None, None, float(vol2[0]), float(p[0]))


def triangle_strength_heron(a, b, c):
    """Strength of a triangle with sides a, b, c: ``(p-a)(p-b)(p-c) / p^2``.

    The factored form avoids computing the area and squaring it, which
    loses accuracy on needle-shaped triangles.
    """
    a, b, c = float(a), float(b), float(c)
    if min(a, b, c) < 0 or not all(np.isfinite((a, b, c))):
        raise InvalidInputError("side lengths must be finite and non-negative")
    p = 0.5 * (a + b + c)
    if p == 0.0:
        return 0.0
    slack = TRIANGLE_SLACK * p
    fa, fb, fc = p - a, p - b, p - c
    if min(fa, fb, fc) < -slack:
        raise InvalidInputError(f"sides {a}, {b}, {c} violate the triangle inequality")
    fa, fb, fc = max(fa, 0.0), max(fb, 0.0), max(fc, 0.0)
    return fa * fb * fc / (p * p)


def in_region(x, y, slack=DOMAIN_SLACK):
    """Membership in the normalized-triangle region ``0 <= y <= x <= 1, x + y <= 1``."""
    return (
        -slack <= y
        and y <= x + slack
        and x <= 1.0 + slack
        and x + y <= 1.0 + slack
    )


def normalized_triangle_strength(x, y):
    """Strength of the triangle with sides ``x, 1 - y, 1`` (scaled by the longest side).

    ``sigma(x, y) = (2 - x - y)(x^2 - y^2) / (2 (2 + x - y)^2)``.
    """
    if not in_region(x, y):
        raise OutOfDomainError(f"({x}, {y}) lies outside the normalized triangle region")
    v = (2.0 - x - y) * (x * x - y * y) / (2.0 * (2.0 + x - y) ** 2)
    return max(v, 0.0)


def section_b_eq_c(x):
    """Isosceles triangles with sides ``x <= 1 = 1`` (the edge y = 0), x in [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    return (2.0 - x) * x * x / (2.0 * (2.0 + x) ** 2)


def section_a_eq_b(x):
    """Isosceles triangles with sides ``x = x <= 1`` (the edge x + y = 1), x in [1/2, 1]."""
    x = np.asarray(x, dtype=np.float64)
    return (2.0 * x - 1.0) / (2.0 * (2.0 * x + 1.0) ** 2)


SECTIONS = {
    "b-eq-c": (section_b_eq_c, 0.0, 1.0),
    "a-eq-b": (section_a_eq_b, 0.5, 1.0),
}
