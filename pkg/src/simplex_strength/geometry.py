"""Simplices given by ordered vertices, their distances and orientation."""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidInputError

DEFAULT_SIGN_TOL = 1e-12
SYMMETRY_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PointCloudSimplex:
    """n+1 ordered points ``p_0, ..., p_n`` in R^n.

    ``vertices`` has shape ``(n + 1, n)``. The array is copied on
    construction and marked read-only.
    """

    vertices: np.ndarray

    def __post_init__(self):
        try:
            v = np.asarray(self.vertices, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"vertices are not a numeric matrix: {exc}") from None
        if v.ndim == 1 and v.size == 2:
            # two points on the line given as a flat list
            v = v.reshape(2, 1)
        if v.ndim != 2:
            raise InvalidInputError(f"vertices must be a 2-d array, got shape {v.shape}")
        m, n = v.shape
        if n < 1 or m != n + 1:
            raise InvalidInputError(
                f"a simplex in R^n needs n+1 points with n coordinates each, got {m} x {n}"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("vertex coordinates must be finite")
        object.__setattr__(self, "vertices", _frozen(v))

    @property
    def dim(self):
        return self.vertices.shape[1]

    def __repr__(self):
        return f"PointCloudSimplex(dim={self.dim}, vertices={self.vertices.tolist()!r})"


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric ``(n + 1) x (n + 1)`` matrix of pairwise distances, zero diagonal."""

    d: np.ndarray

    def __post_init__(self):
        try:
            d = np.asarray(self.d, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"distances are not a numeric matrix: {exc}") from None
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 2:
            raise InvalidInputError(f"distance matrix must be square with at least 2 rows, got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise InvalidInputError("distances must be finite")
        if np.any(d < 0):
            raise InvalidInputError("distances must be non-negative")
        if np.any(np.diag(d) != 0):
            raise InvalidInputError("distance matrix must have a zero diagonal")
        scale = float(d.max()) if d.size else 0.0
        if np.any(np.abs(d - d.T) > SYMMETRY_TOL * scale):
            raise InvalidInputError("distance matrix is not symmetric")
        object.__setattr__(self, "d", _frozen(0.5 * (d + d.T)))

    @property
    def dim(self):
        return self.d.shape[0] - 1

    def pairs(self):
        """Unordered index pairs ``(i, j)``, ``i < j``, in lexicographic order."""
        m = self.d.shape[0]
        return [(i, j) for i in range(m) for j in range(i + 1, m)]

    def __repr__(self):
        return f"DistanceMatrix(dim={self.dim}, d={self.d.tolist()!r})"


def as_simplex(s):
    return s if isinstance(s, PointCloudSimplex) else PointCloudSimplex(s)


def as_distances(d):
    return d if isinstance(d, DistanceMatrix) else DistanceMatrix(d)


def pairwise_distances(s):
    s = as_simplex(s)
    scaled, e = rescaled_points(s.vertices[None])
    d = np.ldexp(kernels.pairwise_distances(scaled)[0], e[0])
    return DistanceMatrix(d)


def half_perimeter(d):
    """Half the sum of distances over unordered vertex pairs.

    For a triangle with sides a, b, c this is (a + b + c) / 2; for a
    segment it is half its length.
    """
    d = as_distances(d).d
    iu = np.triu_indices(d.shape[0], 1)
    return 0.5 * float(d[iu].sum())


def edge_matrix_det(s):
    """det of the n x n matrix with columns ``p_i - p_0``; equals n! times the signed volume."""
    s = as_simplex(s)
    det, _ = kernels.edge_det(s.vertices[None])
    return float(det[0])


def rescaled_points(points):
    """Scale a batch ``(B, n+1, n)`` by powers of two, one per simplex.

    Returns ``(scaled, e)`` with ``points = scaled * 2**e`` and the largest
    coordinate of ``scaled`` in [1/2, 1). Multiplying by a power of two is
    exact, so the kernels see the same arithmetic, only without squared
    distances or determinants underflowing or overflowing.
    """
    pts = np.asarray(points, dtype=np.float64)
    _, e = np.frexp(np.abs(pts).max(axis=(1, 2)))
    return np.ldexp(pts, -e[:, None, None]), e


def orientation_signs(points, tol=DEFAULT_SIGN_TOL):
    """Vectorized :func:`orientation_sign` over a batch ``(B, n+1, n)``."""
    if tol < 0:
        raise InvalidInputError("tol must be non-negative")
    scaled, _ = rescaled_points(points)
    det, norms = kernels.edge_det(scaled)
    sign = np.sign(det).astype(np.int64)
    degenerate = (norms == 0.0) | (np.abs(det) <= tol * norms)
    sign[degenerate] = 0
    return sign


def orientation_sign(s, tol=DEFAULT_SIGN_TOL):
    """Sign of the edge-matrix determinant, 0 for (numerically) degenerate simplices.

    The simplex counts as degenerate when ``|det| <= tol * prod(|p_i - p_0|)``,
    a test that does not depend on the coordinate scale. A repeated vertex
    always gives 0.
    """
    s = as_simplex(s)
    return int(orientation_signs(s.vertices[None], tol)[0])
