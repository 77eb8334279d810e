"""Cayley-Menger determinants: squared volume from pairwise distances.

The bordered matrix ``D^`` of a simplex on ``n + 1`` points has a zero in
the corner, ones along the rest of the first row and column, and the
squared distances ``d_ij**2`` in the inner block. Then

    vol^2 = (-1)**(n - 1) / (2**n * (n!)**2) * det(D^)
"""
from dataclasses import dataclass
from math import factorial

import numpy as np

from . import kernels
from .errors import InvalidInputError, InvalidMetricError
from .geometry import DistanceMatrix, as_distances

# negative squared volumes smaller than this times (2p/n)**(2n) are rounding
NEGATIVE_VOLUME_GUARD = 1e-9


@dataclass(frozen=True, eq=False)
class HatMatrix:
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.float64, copy=True)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] < 3:
            raise InvalidInputError(f"hat matrix must be square of size >= 3, got {e.shape}")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    @property
    def dim(self):
        return self.entries.shape[0] - 2


def volume_factor(n):
    """``(-1)**(n-1) / (2**n (n!)**2)``, the factor turning det D^ into vol^2."""
    return (-1.0) ** (n - 1) / (2.0 ** n * float(factorial(n)) ** 2)


def build_hat(d):
    d = as_distances(d)
    return HatMatrix(kernels.hat_matrices(d.d[None])[0])


def hat_determinant(h):
    if isinstance(h, DistanceMatrix):
        h = build_hat(h)
    elif not isinstance(h, HatMatrix):
        h = HatMatrix(h)
    return float(kernels.det_lu(h.entries[None])[0])


def hat_determinants(dists):
    """det D^ for a batch of distance matrices ``(B, n+1, n+1)``."""
    return kernels.det_lu(kernels.hat_matrices(dists))


def half_perimeters(dists):
    d = np.asarray(dists, dtype=np.float64)
    iu = np.triu_indices(d.shape[1], 1)
    return 0.5 * d[:, iu[0], iu[1]].sum(axis=1)


def squared_volumes(dists, p=None):
    """Batch squared volumes with the rounding guard applied.

    Returns ``(vol2, invalid)``: clamped squared volumes and a boolean mask
    of matrices whose formula value is negative beyond the guard (not
    realizable in R^n). ``vol2`` is NaN where ``invalid`` is set.
    """
    d = np.asarray(dists, dtype=np.float64)
    n = d.shape[1] - 1
    if p is None:
        p = half_perimeters(d)
    raw = volume_factor(n) * hat_determinants(d)
    guard = NEGATIVE_VOLUME_GUARD * (2.0 * p / n) ** (2 * n)
    invalid = raw < -guard
    vol2 = np.where(raw < 0.0, 0.0, raw)
    vol2[invalid] = np.nan
    return vol2, invalid


def squared_volume(d):
    d = as_distances(d)
    vol2, invalid = squared_volumes(d.d[None])
    if invalid[0]:
        raise InvalidMetricError(
            f"distances are not realizable in R^{d.dim}: Cayley-Menger determinant "
            "has the wrong sign"
        )
    return float(vol2[0])


def _minor(hat, r, c):
    keep_r = [k for k in range(hat.shape[1]) if k != r]
    keep_c = [k for k in range(hat.shape[2]) if k != c]
    return hat[:, keep_r][:, :, keep_c]


def hat_partial_derivatives(dists, pairs=None):
    """d(det D^)/d(d_ij) for every unordered pair, batched.

    ``d_ij**2`` appears at the two symmetric positions of D^, so the
    derivative is ``2 * d_ij * (C_ab + C_ba) = 4 * d_ij * C_ab`` with
    ``C_ab`` the cofactor at ``a = i + 1, b = j + 1``.
    Returns an array ``(B, len(pairs))``.
    """
    d = np.asarray(dists, dtype=np.float64)
    m = d.shape[1]
    if pairs is None:
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    hat = kernels.hat_matrices(d)
    out = np.empty((d.shape[0], len(pairs)))
    for k, (i, j) in enumerate(pairs):
        cof = (-1.0) ** (i + j) * kernels.det_lu(_minor(hat, i + 1, j + 1))
        out[:, k] = 4.0 * d[:, i, j] * cof
    return out


def hat_partial_derivative(d, i, j):
    d = as_distances(d)
    m = d.d.shape[0]
    if i == j:
        raise InvalidInputError("the derivative needs two distinct vertex indices")
    if not (0 <= i < m and 0 <= j < m):
        raise InvalidInputError(f"vertex indices must lie in 0..{m - 1}")
    return float(hat_partial_derivatives(d.d[None], [(i, j)])[0, 0])
