"""Batched numeric kernels.

Every kernel works on a leading batch axis and exists twice: a numba
version (explicit loops, compiled) and a pure numpy version that
vectorizes the same arithmetic over the batch axis. Both perform the same
floating point operations in the same order, so they agree to the last bit
on ordinary inputs; the test suite checks that they agree.

Module level names (``det_lu`` etc.) dispatch to the backend chosen in
:mod:`simplex_strength._accel`.
"""
from types import SimpleNamespace

import numpy as np

from ._accel import HAVE_NUMBA, USE_NUMBA, njit

# ---------------------------------------------------------------------------
# numpy implementations


def _det_lu_np(mats):
    a = np.array(mats, dtype=np.float64, copy=True)
    nb, m, _ = a.shape
    det = np.ones(nb)
    rows = np.arange(nb)
    for k in range(m):
        piv = k + np.argmax(np.abs(a[:, k:, k]), axis=1)
        swap = piv != k
        if swap.any():
            top = a[rows, k].copy()
            a[rows, k] = a[rows, piv]
            a[rows, piv] = top
            det[swap] = -det[swap]
        pivot = a[:, k, k].copy()
        det *= pivot
        if k + 1 == m:
            break
        safe = np.where(pivot == 0.0, 1.0, pivot)
        f = a[:, k + 1:, k] / safe[:, None]
        a[:, k + 1:, k + 1:] -= f[:, :, None] * a[:, None, k, k + 1:]
    return det


def _pairwise_distances_np(points):
    p = np.asarray(points, dtype=np.float64)
    diff = p[:, :, None, :] - p[:, None, :, :]
    sq = np.zeros(diff.shape[:3])
    for c in range(p.shape[2]):
        sq += diff[..., c] * diff[..., c]
    return np.sqrt(sq)


def _hat_matrices_np(dists):
    d = np.asarray(dists, dtype=np.float64)
    nb, m, _ = d.shape
    h = np.ones((nb, m + 1, m + 1))
    h[:, 0, 0] = 0.0
    h[:, 1:, 1:] = d * d
    return h


def _edge_det_np(points):
    """Determinant of the edge matrix and the product of its column norms."""
    p = np.asarray(points, dtype=np.float64)
    edges = p[:, 1:, :] - p[:, :1, :]
    norms = np.ones(p.shape[0])
    for i in range(edges.shape[1]):
        sq = np.zeros(p.shape[0])
        for c in range(edges.shape[2]):
            sq += edges[:, i, c] * edges[:, i, c]
        norms *= np.sqrt(sq)
    # det(E) == det(E^T): rows of ``edges`` are the columns p_i - p_0
    return _det_lu_np(edges), norms


# ---------------------------------------------------------------------------
# numba implementations


@njit
def _det_lu_single(a):
    m = a.shape[0]
    det = 1.0
    for k in range(m):
        piv = k
        best = abs(a[k, k])
        for i in range(k + 1, m):
            v = abs(a[i, k])
            if v > best:
                best = v
                piv = i
        if piv != k:
            for j in range(m):
                t = a[k, j]
                a[k, j] = a[piv, j]
                a[piv, j] = t
            det = -det
        pivot = a[k, k]
        det *= pivot
        if pivot == 0.0:
            return det
        for i in range(k + 1, m):
            f = a[i, k] / pivot
            for j in range(k + 1, m):
                a[i, j] -= f * a[k, j]
    return det


@njit
def _det_lu_nb(mats):
    nb, m, _ = mats.shape
    out = np.empty(nb)
    work = np.empty((m, m))
    for b in range(nb):
        for i in range(m):
            for j in range(m):
                work[i, j] = mats[b, i, j]
        out[b] = _det_lu_single(work)
    return out


@njit
def _pairwise_distances_nb(points):
    nb, m, dim = points.shape
    out = np.zeros((nb, m, m))
    for b in range(nb):
        for i in range(m):
            for j in range(i + 1, m):
                sq = 0.0
                for c in range(dim):
                    t = points[b, i, c] - points[b, j, c]
                    sq += t * t
                r = np.sqrt(sq)
                out[b, i, j] = r
                out[b, j, i] = r
    return out


@njit
def _hat_matrices_nb(dists):
    nb, m, _ = dists.shape
    out = np.ones((nb, m + 1, m + 1))
    for b in range(nb):
        out[b, 0, 0] = 0.0
        for i in range(m):
            for j in range(m):
                out[b, i + 1, j + 1] = dists[b, i, j] * dists[b, i, j]
    return out


@njit
def _edge_det_nb(points):
    nb, m, dim = points.shape
    dets = np.empty(nb)
    norms = np.empty(nb)
    work = np.empty((m - 1, dim))
    for b in range(nb):
        prod = 1.0
        for i in range(m - 1):
            sq = 0.0
            for c in range(dim):
                t = points[b, i + 1, c] - points[b, 0, c]
                work[i, c] = t
                sq += t * t
            prod *= np.sqrt(sq)
        norms[b] = prod
        dets[b] = _det_lu_single(work)
    return dets, norms


# ---------------------------------------------------------------------------
# dispatch

NUMPY = SimpleNamespace(
    name="numpy",
    det_lu=_det_lu_np,
    pairwise_distances=_pairwise_distances_np,
    hat_matrices=_hat_matrices_np,
    edge_det=_edge_det_np,
)

if HAVE_NUMBA:
    NUMBA = SimpleNamespace(
        name="numba",
        det_lu=_det_lu_nb,
        pairwise_distances=_pairwise_distances_nb,
        hat_matrices=_hat_matrices_nb,
        edge_det=_edge_det_nb,
    )
else:  # pragma: no cover
    NUMBA = None

BACKENDS = {"numpy": NUMPY}
if NUMBA is not None:
    BACKENDS["numba"] = NUMBA

active = NUMBA if USE_NUMBA else NUMPY


def _batch(x, ndim=3):
    a = np.ascontiguousarray(x, dtype=np.float64)
    if a.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d batch, got shape {a.shape}")
    return a


def det_lu(mats):
    """Determinants of a batch of square matrices by partially pivoted LU."""
    return active.det_lu(_batch(mats))


def pairwise_distances(points):
    """Euclidean distance matrices for a batch of point sets ``(B, m, dim)``."""
    return active.pairwise_distances(_batch(points))


def hat_matrices(dists):
    """Bordered squared-distance matrices for a batch of distance matrices."""
    return active.hat_matrices(_batch(dists))


def edge_det(points):
    """Edge-matrix determinants and column-norm products for ``(B, n+1, n)``."""
    return active.edge_det(_batch(points))
