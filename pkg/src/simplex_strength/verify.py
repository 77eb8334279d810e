"""Randomized verification of the strength bounds.

Trials are generated in fixed-size chunks. Chunk ``c`` of a suite draws
from ``default_rng([seed, stream, c])``, so every trial is a pure function
of (seed, trial index) and the chunks can run in any order or in parallel.
Chunk results are merged with max/sum operations that ignore order.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from math import factorial, log
import json

import numpy as np

from . import kernels
from .bounds import det_derivative_bound, det_ratio_bound, edge_ratio_bound, gradient_norm_bound, lambda_bound
from .cayley_menger import half_perimeters, hat_determinants, hat_partial_derivatives
from .errors import InvalidInputError
from .geometry import PointCloudSimplex, as_distances, as_simplex
from .strength import strengths, strengths_from_distances

CHUNK = 2048
MAX_SAMPLES = 8

LIPSCHITZ_SLACK = 1e-9
LEMMA_SLACK = 1e-9
FD_REL_STEP = 1e-6
FD_RTOL = 1e-6
GRADIENT_SLACK = 1e-3
INVARIANCE_RTOL = 1e-9
# absolute floor for invariance checks, relative to the largest strength
# any simplex with the same half-perimeter can have
INVARIANCE_FLOOR = 1e-12
# coordinate rounding after a transform, in ulps of the largest coordinate
COORD_ROUNDING_ULPS = 16
SCALE_FACTORS = (1e-3, 1e3)

_STREAMS = {"lipschitz": 1, "lemma": 2, "invariance": 3, "gradient": 4}
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class TrialConfig:
    dim: int
    trials: int
    seed: int
    scale: float = 1.0
    epsilon_range: tuple = (1e-9, 1e-1)
    near_degenerate_fraction: float = 0.25

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidInputError(f"dim must be a positive integer, got {self.dim}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidInputError(f"trials must be at least 1, got {self.trials}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise InvalidInputError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not self.scale > 0 or not np.isfinite(self.scale):
            raise InvalidInputError(f"scale must be positive, got {self.scale}")
        lo, hi = self.epsilon_range
        if not (0 < lo <= hi) or not np.isfinite(hi):
            raise InvalidInputError(f"epsilon range must satisfy 0 < lo <= hi, got {self.epsilon_range}")
        if not 0.0 <= self.near_degenerate_fraction <= 1.0:
            raise InvalidInputError("near_degenerate_fraction must lie in [0, 1]")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "epsilon_range", (float(lo), float(hi)))
        object.__setattr__(self, "near_degenerate_fraction", float(self.near_degenerate_fraction))

    def as_dict(self):
        d = asdict(self)
        d["epsilon_range"] = list(self.epsilon_range)
        return d


@dataclass
class CheckRecord:
    """Aggregate of one inequality over many trials.

    ``max_ratio`` is the largest observed value of the checked quantity in
    the units of ``bound``. ``worst`` and ``samples`` carry the trial index
    and the raw inputs so a case can be replayed.
    """

    name: str
    bound: float
    trials: int = 0
    max_ratio: float = 0.0
    violations: int = 0
    worst: dict = None
    samples: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)

    def merge(self, other):
        self.trials += other.trials
        self.violations += other.violations
        if other.worst is not None and (
            self.worst is None
            or other.max_ratio > self.max_ratio
            or (other.max_ratio == self.max_ratio and other.worst["trial"] < self.worst["trial"])
        ):
            self.max_ratio = other.max_ratio
            self.worst = other.worst
        self.samples = sorted(self.samples + other.samples, key=lambda s: s["trial"])[:MAX_SAMPLES]
        for k, v in other.counters.items():
            self.counters[k] = self.counters.get(k, 0) + v
        return self

    @property
    def passed(self):
        return self.violations == 0

    def as_dict(self):
        return {
            "name": self.name,
            "bound": self.bound,
            "trials": self.trials,
            "max_ratio": self.max_ratio,
            "violations": self.violations,
            "passed": self.passed,
            "worst": self.worst,
            "samples": self.samples,
            "counters": dict(sorted(self.counters.items())),
        }


@dataclass
class TrialReport:
    suite: str
    config: TrialConfig
    checks: dict
    notes: dict = field(default_factory=dict)

    @property
    def violations(self):
        return sum(c.violations for c in self.checks.values())

    @property
    def passed(self):
        return self.violations == 0

    def as_dict(self):
        return {
            "suite": self.suite,
            "config": self.config.as_dict() if self.config is not None else None,
            "passed": self.passed,
            "violations": self.violations,
            "checks": [self.checks[k].as_dict() for k in sorted(self.checks)],
            "notes": self.notes,
        }

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# input generation


def _rng(seed, stream, chunk):
    return np.random.default_rng([seed, _STREAMS[stream], chunk])


def random_simplices(n, count, scale, squash, rng):
    """``count`` simplices with coordinates uniform in [-scale, scale].

    ``squash`` (scalar or per-simplex) multiplies the last coordinate of
    every vertex; values below 1 flatten the simplex towards a hyperplane.
    """
    pts = rng.uniform(-scale, scale, size=(count, n + 1, n))
    sq = np.broadcast_to(np.asarray(squash, dtype=np.float64), (count,))
    pts[:, :, -1] *= sq[:, None]
    return pts


def random_simplex(n, scale, squash, rng):
    if n < 1 or not scale > 0:
        raise InvalidInputError("random_simplex needs n >= 1 and scale > 0")
    if not 0.0 <= squash <= 1.0:
        raise InvalidInputError("squash must lie in [0, 1]")
    return PointCloudSimplex(random_simplices(n, 1, scale, squash, rng)[0])


def perturb_batch(points, eps, rng):
    """Move every vertex by an independent uniform vector of the closed eps-ball."""
    pts = np.asarray(points, dtype=np.float64)
    nb, m, n = pts.shape
    eps = np.broadcast_to(np.asarray(eps, dtype=np.float64), (nb,))
    g = rng.standard_normal((nb, m, n))
    norm = np.sqrt((g * g).sum(axis=2))
    radius = eps[:, None] * rng.random((nb, m)) ** (1.0 / n) * (1.0 - 4 * _EPS)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(norm[..., None] > 0, g / norm[..., None], 0.0)
    return pts + unit * radius[..., None]


def perturb(s, eps, rng):
    s = as_simplex(s)
    if eps < 0:
        raise InvalidInputError("eps must be non-negative")
    if eps == 0:
        return s
    return PointCloudSimplex(perturb_batch(s.vertices[None], eps, rng)[0])


def _draw(cfg, rng, count):
    """Simplices, perturbation radii and near-degenerate mask for one chunk.

    Radii are log-uniform over ``cfg.epsilon_range``. Near-degenerate
    simplices are squashed to a slab thinner than their radius, so the
    perturbation can flip their orientation.
    """
    lo, hi = cfg.epsilon_range
    eps = np.exp(rng.uniform(log(lo), log(hi), size=count))
    near = rng.random(count) < cfg.near_degenerate_fraction
    squash = np.where(near, np.minimum(1.0, rng.random(count) * eps / cfg.scale), 1.0)
    pts = random_simplices(cfg.dim, count, cfg.scale, squash, rng)
    return pts, eps, near


def _chunks(trials):
    return [(c, c * CHUNK, min(CHUNK, trials - c * CHUNK)) for c in range((trials + CHUNK - 1) // CHUNK)]


def _run_chunks(fn, cfg, workers):
    chunks = _chunks(cfg.trials)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda c: fn(*c), chunks))
    else:
        parts = [fn(*c) for c in chunks]
    merged = parts[0]
    for part in parts[1:]:
        for name, rec in part.items():
            merged[name].merge(rec)
    return merged


def _record(name, bound, values, violated, start, inputs, counters=None):
    """Build a CheckRecord for one chunk from per-trial values."""
    values = np.asarray(values, dtype=np.float64)
    rec = CheckRecord(name=name, bound=float(bound), trials=int(values.size))
    rec.counters = dict(counters or {})
    if values.size == 0:
        return rec
    k = int(np.argmax(values))
    rec.max_ratio = float(values[k])
    rec.worst = {"trial": start + k, "value": float(values[k]), "inputs": inputs(k)}
    bad = np.flatnonzero(violated)
    rec.violations = int(bad.size)
    rec.samples = [
        {"trial": start + int(i), "value": float(values[i]), "inputs": inputs(int(i))}
        for i in bad[:MAX_SAMPLES]
    ]
    return rec


# ---------------------------------------------------------------------------
# finite differences


def fd_gradients(dists, h=None):
    """Central-difference gradient of the strength w.r.t. each distance.

    ``h`` defaults to ``1e-6 * p`` per simplex. Entries whose perturbed
    matrix is not realizable (or would need a negative distance) are NaN.
    Returns ``(B, N)`` with pairs in lexicographic order.
    """
    d = np.asarray(dists, dtype=np.float64)
    nb, m, _ = d.shape
    if h is None:
        h = FD_REL_STEP * half_perimeters(d)
    h = np.broadcast_to(np.asarray(h, dtype=np.float64), (nb,))
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    out = np.empty((nb, len(pairs)))
    for k, (i, j) in enumerate(pairs):
        up = d.copy()
        up[:, i, j] += h
        up[:, j, i] = up[:, i, j]
        down = d.copy()
        down[:, i, j] -= h
        down[:, j, i] = down[:, i, j]
        s_up, _, _ = strengths_from_distances(up)
        s_down, _, _ = strengths_from_distances(down)
        g = (s_up - s_down) / (2.0 * h)
        g[down[:, i, j] < 0] = np.nan
        out[:, k] = g
    return out


def fd_gradient(d, h=None):
    d = as_distances(d)
    if h is not None and not h > 0:
        raise InvalidInputError("finite-difference step must be positive")
    return fd_gradients(d.d[None], h)[0]


# ---------------------------------------------------------------------------
# suites


def _lipschitz_chunk(cfg, lam, chunk, start, count):
    rng = _rng(cfg.seed, "lipschitz", chunk)
    T, eps, near = _draw(cfg, rng, count)
    Q = perturb_batch(T, eps, rng)
    rt = strengths(T)
    rq = strengths(Q)
    d_sigma = np.abs(rt["sigma"] - rq["sigma"])
    d_signed = np.abs(rt["signed"] - rq["signed"])
    allowed = 2.0 * lam * eps + LIPSCHITZ_SLACK * lam * eps
    crossing = rt["sign"] * rq["sign"] < 0
    band = (d_signed > allowed) & (d_signed <= 4.0 * lam * eps)

    def inputs(k):
        return {"T": T[k].tolist(), "Q": Q[k].tolist(), "eps": float(eps[k])}

    counters = {
        "near_degenerate": int(near.sum()),
        "sign_crossings": int(crossing.sum()),
        "sign_changes": int((rt["sign"] != rq["sign"]).sum()),
    }
    return {
        "sigma": _record("sigma", lam, d_sigma / (2 * eps), d_sigma > allowed, start, inputs, counters),
        "signed": _record(
            "signed", lam, d_signed / (2 * eps), d_signed > allowed, start, inputs,
            dict(counters, band_2_to_4_lambda=int(band.sum())),
        ),
    }


def run_lipschitz_suite(cfg, workers=1, lam=None):
    """Check ``|sigma(T) - sigma(Q)| <= 2 lambda eps`` and the signed analogue.

    ``lam`` overrides the dimension's constant (used to exercise the
    violation path). Ratios are reported as ``|difference| / (2 eps)``.
    """
    lam = lambda_bound(cfg.dim) if lam is None else float(lam)
    checks = _run_chunks(lambda *c: _lipschitz_chunk(cfg, lam, *c), cfg, workers)
    band = checks["signed"].counters.get("band_2_to_4_lambda", 0)
    notes = {
        "lambda": lam,
        "slack": f"{LIPSCHITZ_SLACK} * lambda * eps",
        "signed_band_2_to_4_lambda": band,
    }
    return TrialReport("lipschitz", cfg, checks, notes)


def _fd_floor(n, p, h):
    # rounding noise of a det D^ evaluation divided by the step
    return 64 * _EPS * det_ratio_bound(n) * p ** (2 * n) / h


def _lemma_chunk(cfg, chunk, start, count):
    n = cfg.dim
    rng = _rng(cfg.seed, "lemma", chunk)
    T, _, near = _draw(cfg, rng, count)
    d = kernels.pairwise_distances(T)
    p = half_perimeters(d)
    iu = np.triu_indices(n + 1, 1)
    pairs = list(zip(*iu))
    edge = d[:, iu[0], iu[1]].max(axis=1) / p
    det = hat_determinants(d)
    det_ratio = np.abs(det) / p ** (2 * n)
    der = hat_partial_derivatives(d, pairs)
    der_ratio = np.abs(der).max(axis=1) / p ** (2 * n - 1)

    h = FD_REL_STEP * p
    fd_err = np.zeros(count)
    for k, (i, j) in enumerate(pairs):
        up = d.copy()
        up[:, i, j] += h
        up[:, j, i] = up[:, i, j]
        down = d.copy()
        down[:, i, j] -= h
        down[:, j, i] = down[:, i, j]
        fd = (hat_determinants(up) - hat_determinants(down)) / (2 * h)
        tol = FD_RTOL * np.maximum(np.abs(der[:, k]), np.abs(fd)) + _fd_floor(n, p, h)
        fd_err = np.maximum(fd_err, np.abs(der[:, k] - fd) / tol)

    def inputs(k):
        return {"T": T[k].tolist()}

    eb, db, gb = edge_ratio_bound(n), det_ratio_bound(n), det_derivative_bound(n)
    counters = {"near_degenerate": int(near.sum())}
    return {
        "edge_ratio": _record("edge_ratio", eb, edge, edge > eb * (1 + LEMMA_SLACK), start, inputs, counters),
        "det_ratio": _record("det_ratio", db, det_ratio, det_ratio > db * (1 + LEMMA_SLACK), start, inputs),
        "det_derivative": _record(
            "det_derivative", gb, der_ratio, der_ratio > gb * (1 + LEMMA_SLACK), start, inputs
        ),
        "derivative_vs_fd": _record("derivative_vs_fd", 1.0, fd_err, fd_err > 1.0, start, inputs),
    }


def run_lemma_suite(cfg, workers=1):
    """Edge-ratio, determinant-ratio and determinant-derivative bounds.

    Also cross-checks the cofactor derivative against central differences
    of the determinant; that record reports the discrepancy in units of the
    allowed tolerance, so its bound is 1.
    """
    checks = _run_chunks(lambda *c: _lemma_chunk(cfg, *c), cfg, workers)
    notes = {"relative_slack": LEMMA_SLACK, "fd_rtol": FD_RTOL, "fd_step": f"{FD_REL_STEP} * p"}
    return TrialReport("lemma", cfg, checks, notes)


def random_rotations(n, count, rng):
    """Uniform rotations (det +1) from QR of Gaussian matrices."""
    g = rng.standard_normal((count, n, n))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diagonal(r, axis1=1, axis2=2))[:, None, :]
    flip = np.linalg.det(q) < 0
    q[flip, :, 0] *= -1.0
    return q


def _sigma_cap(n, p):
    # largest strength compatible with half-perimeter p
    return p * det_ratio_bound(n) / (2.0 ** n * float(factorial(n)) ** 2)


def _close_err(a, b, floor):
    """Deviation in units of ``rtol * max(|a|, |b|) + floor``."""
    tol = INVARIANCE_RTOL * np.maximum(np.abs(a), np.abs(b)) + floor
    return np.abs(a - b) / tol


def _invariance_chunk(cfg, chunk, start, count):
    n = cfg.dim
    rng = _rng(cfg.seed, "invariance", chunk)
    T, _, near = _draw(cfg, rng, count)
    R = random_rotations(n, count, rng)
    t = rng.uniform(-cfg.scale, cfg.scale, size=(count, 1, n))
    base = strengths(T)
    lam = lambda_bound(n)
    floor = INVARIANCE_FLOOR * _sigma_cap(n, base["half_perimeter"])
    T_moved = np.einsum("bij,bkj->bki", R, T) + t
    # rounding the moved coordinates shifts sigma by at most 2 lambda times the shift
    coord = np.maximum(np.abs(T).max(axis=(1, 2)), np.abs(T_moved).max(axis=(1, 2)))
    rigid_floor = floor + 2.0 * lam * COORD_ROUNDING_ULPS * _EPS * coord

    moved = strengths(T_moved)
    mirrored = T.copy()
    mirrored[:, :, 0] *= -1.0
    mirror = strengths(mirrored)
    same = strengths(T.copy())

    def inputs(k):
        return {"T": T[k].tolist(), "R": R[k].tolist(), "t": t[k, 0].tolist()}

    errs = {
        "rigid_sigma": _close_err(base["sigma"], moved["sigma"], rigid_floor),
        "rigid_signed": _close_err(base["signed"], moved["signed"], rigid_floor),
        "reflection_sigma": _close_err(base["sigma"], mirror["sigma"], floor),
        "reflection_signed": _close_err(base["signed"], -mirror["signed"], floor),
    }
    sc_sigma = np.zeros(count)
    sc_signed = np.zeros(count)
    for c in SCALE_FACTORS:
        scaled = strengths(c * T)
        sc_sigma = np.maximum(sc_sigma, _close_err(c * base["sigma"], scaled["sigma"], c * floor))
        sc_signed = np.maximum(sc_signed, _close_err(c * base["signed"], scaled["signed"], c * floor))
    errs["scaling_sigma"] = sc_sigma
    errs["scaling_signed"] = sc_signed

    out = {
        name: _record(name, 1.0, e, e > 1.0, start, inputs, {"near_degenerate": int(near.sum())})
        for name, e in errs.items()
    }
    identical = (same["sigma"] == base["sigma"]) & (same["signed"] == base["signed"])
    ident = (~identical).astype(np.float64)
    out["identity_bitwise"] = _record("identity_bitwise", 0.0, ident, ident > 0, start, inputs)
    return out


def run_invariance_suite(cfg, workers=1):
    """Rigid motion, reflection and scaling behaviour of sigma and s.

    Each record reports the deviation divided by the allowed tolerance
    ``1e-9 * max(|a|, |b|) + 1e-12 * sigma_max(p)``, where ``sigma_max(p)``
    is the largest strength a simplex with half-perimeter ``p`` can have.
    Rigid motions add ``2 lambda * 16 ulp(max |x|)``: the moved coordinates
    are rounded, and sigma is Lipschitz in them. The floors only matter for
    nearly degenerate simplices, whose strength is dominated by rounding.
    """
    checks = _run_chunks(lambda *c: _invariance_chunk(cfg, *c), cfg, workers)
    notes = {
        "rtol": INVARIANCE_RTOL,
        "floor": f"{INVARIANCE_FLOOR} * sigma_max(p)",
        "rigid_floor": f"+ 2 * lambda * {COORD_ROUNDING_ULPS} ulp(max |x|)",
        "scales": list(SCALE_FACTORS),
    }
    return TrialReport("invariance", cfg, checks, notes)


def _gradient_chunk(cfg, bound, chunk, start, count):
    rng = _rng(cfg.seed, "gradient", chunk)
    T, _, near = _draw(cfg, rng, count)
    g = fd_gradients(kernels.pairwise_distances(T))
    skipped = np.isnan(g)
    norm = np.sqrt(np.where(skipped, 0.0, g * g).sum(axis=1))

    def inputs(k):
        return {"T": T[k].tolist()}

    counters = {"near_degenerate": int(near.sum()), "skipped_entries": int(skipped.sum())}
    return {
        "gradient_norm": _record(
            "gradient_norm", bound, norm, norm > bound + GRADIENT_SLACK, start, inputs, counters
        )
    }


def run_gradient_suite(cfg, workers=1):
    """Finite-difference gradient norm of sigma in distance space."""
    bound = gradient_norm_bound(cfg.dim)
    checks = _run_chunks(lambda *c: _gradient_chunk(cfg, bound, *c), cfg, workers)
    notes = {"absolute_slack": GRADIENT_SLACK, "fd_step": f"{FD_REL_STEP} * p"}
    return TrialReport("gradient", cfg, checks, notes)


def replay_trial(cfg, suite, trial):
    """Regenerate the random inputs of one trial of a suite."""
    if not 0 <= trial < cfg.trials:
        raise InvalidInputError(f"trial index {trial} outside 0..{cfg.trials - 1}")
    chunk, k = divmod(trial, CHUNK)
    count = min(CHUNK, cfg.trials - chunk * CHUNK)
    rng = _rng(cfg.seed, suite, chunk)
    T, eps, _ = _draw(cfg, rng, count)
    out = {"T": T[k], "eps": float(eps[k])}
    if suite == "lipschitz":
        out["Q"] = perturb_batch(T, eps, rng)[k]
    return out


# ---------------------------------------------------------------------------
# T(l, eps) family


def adversarial_triangle(l, eps):
    """The triangle on ``(0, eps), (l, 0), (-l, 0)``."""
    return PointCloudSimplex([[0.0, eps], [l, 0.0], [-l, 0.0]])


def run_adversarial_family(lengths=(1.0, 1e3, 1e6), samples=50, smallest=1e-12):
    """Strength of the flat triangles T(l, eps) against ``eps / 2``.

    ``eps`` runs over ``samples`` log-spaced values in ``[smallest * l, l]``.
    The notes also record the area difference quotient
    ``(area(T(l, eps)) - area(T(l, 0))) / eps``, which equals ``l`` and
    therefore has no bound independent of the triangle.
    """
    rec = CheckRecord("sigma_le_half_eps", 1.0)
    quotients = []
    for l in lengths:
        eps = np.geomspace(smallest * l, l, samples)
        pts = np.array([[[0.0, e], [l, 0.0], [-l, 0.0]] for e in eps])
        sigma = strengths(pts)["sigma"]
        ratio = sigma / (eps / 2.0)
        start = rec.trials

        def inputs(k, l=l, eps=eps):
            return {"l": float(l), "eps": float(eps[k])}

        rec.merge(_record("sigma_le_half_eps", 1.0, ratio, ratio > 1.0, start, inputs))
        flat = np.array([[0.0, 0.0], [l, 0.0], [-l, 0.0]])
        area_flat = abs(kernels.edge_det(flat[None])[0][0]) / 2.0
        e = float(eps[len(eps) // 2])
        area = abs(kernels.edge_det(pts[len(eps) // 2][None])[0][0]) / 2.0
        quotients.append({"l": float(l), "eps": e, "area_quotient": float((area - area_flat) / e)})
    cfg = None
    return TrialReport("adversarial", cfg, {rec.name: rec}, {"area_difference_quotients": quotients})
