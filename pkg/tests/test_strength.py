from math import sqrt

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from simplex_strength import (
    InvalidInputError,
    InvalidMetricError,
    OutOfDomainError,
    normalized_triangle_strength,
    signed_strength,
    strength_from_distances,
    triangle_strength_heron,
)
from simplex_strength.strength import (
    SECTIONS,
    in_region,
    section_a_eq_b,
    section_b_eq_c,
    strength_result_from_distances,
    strengths,
)
from simplex_strength.bounds import lambda_bound
from simplex_strength.verify import adversarial_triangle

EPS = np.finfo(np.float64).eps


def test_unit_segment(backend):
    r = signed_strength([[0.0], [1.0]])
    assert (r.sigma, r.sign, r.signed) == (2.0, 1, 2.0)
    assert r.half_perimeter == 0.5
    assert r.volume_squared == 1.0


def test_segment_strength_is_twice_length(backend):
    for a, b in ((0.0, 3.0), (-2.0, 5.5), (1e-6, 2e-6)):
        assert signed_strength([[a], [b]]).sigma == pytest.approx(2 * abs(b - a), rel=1e-14)
        assert signed_strength([[b], [a]]).signed == pytest.approx(-2 * abs(b - a), rel=1e-14)


def test_pythagorean_triangle(backend):
    assert signed_strength([[0, 0], [3, 0], [0, 4]]).sigma == pytest.approx(1 / 6, rel=1e-14)


@pytest.mark.parametrize("a", [1e-3, 1.0, 1e3])
def test_equilateral(backend, a):
    pts = [[0, 0], [a, 0], [a / 2, a * sqrt(3) / 2]]
    assert signed_strength(pts).sigma == pytest.approx(a / 18, rel=1e-13)


def test_standard_tetrahedron(backend):
    # vol^2 = 1/36, p = (3 + 3 sqrt 2) / 2
    p = (3 + 3 * sqrt(2)) / 2
    pts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert signed_strength(pts).sigma == pytest.approx(1 / 36 / p ** 5, rel=1e-13)


def test_mirror_negates_signed_strength(backend):
    pts = np.array([[0, 0], [2, 0.3], [0.5, 1.7]])
    mirrored = pts * [-1, 1]
    a, b = signed_strength(pts), signed_strength(mirrored)
    assert a.sign == -b.sign != 0
    assert a.signed == pytest.approx(-b.signed, rel=1e-14)


def test_collinear_points_have_zero_strength(backend):
    r = signed_strength([[0, 0], [1, 1], [3, 3]])
    assert (r.sigma, r.sign, r.signed, r.volume_squared) == (0.0, 0, 0.0, 0.0)


def test_coincident_points_have_zero_strength(backend):
    r = signed_strength([[1, 1], [1, 1], [1, 1]])
    assert (r.sigma, r.half_perimeter) == (0.0, 0.0)


def test_distance_input_has_no_sign():
    r = strength_result_from_distances([[0, 3, 4], [3, 0, 5], [4, 5, 0]])
    assert r.sign is None and r.signed is None
    assert r.sigma == pytest.approx(1 / 6, rel=1e-14)


def test_distance_input_rejects_non_metric():
    with pytest.raises(InvalidMetricError):
        strength_from_distances([[0, 2, 9], [2, 0, 1], [9, 1, 0]])


@pytest.mark.parametrize(
    "sides, sigma",
    [((3, 4, 5), 1 / 6), ((1, 1, 1), 1 / 18), ((1, 1, 2), 0.0), ((0, 0, 0), 0.0)],
)
def test_heron(sides, sigma):
    assert triangle_strength_heron(*sides) == pytest.approx(sigma, rel=1e-15, abs=0)


@pytest.mark.parametrize("sides", [(1, 1, 3), (-1, 1, 1), (1, np.nan, 1)])
def test_heron_rejects_bad_sides(sides):
    with pytest.raises(InvalidInputError):
        triangle_strength_heron(*sides)


def test_heron_agrees_with_general_path(backend, rng):
    pts = rng.uniform(-1, 1, size=(500, 3, 2))
    r = strengths(pts)
    for k, tri in enumerate(pts):
        a = np.linalg.norm(tri[1] - tri[2])
        b = np.linalg.norm(tri[0] - tri[2])
        c = np.linalg.norm(tri[0] - tri[1])
        assert r["sigma"][k] == pytest.approx(triangle_strength_heron(a, b, c), rel=1e-9, abs=1e-15)


@pytest.mark.parametrize(
    "x, y, sigma",
    [(1.0, 0.0, 1 / 18), (0.5, 0.5, 0.0), (0.0, 0.0, 0.0), (0.6, 0.0, 0.063 / 1.69)],
)
def test_normalized_values(x, y, sigma):
    assert normalized_triangle_strength(x, y) == pytest.approx(sigma, rel=1e-14, abs=1e-300)


@pytest.mark.parametrize("x, y", [(1.1, 0.0), (0.3, 0.4), (0.8, 0.3), (0.5, -0.1)])
def test_normalized_out_of_domain(x, y):
    assert not in_region(x, y)
    with pytest.raises(OutOfDomainError):
        normalized_triangle_strength(x, y)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_normalized_matches_heron(x, y):
    assume(in_region(x, y, slack=0.0))
    want = triangle_strength_heron(x, 1 - y, 1.0)
    assert normalized_triangle_strength(x, y) == pytest.approx(want, rel=1e-12, abs=1e-15)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(0.01, 100))
def test_normalization_law(a, b, c):
    a, b, c = sorted((a, b, c))
    assume(a + b > c)
    # sides a <= b <= c map to (x, y) = (a/c, 1 - b/c); sigma scales linearly
    x, y = a / c, 1 - b / c
    assert normalized_triangle_strength(x, y) * c == pytest.approx(
        triangle_strength_heron(a, b, c), rel=1e-10, abs=1e-14 * c
    )


def test_sections_match_normalized_strength():
    for x in np.linspace(0, 1, 51):
        assert section_b_eq_c(x) == pytest.approx(normalized_triangle_strength(x, 0.0), rel=1e-12, abs=1e-300)
    for x in np.linspace(0.5, 1, 51):
        assert section_a_eq_b(x) == pytest.approx(
            normalized_triangle_strength(x, 1 - x), rel=1e-12, abs=1e-300
        )
    assert set(SECTIONS) == {"b-eq-c", "a-eq-b"}


def test_adversarial_triangle_strength_below_half_eps(backend):
    for l in (1.0, 1e3, 1e6):
        for eps in (1e-1, 1e-4, 1e-8):
            r = signed_strength(adversarial_triangle(l, eps))
            assert r.sigma <= eps / 2 * (1 + 1e-9)


coords = st.floats(-10, 10, allow_nan=False)


@st.composite
def simplices(draw):
    n = draw(st.integers(1, 4))
    return np.array([[draw(coords) for _ in range(n)] for _ in range(n + 1)])


@settings(max_examples=200, deadline=None)
@given(simplices(), st.floats(1e-3, 1e3))
def test_strength_scales_linearly(pts, c):
    base = signed_strength(pts)
    scaled = signed_strength(c * pts)
    # c * pts is rounded, and sigma is lambda-Lipschitz in the coordinates
    rounding = 2 * lambda_bound(pts.shape[1]) * 4 * EPS * c * np.abs(pts).max()
    floor = c * 1e-9 * base.half_perimeter + rounding
    assert scaled.sigma == pytest.approx(c * base.sigma, rel=1e-7, abs=floor + 1e-300)


@settings(max_examples=200, deadline=None)
@given(simplices(), st.integers(0, 2 ** 32 - 1))
def test_strength_invariant_under_rotation(pts, seed):
    rng = np.random.default_rng(seed)
    n = pts.shape[1]
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    base = signed_strength(pts)
    moved = signed_strength(pts @ q.T)
    rounding = 2 * lambda_bound(n) * 16 * EPS * np.abs(pts).max()
    floor = 1e-9 * base.half_perimeter + rounding + 1e-300
    assert moved.sigma == pytest.approx(base.sigma, rel=1e-7, abs=floor)


@settings(max_examples=200, deadline=None)
@given(simplices())
def test_strength_reflection(pts):
    mirrored = pts.copy()
    mirrored[:, 0] *= -1
    a, b = signed_strength(pts), signed_strength(mirrored)
    assert a.sigma == pytest.approx(b.sigma, rel=1e-9, abs=1e-300)
    assert a.sign == -b.sign


@settings(max_examples=200, deadline=None)
@given(simplices())
def test_strength_is_nonnegative_and_zero_iff_flat(pts):
    r = signed_strength(pts)
    assert r.sigma >= 0
    assert (r.sigma == 0) == (r.sign == 0)


@pytest.mark.parametrize("c", [1e-300, 1e-150, 1e150, 1e300])
def test_extreme_scales_stay_finite(backend, c):
    # p^(2n-1) and vol^2 leave the float range here; sigma does not
    r = signed_strength(c * np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]))
    assert r.sign == 1
    assert r.sigma == pytest.approx(c / 6, rel=1e-14)
    assert r.half_perimeter == pytest.approx(6 * c, rel=1e-15)
    assert strength_from_distances(c * np.array([[0, 3, 4], [3, 0, 5], [4, 5, 0.0]])) == pytest.approx(
        c / 6, rel=1e-14
    )


def test_tiny_segment_distance_does_not_underflow():
    r = signed_strength([[0.0], [4e-176]])
    assert r.sigma == pytest.approx(8e-176, rel=1e-15)
