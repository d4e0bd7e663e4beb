import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import bisect_adjusted
from tightlid.moving_center import Case, adjusted_distance, adjusted_distances, center, reflect


@pytest.mark.parametrize(
    "q, x, v, r, t, case",
    [
        ([0, 0], [0, 0], [0.5, 0], 1.0, 0.5, Case.STATIONARY_CENTER),
        ([0, 0], [0.4, 0.3], [0.4, 0.3], 1.0, 0.0, Case.COINCIDENT_SAMPLE),
        ([0, 0], [1, 0], [0, 0], 2.0, 2.0 / 3.0, Case.TARGET_IS_QUERY),
        ([0, 0], [1, 0], [0.5, 0], 1.0, 0.25, Case.BOUNDARY_CENTER),
        ([0], [-0.5], [0.5], 1.0, 2.0 / 3.0, Case.INTERIOR_CENTER),
    ],
)
@pytest.mark.parametrize("backend", ["numba", "numpy"])
def test_worked_examples(q, x, v, r, t, case, backend):
    res = adjusted_distance(q, x, v, r, backend=backend)
    assert res.case is case
    assert res.t == pytest.approx(t, rel=1e-15, abs=1e-15)


def test_precondition_errors():
    with pytest.raises(ValueError):
        adjusted_distance([0, 0], [2, 0], [0, 0], 1.0)
    with pytest.raises(ValueError):
        adjusted_distance([0, 0], [0, 0], [0, 0], 0.0)
    with pytest.raises(ValueError):
        adjusted_distance([0, 0], [0, 0, 0], [0, 0], 1.0)


def test_reflect_is_involution():
    q = np.array([0.25, -1.0])
    x = np.array([1.5, 2.0])
    np.testing.assert_array_equal(reflect(q, reflect(q, x)), x)


def test_center_endpoints():
    q = np.array([1.0, 2.0])
    x = np.array([0.0, 0.5])
    np.testing.assert_array_equal(center(q, x, 2.0, 0.0), x)
    np.testing.assert_array_equal(center(q, x, 2.0, 2.0), q)


def _ball_points(rng, m, dim, r):
    """Uniform-ish points in the closed ball of radius ``r`` about 0."""
    pts = rng.standard_normal((m, dim))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts * (r * rng.random((m, 1)) ** (1.0 / dim))


def test_matches_bisection_on_random_triples():
    rng = np.random.default_rng(5)
    m, dim = 20000, 4
    r = rng.uniform(0.1, 10.0, m)
    q = rng.standard_normal((m, dim))
    x = q + _ball_points(rng, m, dim, 1.0) * r[:, None]
    v = q + _ball_points(rng, m, dim, 1.0) * r[:, None]
    t, case = adjusted_distances(q, x, v, r)
    ref = bisect_adjusted(q, x, v, r)
    assert np.all(case != Case.CLAMPED_DEGENERATE)
    assert np.max(np.abs(t - ref) / r) < 1e-9


def _triple(draw_vals, dim):
    q = np.array(draw_vals[:dim])
    x = q + np.array(draw_vals[dim : 2 * dim])
    v = q + np.array(draw_vals[2 * dim : 3 * dim])
    return q, x, v


coords = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(st.lists(coords, min_size=9, max_size=9), st.floats(0.01, 100.0))
def test_residual_and_range(vals, scale):
    q, x, v = _triple(vals, 3)
    q, x, v = q * scale, x * scale, v * scale
    r = max(np.linalg.norm(x - q), np.linalg.norm(v - q), 1e-3 * scale) * 1.0000001
    res = adjusted_distance(q, x, v, r)
    assume(res.case is not Case.CLAMPED_DEGENERATE)
    assert 0.0 <= res.t <= r * (1 + 1e-9)
    c = center(q, x, r, res.t)
    assert abs(np.linalg.norm(c - v) - res.t) <= 1e-8 * r


@settings(max_examples=200, deadline=None)
@given(
    st.lists(coords, min_size=6, max_size=6),
    st.floats(0.0, 2 * math.pi),
    st.floats(0.01, 50.0),
    st.lists(st.floats(-10, 10), min_size=2, max_size=2),
)
def test_similarity_equivariance(vals, angle, scale, shift):
    q = np.zeros(2)
    x = np.array(vals[:2])
    v = np.array(vals[2:4])
    r = max(np.linalg.norm(x), np.linalg.norm(v), 1e-3) * 1.01
    base = adjusted_distance(q, x, v, r)
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    tr = lambda p: scale * (rot @ p) + np.array(shift)
    moved = adjusted_distance(tr(q), tr(x), tr(v), scale * r)
    assert moved.t == pytest.approx(scale * base.t, rel=1e-7, abs=1e-9 * scale * r)


def test_antipodal_boundary_reaches_far_side():
    res = adjusted_distance([0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], 1.0)
    assert res.case is Case.BOUNDARY_CENTER
    assert res.t == 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(coords, min_size=4, max_size=4))
def test_continuous_across_boundary_branch(vals):
    """Nudging ``x`` onto the sphere must not jump between branches."""
    x = np.array(vals[:2])
    assume(np.linalg.norm(x) > 1e-3)
    x = x / np.linalg.norm(x)
    v = np.array(vals[2:]) * 0.7
    assume(np.any(v != 0.0))
    q = np.zeros(2)
    on = adjusted_distance(q, x, v, 1.0)
    inside = adjusted_distance(q, x * (1 - 1e-8), v, 1.0)
    assert inside.case is Case.INTERIOR_CENTER
    assert on.case is Case.BOUNDARY_CENTER
    assert inside.t == pytest.approx(on.t, abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.lists(coords, min_size=4, max_size=4), st.sampled_from(["query", "start"]))
def test_continuous_near_special_targets(vals, toward):
    q = np.zeros(2)
    x = np.array(vals[:2]) * 0.7
    assume(np.linalg.norm(x) > 1e-3)
    nudge = np.array(vals[2:]) * 1e-9
    anchor = q if toward == "query" else x
    exact = adjusted_distance(q, x, anchor, 1.0)
    near = adjusted_distance(q, x, anchor + nudge, 1.0)
    assert near.t == pytest.approx(exact.t, abs=1e-6)


def test_degenerate_input_is_clamped_not_raised():
    q = np.zeros(2)
    x = np.array([1.0, 0.0])
    v = np.array([1.0, 1e-5])  # on the tolerance band, orthogonal step: no positive root
    res = adjusted_distance(q, x, v, 1.0)
    assert res.case is Case.CLAMPED_DEGENERATE
    assert res.t == pytest.approx(1e-9)
