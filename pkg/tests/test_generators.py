import numpy as np
import pytest

from tightlid.generators import (
    FAMILIES,
    HELIX_TURNS,
    M2_MAP,
    M9_MAP,
    MANIFOLDS,
    MOEBIUS_TWISTS,
    GeneratorSpec,
    generate,
    ground_truth_id,
)
from tightlid.geometry import Metric


@pytest.mark.parametrize("family", FAMILIES)
def test_shapes_and_determinism(family):
    spec = GeneratorSpec(family, d=None if family in MANIFOLDS else 3, n=500, seed=9)
    a = generate(spec)
    b = generate(spec)
    assert a.coords.shape == (500, spec.ambient_dim)
    np.testing.assert_array_equal(a.coords, b.coords)
    assert np.all(np.isfinite(a.coords))


def test_seed_and_stream_change_the_draw():
    base = generate(GeneratorSpec("gaussian", d=2, n=50, seed=1)).coords
    assert not np.array_equal(base, generate(GeneratorSpec("gaussian", d=2, n=50, seed=2)).coords)
    assert not np.array_equal(base, generate(GeneratorSpec("gaussian", d=2, n=50, seed=1, stream=1)).coords)


def test_gaussian_lln():
    pts = generate(GeneratorSpec("gaussian", d=2, n=100_000, seed=123)).coords
    assert np.all(np.abs(pts.mean(axis=0)) < 0.02)
    assert np.all(np.abs(pts.var(axis=0) - 1.0) < 0.02)


def test_uniform_and_torus_lln():
    cube = generate(GeneratorSpec("uniform", d=3, n=100_000, seed=5))
    torus = generate(GeneratorSpec("torus", d=3, n=100_000, seed=5))
    assert torus.metric is Metric.FLAT_TORUS and cube.metric is Metric.EUCLIDEAN
    for pts in (cube.coords, torus.coords):
        assert pts.min() >= 0.0 and pts.max() < 1.0
        assert np.all(np.abs(pts.mean(axis=0) - 0.5) < 0.01)
        assert np.all(np.abs(pts.var(axis=0) - 1 / 12) < 0.005)


def _pts(family, n=5000):
    return generate(GeneratorSpec(family, n=n, seed=77)).coords


def test_m1_on_unit_sphere():
    pts = _pts("m1", 10_000)
    assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) < 1e-12


def test_m2_in_affine_image():
    pts = _pts("m2")
    params, *_ = np.linalg.lstsq(M2_MAP, pts.T, rcond=None)
    assert np.max(np.abs(M2_MAP @ params - pts.T)) < 1e-10
    assert params.min() > -1e-10 and params.max() < 1 + 1e-10


def test_m9_parameters_in_unit_cube():
    assert np.linalg.matrix_rank(M9_MAP) == 20
    params = np.linalg.solve(M9_MAP, _pts("m9").T)
    assert params.min() > -1e-10 and params.max() < 1 + 1e-10


def test_m5_helix_residual():
    x, y, z = _pts("m5").T
    rho = np.hypot(x, y)
    theta = 2 * np.pi * z
    assert np.max(np.abs(rho * np.cos(theta) - x)) < 1e-10
    assert np.max(np.abs(rho * np.sin(theta) - y)) < 1e-10
    assert rho.min() >= 1.0 - 1e-12 and rho.max() <= 2.0 + 1e-12
    assert z.max() <= HELIX_TURNS


def test_m7_swiss_roll_residual():
    x, h, z = _pts("m7").T
    t = np.hypot(x, z)
    assert np.max(np.abs(t * np.cos(t) - x)) < 1e-10
    assert np.max(np.abs(t * np.sin(t) - z)) < 1e-10
    assert h.min() >= 0 and h.max() <= 21


def test_m11_moebius_residual():
    x, y, z = _pts("m11").T
    phi = np.arctan2(y, x)
    half = 0.5 * MOEBIUS_TWISTS * phi
    offset = np.hypot(x, y) - 1.0
    # (offset, z) lies on the line through the origin at angle half
    assert np.max(np.abs(offset * np.sin(half) - z * np.cos(half))) < 1e-10
    assert np.max(np.hypot(offset, z)) <= 0.5 + 1e-12


def test_m13_curve_residual():
    pts = _pts("m13")
    t = pts[:, 0]
    for h in range(1, 7):
        assert np.max(np.abs(pts[:, 2 * h - 1] - np.cos(2 * np.pi * h * t) / h)) < 1e-10
        assert np.max(np.abs(pts[:, 2 * h] - np.sin(2 * np.pi * h * t) / h)) < 1e-10


@pytest.mark.parametrize("family", ["m10a", "m10b", "m10c"])
def test_m10_zero_padded_cube(family):
    pts = _pts(family, 1000)
    assert np.all(pts[:, -1] == 0.0)
    assert pts[:, :-1].min() >= 0 and pts[:, :-1].max() < 1


def test_m4_first_block_on_circles():
    pts = _pts("m4", 1000)
    pairs = pts[:, :8].reshape(-1, 4, 2)
    assert np.max(np.abs(np.linalg.norm(pairs, axis=2) - 1.0)) < 1e-12


def test_m12_isotropic():
    pts = _pts("m12", 50_000)
    assert np.all(np.abs(pts.mean(axis=0)) < 0.03)
    assert np.all(np.abs(pts.var(axis=0) - 1.0) < 0.03)


def test_ground_truth():
    assert ground_truth_id("m9") == 20
    assert ground_truth_id("m13") == 1
    assert ground_truth_id("gaussian", 7) == 7
    with pytest.raises(ValueError):
        ground_truth_id("m99")


def test_spec_errors():
    with pytest.raises(ValueError, match="unknown family"):
        GeneratorSpec("klein")
    with pytest.raises(ValueError, match="fixed intrinsic dimension"):
        GeneratorSpec("m1", d=5)
    with pytest.raises(ValueError):
        GeneratorSpec("gaussian")
    with pytest.raises(ValueError):
        GeneratorSpec("gaussian", d=2, n=0)


def test_manifest():
    spec = GeneratorSpec("m5", n=10, seed=3)
    assert spec.manifest() == {"family": "m5", "d": 2, "D": 3, "n": 10, "seed": 3}
