import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from axirot.exceptions import BehindCamera, InsufficientPoints, InvalidInput
from axirot.geometry import angle_from_correspondence, angle_terms, epipolar_residual, essential_from_angle
from axirot.synthetic import (
    CylinderSpec,
    LatticeSpec,
    NoiseSpec,
    generate_pair,
    make_lattice,
    project,
    rotate_about_axis,
    sample_cylinder,
)


class TestCylinder:
    def test_bounds(self):
        P = sample_cylinder(CylinderSpec(point_count=10_000), seed=1)
        assert P.shape == (10_000, 3)
        assert np.all(P[:, 0] ** 2 + (P[:, 2] - 200) ** 2 <= 115**2 + 1e-9)
        assert np.all(np.abs(P[:, 1]) <= 115)

    def test_single_point(self):
        P = sample_cylinder(CylinderSpec(point_count=1), seed=2)
        assert P.shape == (1, 3)
        assert P[0, 0] ** 2 + (P[0, 2] - 200) ** 2 <= 115**2

    def test_moments(self):
        spec = CylinderSpec(point_count=1_000_000)
        P = sample_cylinder(spec, seed=3)
        centred = P - [0, 0, 200]
        # closed-form per-axis standard deviations of the uniform cylinder
        sd = np.array([115 / 2, 230 / math.sqrt(12), 115 / 2])
        se = sd / math.sqrt(len(P))
        assert np.all(np.abs(centred.mean(axis=0)) < 3 * se)
        # E[r^2] = R^2 / 2 confirms the volume-uniform radius transform
        r2 = centred[:, 0] ** 2 + centred[:, 2] ** 2
        assert r2.mean() == pytest.approx(115**2 / 2, rel=3e-3)

    def test_deterministic(self):
        assert np.array_equal(sample_cylinder(CylinderSpec(), 4), sample_cylinder(CylinderSpec(), 4))

    @pytest.mark.parametrize(
        "kwargs", [dict(point_count=0), dict(radius=-1.0), dict(radius=250.0), dict(height=0.0)]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidInput):
            CylinderSpec(**kwargs)


class TestLattice:
    def test_corners(self):
        P = make_lattice(LatticeSpec(points_per_edge=2))
        expected = {(sx * 100.0, sy * 100.0, 200.0 + sz * 100.0) for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)}
        assert {tuple(p) for p in P} == expected

    def test_default_size_and_spacing(self):
        spec = LatticeSpec()
        P = make_lattice(spec)
        assert P.shape == (9261, 3)
        assert spec.spacing == 10.0
        assert np.allclose(np.unique(P[:, 0]), np.arange(-100, 101, 10))

    @pytest.mark.parametrize("n", [2, 5, 21])
    def test_mirror_symmetry(self, n):
        P = make_lattice(LatticeSpec(points_per_edge=n))
        mirrored = P * [-1, 1, 1]
        key = lambda A: np.round(A, 9)[np.lexsort(np.round(A, 9).T)]
        assert np.array_equal(key(P), key(mirrored))


class TestRotate:
    def test_quarter_turn(self):
        out = rotate_about_axis(np.array([[0.0, 0.0, 100.0]]), math.radians(90), 200.0)
        assert np.allclose(out, [[100.0, 0.0, 200.0]], atol=1e-12)

    def test_zero_is_identity(self):
        P = sample_cylinder(CylinderSpec(), 5)
        assert np.array_equal(rotate_about_axis(P, 0.0, 200.0), P)

    @settings(max_examples=200, deadline=None)
    @given(
        st.tuples(*[st.floats(-300, 300)] * 3),
        st.floats(-math.pi, math.pi),
        st.floats(1, 500),
    )
    def test_isometry(self, point, alpha, d):
        P = np.array([point])
        Q = rotate_about_axis(P, alpha, d)
        assert Q[0, 1] == pytest.approx(P[0, 1], abs=1e-12)
        r_before = math.hypot(P[0, 0], P[0, 2] - d)
        r_after = math.hypot(Q[0, 0], Q[0, 2] - d)
        assert r_after == pytest.approx(r_before, abs=1e-12 * max(1.0, r_before))

    def test_bad_axis(self):
        with pytest.raises(InvalidInput):
            rotate_about_axis(np.zeros((1, 3)), 0.1, 0.0)


class TestProject:
    @pytest.mark.parametrize(
        "point, expected",
        [((0, 115, 200), (0, 0.575)), ((0, 0, 50), (0, 0)), ((20, -10, 100), (0.2, -0.1))],
    )
    def test_examples(self, point, expected):
        assert np.allclose(project(np.array(point, dtype=float)), expected, atol=1e-15)

    @pytest.mark.parametrize("z", [0.0, -5.0])
    def test_behind_camera(self, z):
        with pytest.raises(BehindCamera):
            project(np.array([1.0, 1.0, z]))


class TestGeneratePair:
    def test_table1_configuration(self):
        points = sample_cylinder(CylinderSpec(), 6)
        data = generate_pair(points, math.radians(30), 200.0, NoiseSpec(1e-4, 7), outlier_count=70)
        assert data.pairs.shape == (100, 4)
        assert int(data.inlier_flags.sum()) == 30
        assert data.ground_truth_angle == math.radians(30)

    def test_exact_pairs_satisfy_constraint(self):
        alpha = math.radians(30)
        data = generate_pair(sample_cylinder(CylinderSpec(), 8), alpha, 200.0, NoiseSpec(0.0), 0)
        e = essential_from_angle(alpha)
        assert max(abs(epipolar_residual(row, e)) for row in data.pairs) < 1e-12

    def test_derangement_over_seeds(self):
        points = sample_cylinder(CylinderSpec(point_count=20), 9)
        clean = generate_pair(points, 0.4, 200.0, NoiseSpec(0.0), 0).pairs
        for seed in range(1000):
            k = 2 + seed % 15
            data = generate_pair(points, 0.4, 200.0, NoiseSpec(0.0, seed), k)
            outliers = np.flatnonzero(~data.inlier_flags)
            assert len(outliers) == k
            assert np.array_equal(data.pairs[:, :2], clean[:, :2])
            assert np.array_equal(data.pairs[data.inlier_flags], clean[data.inlier_flags])
            assert not np.any(np.all(data.pairs[outliers, 2:] == clean[outliers, 2:], axis=1))
            # second-view points are permuted among the outliers, never invented
            assert sorted(map(tuple, data.pairs[outliers, 2:])) == sorted(map(tuple, clean[outliers, 2:]))

    def test_deterministic(self):
        points = sample_cylinder(CylinderSpec(), 10)
        a = generate_pair(points, 0.3, 200.0, NoiseSpec(1e-3, 4), 10)
        b = generate_pair(points, 0.3, 200.0, NoiseSpec(1e-3, 4), 10)
        assert np.array_equal(a.pairs, b.pairs) and np.array_equal(a.inlier_flags, b.inlier_flags)

    @pytest.mark.parametrize("k", [1, 101, -1])
    def test_bad_outlier_count(self, k):
        with pytest.raises(InsufficientPoints):
            generate_pair(sample_cylinder(CylinderSpec(), 11), 0.3, 200.0, NoiseSpec(0.0), k)

    def test_behind_camera_after_rotation(self):
        with pytest.raises(BehindCamera):
            generate_pair(np.array([[0.0, 0.0, 10.0]]), math.pi, 5.0, NoiseSpec(0.0), 0)

    def test_noise_statistics(self):
        points = sample_cylinder(CylinderSpec(point_count=25_000), 12)
        clean = generate_pair(points, 0.5, 200.0, NoiseSpec(0.0), 0).pairs
        noisy = generate_pair(points, 0.5, 200.0, NoiseSpec(1e-3, 13), 0).pairs
        diff = (noisy - clean).ravel()
        assert diff.size == 100_000
        assert np.std(diff) == pytest.approx(1e-3, rel=0.02)


@pytest.mark.parametrize("deg", [-60, -30, -1, 1, 30, 60])
def test_sign_consistency(deg):
    alpha = math.radians(deg)
    data = generate_pair(sample_cylinder(CylinderSpec(), 14), alpha, 200.0, NoiseSpec(0.0), 0)
    for row in data.pairs:
        assert angle_from_correspondence(row) == pytest.approx(alpha, abs=1e-9)


@pytest.mark.parametrize("deg", [-50, 21, 70])
def test_degenerate_planes(deg):
    alpha = math.radians(deg)
    rng = np.random.default_rng(15)
    # horizontal plane through the camera centre
    flat = np.column_stack([rng.uniform(-80, 80, 50), np.zeros(50), rng.uniform(150, 250, 50)])
    # bisecting plane: after rotation the point is the mirror image X' = -X
    half = alpha / 2
    s = rng.uniform(-80, 80, 50)
    bisect = np.column_stack([s * math.sin(half), rng.uniform(-80, 80, 50), 200 + s * math.cos(half)])
    for P in (flat, bisect):
        Q = rotate_about_axis(P, alpha, 200.0)
        if P is bisect:
            assert np.allclose(Q, P * [-1, 1, 1], atol=1e-9)
        X = np.column_stack([project(P), project(Q)])
        u, v = angle_terms(X)
        assert np.all(np.abs(u) < 1e-12) and np.all(np.abs(v) < 1e-12)
