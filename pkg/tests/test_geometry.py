import math

import numpy as np
import pytest

from quadstage.geometry import (
    DegenerateInputError,
    GimbalLockWarning,
    ParallelLinesError,
    align_vectors,
    euler_to_rotation,
    line_closest_midpoint,
    rotation_to_euler,
)

from conftest import random_rotation


def single_axis(axis: int, deg: float) -> np.ndarray:
    # Independent construction of one single-axis rotation matrix.
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    m = np.eye(3)
    i, j = [(1, 2), (0, 2), (0, 1)][axis]
    m[i, i] = c
    m[j, j] = c
    m[i, j] = -s if axis != 1 else s
    m[j, i] = s if axis != 1 else -s
    return m


def compose_euler(rx: float, ry: float, rz: float) -> np.ndarray:
    return single_axis(0, rx) @ single_axis(1, ry) @ single_axis(2, rz)


class TestEulerRotation:
    def test_identity(self):
        assert np.allclose(euler_to_rotation([0, 0, 0]), np.eye(3))
        assert np.allclose(rotation_to_euler(np.eye(3)), [0, 0, 0])

    def test_roll_90_maps_y_to_z(self):
        r = euler_to_rotation([90, 0, 0])
        assert np.allclose(r @ [0, 1, 0], [0, 0, 1], atol=1e-15)

    def test_matches_independent_composition(self):
        assert np.allclose(euler_to_rotation([10, 20, 30]), compose_euler(10, 20, 30), atol=1e-15)

    @pytest.mark.parametrize("angles", [(10, 20, 30), (5, -10, 25), (-170, 80, 179)])
    def test_round_trip(self, angles):
        recovered = rotation_to_euler(euler_to_rotation(angles))
        assert np.max(np.abs(recovered - np.asarray(angles))) < 1e-9

    def test_round_trip_randomized(self, rng):
        for _ in range(1000):
            angles = rng.uniform([-180, -85, -180], [180, 85, 180])
            recovered = rotation_to_euler(euler_to_rotation(angles))
            err = np.abs(recovered - angles)
            err[0] = min(err[0], 360 - err[0])
            err[2] = min(err[2], 360 - err[2])
            assert np.max(err) < 1e-9

    def test_gimbal_lock_flagged(self):
        with pytest.warns(GimbalLockWarning):
            angles = rotation_to_euler(euler_to_rotation([25, 90, 0]))
        assert angles[1] == pytest.approx(90.0)
        assert angles[2] == 0.0

    def test_rejects_non_rotation(self):
        with pytest.raises(ValueError):
            rotation_to_euler(np.diag([1.0, 2.0, 1.0]))


class TestAlignVectors:
    def test_identity(self):
        basis = np.eye(3)
        assert np.allclose(align_vectors(basis, basis), np.eye(3), atol=1e-12)

    def test_recovers_known_rotation(self):
        r0 = single_axis(2, 30)
        source = np.eye(3)
        assert np.max(np.abs(align_vectors(source, source @ r0.T) - r0)) < 1e-9

    def test_collinear_rejected(self):
        with pytest.raises(DegenerateInputError):
            align_vectors([[1, 0, 0], [2, 0, 0]], [[0, 1, 0], [0, 2, 0]])

    def test_zero_vector_rejected(self):
        with pytest.raises(DegenerateInputError):
            align_vectors([[1, 0, 0], [0, 0, 0]], [[1, 0, 0], [0, 1, 0]])

    def test_single_pair_rejected(self):
        with pytest.raises(DegenerateInputError):
            align_vectors([[1, 0, 0]], [[0, 1, 0]])

    def test_recovers_random_rotations(self, rng):
        for _ in range(1000):
            r = random_rotation(rng)
            source = rng.normal(size=(3, 3))
            while np.linalg.matrix_rank(source, tol=1e-3) < 2:
                source = rng.normal(size=(3, 3))
            recovered = align_vectors(source, source @ r.T)
            assert np.max(np.abs(recovered - r)) < 1e-9

    def test_noisy_output_still_proper(self, rng):
        for _ in range(200):
            r = random_rotation(rng)
            source = rng.normal(size=(4, 3))
            target = source @ r.T + 0.05 * rng.normal(size=(4, 3))
            got = align_vectors(source, target)
            assert np.max(np.abs(got.T @ got - np.eye(3))) < 1e-9
            assert abs(np.linalg.det(got) - 1.0) < 1e-9


class TestLineClosestMidpoint:
    def test_intersecting_axes(self):
        p = line_closest_midpoint([0, 0, 0], [1, 0, 0], [0, 0, 0], [0, 1, 0])
        assert np.allclose(p, [0, 0, 0], atol=1e-15)

    def test_skew_lines(self):
        # Closest points are (0,0,0) on the first line and (0,0,1) on the
        # second; the midpoint splits the common perpendicular.
        p = line_closest_midpoint([0, 0, 0], [1, 0, 0], [0, 0, 1], [0, 1, 0])
        assert np.allclose(p, [0, 0, 0.5], atol=1e-15)

    def test_parallel_rejected(self):
        with pytest.raises(ParallelLinesError):
            line_closest_midpoint([0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 0, 0])

    def test_zero_direction_rejected(self):
        with pytest.raises(ValueError):
            line_closest_midpoint([0, 0, 0], [0, 0, 0], [0, 1, 0], [1, 0, 0])

    def test_swap_symmetry(self, rng):
        for _ in range(500):
            p1, p2 = rng.normal(size=(2, 3)) * 10
            d1, d2 = rng.normal(size=(2, 3))
            if np.linalg.norm(np.cross(d1, d2)) < 1e-6:
                continue
            a = line_closest_midpoint(p1, d1, p2, d2)
            b = line_closest_midpoint(p2, d2, p1, d1)
            assert np.max(np.abs(a - b)) < 1e-12
