"""Rotation and line-geometry primitives.

Conventions used throughout the package:

* positions are in millimetres, directions are unitless,
* Euler angles are intrinsic x-y-z (roll, pitch, yaw), degrees at API
  boundaries: ``R = Rx(rx) @ Ry(ry) @ Rz(rz)``,
* rotation matrices are 3x3 float64 arrays with ``R.T @ R = I`` and
  ``det(R) = +1``.

All functions are pure and safe to call from multiple threads.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

# Rank threshold for the alignment problem and parallelism threshold for
# line intersection, both on unit-normalized inputs.
DEGENERACY_EPS = 1e-12

# |pitch| closer to 90 deg than this is treated as gimbal lock.
GIMBAL_LOCK_EPS_DEG = 1e-7


class DegenerateInputError(ValueError):
    """Vector set does not constrain a unique rotation (rank < 2)."""


class ParallelLinesError(ValueError):
    """Line directions are parallel; there is no unique closest point."""


class GimbalLockWarning(UserWarning):
    """|pitch| = 90 deg: roll and yaw are inseparable, yaw is reported as 0."""


def rot_x(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_to_rotation(euler_deg) -> np.ndarray:
    """Rotation matrix from intrinsic x-y-z Euler angles in degrees."""
    e = np.asarray(euler_deg, dtype=float)
    if e.shape != (3,):
        raise ValueError(f"expected 3 Euler angles, got shape {e.shape}")
    if not np.all(np.isfinite(e)):
        raise ValueError("Euler angles must be finite")
    rx, ry, rz = np.radians(e)
    return rot_x(rx) @ rot_y(ry) @ rot_z(rz)


def is_rotation(r: np.ndarray, tol: float = 1e-9) -> bool:
    """True if r is orthonormal with det +1 within tol."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        return False
    return (
        np.max(np.abs(r.T @ r - np.eye(3))) <= tol
        and abs(np.linalg.det(r) - 1.0) <= tol
    )


def rotation_to_euler(r: np.ndarray) -> np.ndarray:
    """Intrinsic x-y-z Euler angles (degrees) of a rotation matrix.

    Canonical form: ry in [-90, 90], rx and rz in (-180, 180].  At gimbal
    lock (|ry| = 90 deg) only rx +/- rz is observable; rz is set to 0 and a
    GimbalLockWarning is emitted.
    """
    r = np.asarray(r, dtype=float)
    if not is_rotation(r, tol=1e-6):
        raise ValueError("input is not a rotation matrix (orthonormality/det check failed)")
    sy = min(1.0, max(-1.0, r[0, 2]))
    ry = math.asin(sy)
    if 90.0 - math.degrees(abs(ry)) < GIMBAL_LOCK_EPS_DEG:
        warnings.warn(
            "pitch at +/-90 deg: roll/yaw are not separable, reporting yaw = 0",
            GimbalLockWarning,
            stacklevel=2,
        )
        # At sy = +1: r[1,0] = sin(rx + rz), r[1,1] = cos(rx + rz).
        # At sy = -1: r[1,0] = sin(rz - rx), r[1,1] = cos(rz - rx).
        combined = math.atan2(r[1, 0], r[1, 1])
        rx = combined if sy > 0 else -combined
        rz = 0.0
    else:
        rx = math.atan2(-r[1, 2], r[2, 2])
        rz = math.atan2(-r[0, 1], r[0, 0])
    return np.degrees([rx, ry, rz])


def align_vectors(source, target) -> np.ndarray:
    """Best-fit rotation mapping each source vector onto its target.

    Solves the orthogonal Procrustes problem min_R sum ||R s_i - t_i||^2
    over proper rotations via SVD with determinant correction.

    Args:
        source: (n, 3) array-like of source vectors, n >= 2.
        target: (n, 3) array-like of matching target vectors.

    Returns:
        3x3 rotation matrix with R.T @ R = I and det(R) = +1.

    Raises:
        DegenerateInputError: fewer than two pairs, a zero vector, or a
            collinear vector set (the rotation about the common axis would
            be unconstrained).
    """
    s = np.atleast_2d(np.asarray(source, dtype=float))
    t = np.atleast_2d(np.asarray(target, dtype=float))
    if s.shape != t.shape or s.ndim != 2 or s.shape[1] != 3:
        raise ValueError(f"source/target must both be (n, 3), got {s.shape} and {t.shape}")
    if s.shape[0] < 2:
        raise DegenerateInputError("need at least two vector pairs")
    ns = np.linalg.norm(s, axis=1)
    nt = np.linalg.norm(t, axis=1)
    if np.any(ns < DEGENERACY_EPS) or np.any(nt < DEGENERACY_EPS):
        raise DegenerateInputError("zero-length vector in input set")
    # Unit-normalize so the rank test is scale independent.
    h = (s / ns[:, None]).T @ (t / nt[:, None])
    u, sing, vt = np.linalg.svd(h)
    if sing[1] <= DEGENERACY_EPS * max(sing[0], 1.0):
        raise DegenerateInputError("vector set is collinear; rotation is not unique")
    d = np.sign(np.linalg.det(vt.T @ u.T))
    r = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    return r


def line_closest_midpoint(p1, d1, p2, d2) -> np.ndarray:
    """Point halfway between the closest points of two lines.

    For intersecting lines this is the intersection point; for skew lines
    it is the midpoint of the common perpendicular segment.  Symmetric in
    the two lines.

    Raises:
        ParallelLinesError: directions are parallel (normalized cross
            product below 1e-12).
        ValueError: a direction vector is zero.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    n1 = np.linalg.norm(d1)
    n2 = np.linalg.norm(d2)
    if n1 < DEGENERACY_EPS or n2 < DEGENERACY_EPS:
        raise ValueError("line direction must be nonzero")
    u1 = d1 / n1
    u2 = d2 / n2
    n = np.cross(u1, u2)
    nn = float(n @ n)
    if math.sqrt(nn) < DEGENERACY_EPS:
        raise ParallelLinesError("line directions are parallel")
    r = p2 - p1
    t1 = float(np.linalg.det(np.stack([r, u2, n]))) / nn
    t2 = float(np.linalg.det(np.stack([r, u1, n]))) / nn
    c1 = p1 + t1 * u1
    c2 = p2 + t2 * u2
    return 0.5 * (c1 + c2)
