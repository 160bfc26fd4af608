"""Pinhole projection geometry: value types, intrinsics, extrinsics, homographies.

Conventions used throughout the package:

* The world-to-camera map is ``P_c = R^-1 (P_w - t)``, so ``t`` is the camera
  center in world coordinates and ``R`` columns are the camera axes expressed
  in the world frame.
* Rotations are stored as axis-angle 3-vectors (Rodrigues), valid for
  ``norm(w) < pi``.
* The intrinsic matrix is upper triangular with entries
  ``[[alpha, gamma, u0], [0, beta, v0], [0, 0, 1]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class DepthNotPositive(ValueError):
    """Point has non-positive depth in the camera frame; cannot project."""


class NotARotation(ValueError):
    """Matrix is not a rotation within tolerance."""


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def _frozen_array(obj, name: str, value, shape: tuple[int, ...]) -> None:
    arr = np.asarray(value, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    object.__setattr__(obj, name, arr)


@dataclass(frozen=True)
class WorldPoint:
    """3-D point in the world frame (calibration targets live on z = 0)."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self) -> None:
        if not _finite(self.x, self.y, self.z):
            raise ValueError("world point components must be finite")

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class CameraPoint:
    """3-D point in the camera frame; z is the depth used for projection."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not _finite(self.x, self.y, self.z):
            raise ValueError("camera point components must be finite")

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class NormalizedPoint:
    """Point on the unit focal plane (intrinsics removed).

    Both undistorted and distorted coordinates live in this type; the radius
    is always derived from the current components.
    """

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("normalized point components must be finite")

    @property
    def radius(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class PixelPoint:
    """Image-plane point in pixels.

    Deliberately not clamped to any sensor bounds: residual arithmetic needs
    out-of-frame values.
    """

    u: float
    v: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError("pixel components must be finite")


@dataclass(frozen=True)
class IntrinsicMatrix:
    """The five intrinsic parameters of the upper-triangular camera matrix."""

    alpha: float
    beta: float
    gamma: float
    u0: float
    v0: float

    def __post_init__(self) -> None:
        if not _finite(self.alpha, self.beta, self.gamma, self.u0, self.v0):
            raise ValueError("intrinsic parameters must be finite")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("focal scales alpha and beta must be positive")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.alpha, self.gamma, self.u0],
                [0.0, self.beta, self.v0],
                [0.0, 0.0, 1.0],
            ]
        )

    @property
    def inverse_matrix(self) -> np.ndarray:
        a, b, g, u0, v0 = self.alpha, self.beta, self.gamma, self.u0, self.v0
        return np.array(
            [
                [1.0 / a, -g / (a * b), (g * v0 - b * u0) / (a * b)],
                [0.0, 1.0 / b, -v0 / b],
                [0.0, 0.0, 1.0],
            ]
        )


def rotation_from_axis_angle(w: np.ndarray) -> np.ndarray:
    """Rodrigues formula: axis-angle 3-vector to rotation matrix."""
    w = np.asarray(w, dtype=float)
    if w.shape != (3,):
        raise ValueError("axis-angle vector must have shape (3,)")
    theta = float(np.linalg.norm(w))
    K = np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )
    if theta < 1e-8:
        # Second-order series keeps the result orthogonal to machine precision.
        a = 1.0 - theta * theta / 6.0
        b = 0.5 - theta * theta / 24.0
    else:
        a = math.sin(theta) / theta
        b = (1.0 - math.cos(theta)) / (theta * theta)
    return np.eye(3) + a * K + b * (K @ K)


def axis_angle_from_rotation(R: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Inverse Rodrigues map on the domain ``norm(w) < pi``.

    Raises NotARotation when ``R^T R`` deviates from the identity beyond
    ``tol`` or the determinant is not +1.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError("rotation matrix must be 3x3")
    if np.max(np.abs(R.T @ R - np.eye(3))) > tol:
        raise NotARotation("R^T R deviates from the identity beyond tolerance")
    if np.linalg.det(R) < 0.0:
        raise NotARotation("determinant is negative (improper rotation)")

    # 2 s = vee(R - R^T) = 2 sin(theta) * axis, cos(theta) from the trace.
    s = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    c = 0.5 * (np.trace(R) - 1.0)
    sin_norm = float(np.linalg.norm(s))
    theta = math.atan2(sin_norm, c)

    if theta < 1e-7:
        # w ~ s * (1 + theta^2 / 6); s itself is axis * sin(theta).
        return s * (1.0 + theta * theta / 6.0)
    if theta > math.pi - 1e-3:
        # sin(theta) ~ 0: recover the axis from the symmetric part instead.
        S = (R + R.T) / 2.0
        axis_sq = np.clip((np.diag(S) - c) / (1.0 - c), 0.0, None)
        axis = np.sqrt(axis_sq)
        # Fix signs using the off-diagonal products and the (small) skew part.
        k = int(np.argmax(axis))
        if axis[k] > 0.0:
            signs = np.ones(3)
            for j in range(3):
                if j != k:
                    val = S[k, j] / (1.0 - c)
                    signs[j] = 1.0 if val >= 0.0 else -1.0
            axis = axis * signs
            if np.dot(axis, s) < 0.0:
                axis = -axis
            axis /= np.linalg.norm(axis)
        return theta * axis
    return s * (theta / sin_norm)


@dataclass(frozen=True)
class ViewExtrinsics:
    """Camera pose for one view: axis-angle rotation plus camera center.

    ``rotation`` maps camera-frame directions into the world frame and the
    stored ``t`` is the camera center, so ``P_c = rotation.T @ (P_w - t)``.
    """

    axis_angle: np.ndarray
    t: np.ndarray

    def __post_init__(self) -> None:
        _frozen_array(self, "axis_angle", self.axis_angle, (3,))
        _frozen_array(self, "t", self.t, (3,))

    @cached_property
    def rotation(self) -> np.ndarray:
        R = rotation_from_axis_angle(self.axis_angle)
        R.setflags(write=False)
        return R

    @classmethod
    def from_rotation(cls, R: np.ndarray, t: np.ndarray) -> "ViewExtrinsics":
        return cls(axis_angle_from_rotation(R), np.asarray(t, dtype=float))

    @classmethod
    def from_world_to_camera(cls, R: np.ndarray, t: np.ndarray) -> "ViewExtrinsics":
        """Build from the ``P_c = R P_w + t`` form used by projection algebra."""
        R = np.asarray(R, dtype=float)
        t = np.asarray(t, dtype=float)
        return cls.from_rotation(R.T, -R.T @ t)

    def world_to_camera(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(R, t)`` such that ``P_c = R P_w + t``."""
        R = self.rotation
        return R.T.copy(), -R.T @ self.t

    def transform_to_camera(self, p: WorldPoint) -> CameraPoint:
        v = self.rotation.T @ (p.array - self.t)
        return CameraPoint(float(v[0]), float(v[1]), float(v[2]))


@dataclass(frozen=True)
class Homography:
    """3x3 plane-to-image map, canonicalized to unit Frobenius norm.

    The sign is fixed by requiring a positive bottom-right entry, so equal
    up-to-scale inputs produce identical stored matrices.
    """

    matrix: np.ndarray = field()

    def __post_init__(self) -> None:
        H = np.asarray(self.matrix, dtype=float)
        if H.shape != (3, 3):
            raise ValueError("homography must be 3x3")
        if not np.all(np.isfinite(H)):
            raise ValueError("homography entries must be finite")
        norm = np.linalg.norm(H)
        if norm == 0.0 or np.linalg.matrix_rank(H) < 3:
            raise ValueError("homography must have rank 3")
        H = H / norm
        anchor = H[2, 2]
        if anchor == 0.0:
            flat = H.ravel()
            anchor = flat[np.argmax(np.abs(flat))]
        if anchor < 0.0:
            H = -H
        H.setflags(write=False)
        object.__setattr__(self, "matrix", H)

    def apply(self, x: float, y: float) -> tuple[float, float]:
        q = self.matrix @ np.array([x, y, 1.0])
        return float(q[0] / q[2]), float(q[1] / q[2])


@dataclass(frozen=True)
class AbsoluteConic:
    """Symmetric matrix ``B = A^-T A^-1`` whose entries encode the intrinsics."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        B = np.asarray(self.matrix, dtype=float)
        if B.shape != (3, 3):
            raise ValueError("conic matrix must be 3x3")
        if np.max(np.abs(B - B.T)) > 1e-12 * max(1.0, float(np.max(np.abs(B)))):
            raise ValueError("conic matrix must be symmetric")
        B = (B + B.T) / 2.0
        B.setflags(write=False)
        object.__setattr__(self, "matrix", B)

    @classmethod
    def from_intrinsics(cls, A: IntrinsicMatrix) -> "AbsoluteConic":
        G = A.inverse_matrix
        return cls(G.T @ G)


def to_pixel(n: NormalizedPoint, A: IntrinsicMatrix) -> PixelPoint:
    """Apply the intrinsic matrix: ``u = alpha x + gamma y + u0``, ``v = beta y + v0``."""
    return PixelPoint(
        A.alpha * n.x + A.gamma * n.y + A.u0,
        A.beta * n.y + A.v0,
    )


def to_normalized(p: PixelPoint, A: IntrinsicMatrix) -> NormalizedPoint:
    """Remove the intrinsics by the explicit upper-triangular inverse.

    Grouped about the principal point so (u0, v0) maps to exactly (0, 0).
    """
    a, b, g = A.alpha, A.beta, A.gamma
    du = p.u - A.u0
    dv = p.v - A.v0
    return NormalizedPoint(du / a - g * dv / (a * b), dv / b)


def normalize_world(P: WorldPoint, E: ViewExtrinsics) -> NormalizedPoint:
    """Map a world point to the unit focal plane under a view's pose."""
    c = E.transform_to_camera(P)
    if c.z <= 0.0:
        raise DepthNotPositive(f"point has camera depth {c.z}; must be positive")
    return NormalizedPoint(c.x / c.z, c.y / c.z)


def project(P: WorldPoint, E: ViewExtrinsics, A: IntrinsicMatrix) -> PixelPoint:
    """Undistorted pinhole projection of a world point.

    Raises DepthNotPositive when the point is behind (or on) the camera plane.
    """
    return to_pixel(normalize_world(P, E), A)
