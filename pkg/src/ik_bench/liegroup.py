"""Rotation and rigid-transform helpers: SO(3)/SE(3) exp and log maps.

Twist convention used across the whole package: 6-vectors are ordered
(linear, angular). Angular coordinates are rotation-vector (angle * axis).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Below this rotation angle the closed-form log/exp coefficients are
# replaced by their series expansions to avoid 0/0.
SMALL_ANGLE = 1e-8
# Series kick in earlier for the second-order coefficients, where the
# closed forms lose digits well before SMALL_ANGLE.
_SERIES_ANGLE = 1e-4


class BranchAmbiguityError(ValueError):
    """Rotation angle at or near pi: the principal log branch is undefined."""


def skew(v: np.ndarray) -> np.ndarray:
    """3x3 cross-product matrix of a 3-vector."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def rpy_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Rotation matrix from fixed-axis roll/pitch/yaw (Rz @ Ry @ Rx)."""
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    return rz @ ry @ rx


def rot_log(rotation: np.ndarray) -> np.ndarray:
    """Rotation vector (angle * unit axis) of a rotation matrix.

    Raises BranchAmbiguityError for angles at or beyond pi - 1e-6, where
    the principal branch is not well defined.
    """
    w = 0.5 * np.array(
        [
            rotation[2, 1] - rotation[1, 2],
            rotation[0, 2] - rotation[2, 0],
            rotation[1, 0] - rotation[0, 1],
        ]
    )
    s = np.linalg.norm(w)
    c = 0.5 * (np.trace(rotation) - 1.0)
    angle = np.arctan2(s, c)
    if angle >= np.pi - 1e-6:
        raise BranchAmbiguityError(f"rotation angle {angle:.9f} too close to pi")
    if angle < SMALL_ANGLE:
        return w
    return (angle / s) * w


def rot_exp(omega: np.ndarray) -> np.ndarray:
    """Rotation matrix of a rotation vector (Rodrigues formula)."""
    theta = np.linalg.norm(omega)
    k = skew(omega)
    if theta < _SERIES_ANGLE:
        t2 = theta * theta
        a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0
        b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * k + b * (k @ k)


@dataclass(frozen=True)
class Transform:
    """Rigid transform: 3x3 rotation matrix plus translation in meters."""

    rotation: np.ndarray
    translation: np.ndarray

    @staticmethod
    def identity() -> "Transform":
        return Transform(np.eye(3), np.zeros(3))

    @staticmethod
    def from_xyz_rpy(xyz, rpy) -> "Transform":
        return Transform(rpy_matrix(*rpy), np.asarray(xyz, dtype=float))

    def compose(self, other: "Transform") -> "Transform":
        return Transform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "Transform":
        rt = self.rotation.T
        return Transform(rt, -(rt @ self.translation))

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def validate(self, tol: float = 1e-10) -> None:
        """Check orthonormality and det(R) = +1; raise ValueError otherwise."""
        r = self.rotation
        if r.shape != (3, 3) or self.translation.shape != (3,):
            raise ValueError("transform shape must be 3x3 rotation + 3-vector")
        if not np.all(np.isfinite(r)) or not np.all(np.isfinite(self.translation)):
            raise ValueError("transform entries must be finite")
        if np.max(np.abs(r.T @ r - np.eye(3))) > tol:
            raise ValueError("rotation matrix is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > tol:
            raise ValueError("rotation matrix determinant is not +1")


@dataclass(frozen=True)
class Twist:
    """6-vector se(3) element, (linear, angular) ordering."""

    linear: np.ndarray
    angular: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])

    @staticmethod
    def from_vector(xi: np.ndarray) -> "Twist":
        xi = np.asarray(xi, dtype=float)
        return Twist(xi[:3].copy(), xi[3:].copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_vector()))


def se3_log(pose: Transform) -> Twist:
    """Principal logarithm of a rigid transform.

    Returns the twist xi with se3_exp(xi) == pose. The rotation angle must
    stay below pi - 1e-6 (BranchAmbiguityError otherwise); below the
    small-angle threshold a series expansion avoids 0/0.
    """
    omega = rot_log(pose.rotation)
    theta = np.linalg.norm(omega)
    k = skew(omega)
    if theta < _SERIES_ANGLE:
        t2 = theta * theta
        c2 = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    else:
        c2 = (1.0 - 0.5 * theta * np.sin(theta) / (1.0 - np.cos(theta))) / (
            theta * theta
        )
    v_inv = np.eye(3) - 0.5 * k + c2 * (k @ k)
    return Twist(v_inv @ pose.translation, omega)


def se3_exp(twist: Twist) -> Transform:
    """Exponential of a twist; inverse of se3_log on the principal branch."""
    omega = twist.angular
    theta = np.linalg.norm(omega)
    k = skew(omega)
    if theta < _SERIES_ANGLE:
        t2 = theta * theta
        b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0
        c = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
    else:
        b = (1.0 - np.cos(theta)) / (theta * theta)
        c = (theta - np.sin(theta)) / (theta * theta * theta)
    v = np.eye(3) + b * k + c * (k @ k)
    return Transform(rot_exp(omega), v @ twist.linear)
