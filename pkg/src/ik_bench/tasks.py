"""Velocity-level task and constraint construction.

Every task is an (A, b, weight) triple to be read as "prefer A @ qdot = b
with weight K_t"; every inequality is (C, d, slack weight) read as
"C @ qdot - d <= w". The cascade solver consumes these without knowing
what they mean kinematically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kin
from .chain import KinematicChain, Jacobian, forward_kinematics, geometric_jacobian
from .liegroup import Transform, se3_log

FULL_ROWS = np.arange(6)
POSITION_ROWS = np.arange(3)

# Central-difference step for the manipulability gradient; balances
# truncation against round-off for float64 and passes the step-refinement
# oracle in the test suite.
DEFAULT_GRADIENT_STEP = 1e-6


@dataclass(frozen=True)
class EqualityTask:
    """Weighted least-squares row block: minimize weight * ||A qdot - b||^2."""

    A: np.ndarray
    b: np.ndarray
    weight: float

    def __post_init__(self):
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValueError("task entries must be finite")
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError("task row count must match residual length")
        if not self.weight > 0.0:
            raise ValueError("task weight must be positive")


@dataclass(frozen=True)
class InequalityConstraint:
    """Slack-relaxed inequality block: C qdot - d <= w, penalty K_w ||w||^2."""

    C: np.ndarray
    d: np.ndarray
    slack_weight: float

    def __post_init__(self):
        if not (np.all(np.isfinite(self.C)) and np.all(np.isfinite(self.d))):
            raise ValueError("constraint entries must be finite")
        if self.C.shape[0] != self.d.shape[0]:
            raise ValueError("constraint row count must match bound length")
        if not self.slack_weight > 0.0:
            raise ValueError("slack weight must be positive")


@dataclass(frozen=True)
class RcmState:
    """Geometry of the tool shaft relative to the fixed incision point.

    p_rcm is the point of the (infinite) shaft line closest to the trocar;
    residual_vec = p_trocar - p_rcm is perpendicular to the shaft.
    """

    p_trocar: np.ndarray
    p_pre: np.ndarray
    p_post: np.ndarray
    p_rcm: np.ndarray
    residual_vec: np.ndarray

    @property
    def error(self) -> float:
        """Distance from the trocar to the shaft line, in meters."""
        return float(np.linalg.norm(self.residual_vec))

    @property
    def shaft_direction(self) -> np.ndarray:
        s = self.p_post - self.p_pre
        return s / np.linalg.norm(s)


def pose_residual(chain: KinematicChain, q, desired_pose: Transform) -> np.ndarray:
    """Base-frame 6-vector error twist between the actual and desired ee pose.

    Computed as the log of the relative pose, rotated into base coordinates
    so it pairs with the geometric Jacobian: qdot with J @ qdot equal to
    this vector reduces the pose error to first order.
    """
    actual = forward_kinematics(chain, q, "ee")
    xi = se3_log(actual.inverse().compose(desired_pose))
    return np.concatenate([actual.rotation @ xi.linear, actual.rotation @ xi.angular])


def pose_error_norm(chain: KinematicChain, q, desired_pose: Transform) -> float:
    """Norm of the log-twist pose error (dimensionless mix of m and rad)."""
    actual = forward_kinematics(chain, q, "ee")
    return se3_log(actual.inverse().compose(desired_pose)).norm()


def ee_pose_task(
    chain: KinematicChain, q, desired_pose: Transform, K_t: float, K_r: float
) -> EqualityTask:
    """Pose-tracking task: full geometric Jacobian against the gained error twist."""
    J = geometric_jacobian(chain, q, "ee")
    return EqualityTask(J.matrix, K_r * pose_residual(chain, q, desired_pose), K_t)


def rcm_state(chain: KinematicChain, q, p_trocar) -> RcmState:
    """Project the trocar onto the current shaft line."""
    p_trocar = np.asarray(p_trocar, dtype=float)
    p_pre = forward_kinematics(chain, q, "rcm_pre").translation
    p_post = forward_kinematics(chain, q, "rcm_post").translation
    shaft = p_post - p_pre
    length = np.linalg.norm(shaft)
    if length <= 1e-9:
        raise ValueError("degenerate tool shaft: rcm_pre and rcm_post coincide")
    u = shaft / length
    p_rcm = p_pre + np.dot(p_trocar - p_pre, u) * u
    return RcmState(p_trocar, p_pre, p_post, p_rcm, p_trocar - p_rcm)


def rcm_jacobian(chain: KinematicChain, q, p_trocar) -> np.ndarray:
    """3 x n_q derivative of the shaft point closest to the trocar."""
    state = rcm_state(chain, q, p_trocar)
    J_pre = geometric_jacobian(chain, q, "rcm_pre", position_only=True).matrix
    J_post = geometric_jacobian(chain, q, "rcm_post", position_only=True).matrix
    u = state.shaft_direction
    proj = np.eye(3) - np.outer(u, u)
    length = np.linalg.norm(state.p_post - state.p_pre)
    du_dq = proj @ (J_post - J_pre) / length
    p_r = state.p_trocar - state.p_pre
    return proj @ J_pre + (np.outer(u, p_r) + np.dot(p_r, u) * np.eye(3)) @ du_dq


def rcm_task(
    chain: KinematicChain, q, p_trocar, K_t: float, K_r: float
) -> EqualityTask:
    """Incision-point task: drive the closest shaft point onto the trocar."""
    state = rcm_state(chain, q, p_trocar)
    return EqualityTask(rcm_jacobian(chain, q, p_trocar), K_r * state.residual_vec, K_t)


def manipulability(J) -> float:
    """sqrt(det(J J^T)) of a Jacobian; clamped to 0 when det is not positive."""
    matrix = J.matrix if isinstance(J, Jacobian) else np.asarray(J, dtype=float)
    d = np.linalg.det(matrix @ matrix.T)
    return float(np.sqrt(d)) if d > 0.0 else 0.0


def _row_index(rows) -> np.ndarray:
    if rows is None:
        return FULL_ROWS
    return np.asarray(rows, dtype=np.intp)


def manipulability_at(chain: KinematicChain, q, frame: str, rows=None) -> float:
    """Manipulability of the chain at q, over selected Jacobian rows."""
    q = chain.check_q(q)
    parent, frot, ftrans = chain.frame_args(frame)
    return kin().manip_value(
        *chain.kernel_args(), q, parent, frot, ftrans, _row_index(rows)
    )


def manipulability_gradient(
    chain: KinematicChain,
    q,
    frame: str,
    h: float = DEFAULT_GRADIENT_STEP,
    rows=None,
) -> np.ndarray:
    """Central-difference gradient of the manipulability over each joint.

    Values are returned as computed even near singular sets, where the
    square root can make them large; callers report such configurations.
    """
    if not h > 0.0:
        raise ValueError("step must be positive")
    q = chain.check_q(q)
    parent, frot, ftrans = chain.frame_args(frame)
    return kin().manip_gradient(
        *chain.kernel_args(), q, parent, frot, ftrans, h, _row_index(rows)
    )


def manipulability_task(
    chain: KinematicChain, q, frame: str, dt: float, K_t: float, rows=None
) -> EqualityTask:
    """Dexterity-improvement task, one row: dt * grad(m)^T qdot toward m.

    The residual is the raw current manipulability; callers scale it by
    their residual gain. Least-squares minimization biases qdot along the
    gradient without needing second derivatives.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    grad = manipulability_gradient(chain, q, frame, rows=rows)
    m = manipulability_at(chain, q, frame, rows=rows)
    return EqualityTask(dt * grad[None, :], np.array([m]), K_t)


def joint_limit_constraint(
    chain: KinematicChain, q, cycle_time: float, K_w: float
) -> InequalityConstraint:
    """Velocity bounds that keep q + cycle_time * qdot inside the joint limits."""
    if not cycle_time > 0.0:
        raise ValueError("cycle_time must be positive")
    q = chain.check_q(q)
    n = chain.dof
    C = np.vstack([np.eye(n), -np.eye(n)])
    d = np.concatenate(
        [
            (chain.upper_limits - q) / cycle_time,
            -(chain.lower_limits - q) / cycle_time,
        ]
    )
    return InequalityConstraint(C, d, K_w)
