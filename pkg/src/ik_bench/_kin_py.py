"""Pure-numpy kinematics kernels.

Mirror of the compiled module `_kin_cy`; both operate on the packed chain
arrays produced by `chain.KinematicChain` (joint types, local axes, fixed
per-joint transforms). Joint type codes: 0 = revolute, 1 = prismatic.
"""

from __future__ import annotations

import numpy as np

REVOLUTE = 0
PRISMATIC = 1


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    # Rodrigues about a unit axis.
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def sweep(jt, ax, fr, ft, q):
    """Walk the chain once.

    Returns (R, p, origins, axes): cumulative rotation/position after each
    joint's motion, plus each joint's world origin and world axis.
    """
    n = len(jt)
    R = np.empty((n, 3, 3))
    p = np.empty((n, 3))
    origins = np.empty((n, 3))
    axes = np.empty((n, 3))
    rot = np.eye(3)
    pos = np.zeros(3)
    for i in range(n):
        pos = rot @ ft[i] + pos
        rot = rot @ fr[i]
        origins[i] = pos
        z = rot @ ax[i]
        axes[i] = z
        if jt[i] == REVOLUTE:
            rot = rot @ _axis_rotation(ax[i], q[i])
        else:
            pos = pos + q[i] * z
        R[i] = rot
        p[i] = pos
    return R, p, origins, axes


def frame_pose(jt, ax, fr, ft, q, parent, frot, ftrans):
    """World pose (rotation, position) of a frame offset from joint `parent`."""
    if parent < 0:
        rot = np.eye(3)
        pos = np.zeros(3)
    else:
        R, p, _, _ = sweep(jt[: parent + 1], ax, fr, ft, q)
        rot, pos = R[parent], p[parent]
    return rot @ frot, rot @ ftrans + pos


def jacobian(jt, ax, fr, ft, q, parent, frot, ftrans):
    """6 x n geometric Jacobian at the frame origin.

    Linear rows are the velocity of the frame origin, angular rows are in
    base coordinates; columns of joints distal to the frame are zero.
    """
    n = len(jt)
    J = np.zeros((6, n))
    if parent < 0:
        return J
    R, p, origins, axes = sweep(jt, ax, fr, ft, q)
    pf = R[parent] @ ftrans + p[parent]
    for i in range(parent + 1):
        z = axes[i]
        if jt[i] == REVOLUTE:
            J[:3, i] = np.cross(z, pf - origins[i])
            J[3:, i] = z
        else:
            J[:3, i] = z
    return J


def manip_value(jt, ax, fr, ft, q, parent, frot, ftrans, rows):
    """sqrt(det(J J^T)) over the selected Jacobian rows; 0 when det <= 0."""
    J = jacobian(jt, ax, fr, ft, q, parent, frot, ftrans)
    Jr = J[rows]
    d = np.linalg.det(Jr @ Jr.T)
    return float(np.sqrt(d)) if d > 0.0 else 0.0


def manip_gradient(jt, ax, fr, ft, q, parent, frot, ftrans, h, rows):
    """Central-difference gradient of `manip_value` over each joint."""
    n = len(jt)
    grad = np.empty(n)
    qw = np.array(q, dtype=float)
    for i in range(n):
        qi = qw[i]
        qw[i] = qi + h
        m_plus = manip_value(jt, ax, fr, ft, qw, parent, frot, ftrans, rows)
        qw[i] = qi - h
        m_minus = manip_value(jt, ax, fr, ft, qw, parent, frot, ftrans, rows)
        qw[i] = qi
        grad[i] = (m_plus - m_minus) / (2.0 * h)
    return grad
