"""Shared test utilities: small chains, independent numerical oracles."""

import importlib.resources
import json

import numpy as np

from ik_bench.chain import forward_kinematics, load_chain
from ik_bench.tasks import rcm_state


def data_path(name: str) -> str:
    return str(importlib.resources.files("ik_bench") / "data" / name)


def planar_2r_doc(l1=1.0, l2=1.0):
    """Two revolute z-joints in the xy-plane; links along x."""
    return {
        "name": "planar2r",
        "joints": [
            {"type": "revolute", "axis": [0, 0, 1], "origin_xyz": [0, 0, 0],
             "limit_lower": -3.2, "limit_upper": 3.2},
            {"type": "revolute", "axis": [0, 0, 1], "origin_xyz": [l1, 0, 0],
             "limit_lower": -3.2, "limit_upper": 3.2},
        ],
        "frames": {
            "ee": {"parent": 1, "origin_xyz": [l2, 0, 0]},
            "rcm_pre": {"parent": 0, "origin_xyz": [0.5 * l1, 0, 0]},
            "rcm_post": {"parent": 1, "origin_xyz": [0.5 * l2, 0, 0]},
        },
    }


def make_planar_2r(l1=1.0, l2=1.0):
    return load_chain(json.dumps(planar_2r_doc(l1, l2)))


def random_interior_q(chain, rng, margin=0.3):
    lo = chain.lower_limits + margin
    hi = chain.upper_limits - margin
    return lo + (hi - lo) * rng.random(chain.dof)


def fd_frame_position_jacobian(chain, q, frame, h=1e-6):
    """Central-difference position Jacobian, independent of the analytic path."""
    n = chain.dof
    J = np.zeros((3, n))
    for i in range(n):
        qp = np.array(q, dtype=float)
        qm = np.array(q, dtype=float)
        qp[i] += h
        qm[i] -= h
        pp = forward_kinematics(chain, qp, frame).translation
        pm = forward_kinematics(chain, qm, frame).translation
        J[:, i] = (pp - pm) / (2.0 * h)
    return J


def fd_full_jacobian(chain, q, frame, h=1e-6):
    """Central differences of position and of the rotation (via R' R^T vee)."""
    n = chain.dof
    J = np.zeros((6, n))
    for i in range(n):
        qp = np.array(q, dtype=float)
        qm = np.array(q, dtype=float)
        qp[i] += h
        qm[i] -= h
        Tp = forward_kinematics(chain, qp, frame)
        Tm = forward_kinematics(chain, qm, frame)
        J[:3, i] = (Tp.translation - Tm.translation) / (2.0 * h)
        dR = (Tp.rotation - Tm.rotation) / (2.0 * h) @ forward_kinematics(
            chain, q, frame
        ).rotation.T
        J[3:, i] = np.array([dR[2, 1], dR[0, 2], dR[1, 0]])
    return J


def fd_rcm_point_jacobian(chain, q, p_trocar, h=1e-6):
    """Central differences of the closest shaft point to the trocar."""
    n = chain.dof
    J = np.zeros((3, n))
    for i in range(n):
        qp = np.array(q, dtype=float)
        qm = np.array(q, dtype=float)
        qp[i] += h
        qm[i] -= h
        J[:, i] = (
            rcm_state(chain, qp, p_trocar).p_rcm - rcm_state(chain, qm, p_trocar).p_rcm
        ) / (2.0 * h)
    return J


def grid_box_qp_oracle(Q, p, lo, hi, points=15, rounds=14, window=3):
    """Nested grid search for min 1/2 x'Qx + p'x over a box.

    Brute force plus refinement: evaluates the objective on a full grid,
    zooms a `window`-cell neighborhood of the argmin, repeats. Instances
    are kept moderately conditioned so the argmin cell always brackets the
    true minimizer.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    n = len(lo)
    box_lo, box_hi = lo.copy(), hi.copy()
    best = None
    for _ in range(rounds):
        axes = [np.linspace(lo[i], hi[i], points) for i in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        X = np.stack([m.ravel() for m in mesh], axis=1)
        vals = 0.5 * np.einsum("ij,jk,ik->i", X, Q, X) + X @ p
        best = X[np.argmin(vals)]
        span = (hi - lo) / (points - 1)
        lo = np.maximum(best - window * span, box_lo)
        hi = np.minimum(best + window * span, box_hi)
    return best


def random_feasible_qp(rng, n_max=8, m_max=None, strong=0.1):
    """Strictly convex QP with inequalities satisfiable by construction."""
    n = int(rng.integers(2, n_max + 1))
    L = rng.normal(size=(n, n))
    Q = L @ L.T + strong * np.eye(n)
    p = rng.normal(size=n)
    m = int(rng.integers(0, (m_max or 2 * n) + 1))
    C = rng.normal(size=(m, n))
    x0 = rng.normal(size=n)
    d = C @ x0 + rng.uniform(0.01, 1.0, size=m)
    return Q, p, C, d
