"""Hierarchical QP cascade.

Priority levels are solved in sequence. Each level is assembled into one
strictly convex QP over [qdot_new; slacks]; lower levels act through the
null-space projector of all higher-level task rows and compose affinely,
    qdot_total = qdot_higher + N @ qdot_new,
so higher-level task values are untouched by construction. Inequality rows
of higher levels are re-imposed verbatim, relaxed by their frozen optimal
slacks, which keeps every level's QP feasible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import KinematicChain
from .errors import SolverError, ValidationError
from .liegroup import Transform
from .qp import QpProblem, QpResult, QpSolver
from .tasks import (
    EqualityTask,
    InequalityConstraint,
    ee_pose_task,
    joint_limit_constraint,
    manipulability_task,
    rcm_task,
)

# Relative singular-value cutoff when building null-space projectors.
RANK_TOL = 1e-8


@dataclass(frozen=True)
class PriorityLevel:
    """Tasks and constraints sharing one hierarchy rank."""

    tasks: tuple[EqualityTask, ...]
    constraints: tuple[InequalityConstraint, ...]
    damping: float
    slack_weight: float

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.tasks and not self.constraints:
            raise ValueError("priority level must hold at least one task or constraint")
        if not (self.damping > 0.0 and self.slack_weight > 0.0):
            raise ValueError("damping and slack weights must be strictly positive")
        widths = {t.A.shape[1] for t in self.tasks}
        widths |= {c.C.shape[1] for c in self.constraints}
        if len(widths) != 1:
            raise ValueError("all task and constraint matrices must share column count")

    @property
    def n_q(self) -> int:
        if self.tasks:
            return self.tasks[0].A.shape[1]
        return self.constraints[0].C.shape[1]

    @property
    def n_slack(self) -> int:
        return sum(c.C.shape[0] for c in self.constraints)


@dataclass
class SolverStats:
    iterations_per_level: list[int] = field(default_factory=list)
    solve_time: float = 0.0

    @property
    def iterations(self) -> int:
        return sum(self.iterations_per_level)


@dataclass
class HierarchySolution:
    qdot: np.ndarray
    slacks_per_level: list[np.ndarray]
    level_residuals: list[list[float]]
    solver_stats: SolverStats


def null_space_projector(A_active: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """N = I - pinv(A) A via SVD; singular values below tol * s_max are rank-null.

    N is symmetric, idempotent and satisfies A @ N = 0 for the retained rank.
    """
    A_active = np.atleast_2d(np.asarray(A_active, dtype=float))
    n = A_active.shape[1]
    _, s, vt = np.linalg.svd(A_active, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(n)
    rank = int(np.sum(s > tol * s[0]))
    v_range = vt[:rank]
    return np.eye(n) - v_range.T @ v_range


def assemble_level(
    level: PriorityLevel,
    projector: np.ndarray | None = None,
    offset: np.ndarray | None = None,
    inherited: tuple = (),
) -> QpProblem:
    """Build the level's QP over x = [qdot_new; w].

    Tasks and constraints are composed with (projector @ qdot_new + offset).
    `inherited` carries (C, d, w_star) triples of all higher levels, whose
    rows are re-imposed relaxed by the frozen optimal slacks. At the top
    level (projector = I, offset = 0, nothing inherited) this reproduces
    the plain soft-weighted problem.
    """
    n = level.n_q
    N = np.eye(n) if projector is None else np.asarray(projector, dtype=float)
    off = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
    if N.shape != (n, n) or off.shape != (n,):
        raise ValueError("projector/offset dimensions do not match the level")

    k = level.n_slack
    nx = n + k

    # Normal-equation form of the stacked sqrt-weighted rows: task rows,
    # damping block on qdot_new, slack penalty block.
    Q = np.zeros((nx, nx))
    p = np.zeros(nx)
    for task in level.tasks:
        An = task.A @ N
        bn = task.b - task.A @ off
        Q[:n, :n] += task.weight * (An.T @ An)
        p[:n] -= task.weight * (An.T @ bn)
    Q[:n, :n] += level.damping * np.eye(n)
    row = n
    for c in level.constraints:
        rows = c.C.shape[0]
        Q[row : row + rows, row : row + rows] = c.slack_weight * np.eye(rows)
        row += rows

    ineq_rows = []
    ineq_rhs = []
    row = n
    for c in level.constraints:
        rows = c.C.shape[0]
        block = np.zeros((rows, nx))
        block[:, :n] = c.C @ N
        block[:, row : row + rows] = -np.eye(rows)
        ineq_rows.append(block)
        ineq_rhs.append(c.d - c.C @ off)
        row += rows
    for C_h, d_h, w_star in inherited:
        block = np.zeros((C_h.shape[0], nx))
        block[:, :n] = C_h @ N
        ineq_rows.append(block)
        ineq_rhs.append(d_h + w_star - C_h @ off)

    C_all = np.vstack(ineq_rows) if ineq_rows else np.zeros((0, nx))
    d_all = np.concatenate(ineq_rhs) if ineq_rhs else np.zeros(0)
    return QpProblem(Q, p, C_all, d_all)


class HierarchySolver:
    """Solves level cascades; carries per-level warm starts across calls.

    One instance is meant to be driven sequentially (e.g. along a tracked
    path); use separate instances for concurrent problems.
    """

    def __init__(self, qp_solver: QpSolver | None = None, rank_tol: float = RANK_TOL):
        self.qp = qp_solver or QpSolver()
        self.rank_tol = rank_tol
        self._warm: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def reset(self) -> None:
        self._warm.clear()

    def solve(self, levels, q=None) -> HierarchySolution:
        levels = list(levels)
        if not levels:
            raise ValueError("need at least one priority level")
        n = levels[0].n_q
        if any(level.n_q != n for level in levels):
            raise ValueError("levels disagree on joint-space dimension")
        if q is not None and np.asarray(q).shape != (n,):
            raise ValueError("q length does not match the levels")

        stats = SolverStats()
        offset = np.zeros(n)
        projector = None
        task_rows: list[np.ndarray] = []
        inherited: list[tuple] = []
        slacks: list[np.ndarray] = []

        for idx, level in enumerate(levels):
            problem = assemble_level(level, projector, offset, tuple(inherited))
            warm = self._warm.get(idx)
            if warm is not None and (
                warm[0].shape != (problem.n,) or warm[1].shape != (problem.m,)
            ):
                warm = None
            result: QpResult = self.qp.solve(problem, warm_start=warm)
            self._warm[idx] = (result.x.copy(), result.y.copy())
            stats.iterations_per_level.append(result.iterations)
            stats.solve_time += result.solve_time
            if not result.converged:
                raise SolverError(
                    f"QP at priority level {idx} hit the iteration cap "
                    f"({self.qp.max_iter}) without certificate"
                )

            v = result.x[:n]
            w = result.x[n:]
            N = np.eye(n) if projector is None else projector
            offset = offset + N @ v
            slacks.append(w.copy())

            row = 0
            for c in level.constraints:
                rows = c.C.shape[0]
                inherited.append((c.C, c.d, w[row : row + rows].copy()))
                row += rows
            task_rows.extend(t.A for t in level.tasks)
            if idx + 1 < len(levels) and task_rows:
                projector = null_space_projector(np.vstack(task_rows), self.rank_tol)

        residuals = [
            [float(np.linalg.norm(t.A @ offset - t.b)) for t in level.tasks]
            for level in levels
        ]
        return HierarchySolution(offset, slacks, residuals, stats)


def solve_hierarchy(levels, q=None, warm_start: HierarchySolver | None = None):
    """One-shot cascade solve; pass a HierarchySolver to reuse warm starts."""
    solver = warm_start or HierarchySolver()
    return solver.solve(levels, q)


@dataclass(frozen=True)
class GainSet:
    """Weights and gains of the two-level tracking problem.

    kt*: task weights, kr*: residual gains, kd*: per-level damping,
    kw*: per-level slack penalties. Index 1 belongs to the incision-point
    level, index 2 to the pose/dexterity level; kt3/kr3 parameterize the
    dexterity task. kt3 = 0 switches that task off entirely.
    """

    kt1: float = 1.0
    kt2: float = 1.0
    kt3: float = 0.01
    kr1: float = 1.0
    kr2: float = 1.0
    kr3: float = 1e-3
    kd1: float = 1e-5
    kd2: float = 1e-9
    kw1: float = 1e-5
    kw2: float = 1e-5

    def __post_init__(self):
        strictly_positive = {
            "kt1": self.kt1, "kt2": self.kt2,
            "kr1": self.kr1, "kr2": self.kr2, "kr3": self.kr3,
            "kd1": self.kd1, "kd2": self.kd2,
            "kw1": self.kw1, "kw2": self.kw2,
        }
        for name, value in strictly_positive.items():
            if not value > 0.0:
                raise ValidationError(f"gain {name} must be strictly positive")
        if self.kt3 < 0.0:
            raise ValidationError("gain kt3 must be non-negative")

    @staticmethod
    def default(high_dof_tool: bool = False) -> "GainSet":
        """Stock gains; the dexterity weight drops to 1e-3 for 12-DOF chains."""
        return GainSet(kt3=0.001 if high_dof_tool else 0.01)


def build_surgical_problem(
    chain: KinematicChain,
    q,
    desired_pose: Transform,
    p_trocar,
    gains: GainSet,
    dt: float,
    cycle_time: float,
    optimize_manipulability: bool = True,
) -> list[PriorityLevel]:
    """Compose the tracking cascade.

    Constrained mode (trocar given): level 1 holds the incision-point task
    plus joint limits; level 2 holds the pose task and, when enabled, the
    dexterity task. Unconstrained mode collapses to a single level with
    pose, optional dexterity and joint limits.
    """
    use_m_task = optimize_manipulability and gains.kt3 > 0.0
    pose = ee_pose_task(chain, q, desired_pose, gains.kt2, gains.kr2)
    lower_tasks = [pose]
    if use_m_task:
        mt = manipulability_task(chain, q, "ee", dt, gains.kt3)
        lower_tasks.append(EqualityTask(mt.A, gains.kr3 * mt.b, mt.weight))

    if p_trocar is None:
        limits = joint_limit_constraint(chain, q, cycle_time, gains.kw2)
        return [
            PriorityLevel(tuple(lower_tasks), (limits,), gains.kd2, gains.kw2)
        ]

    limits = joint_limit_constraint(chain, q, cycle_time, gains.kw1)
    level1 = PriorityLevel(
        (rcm_task(chain, q, p_trocar, gains.kt1, gains.kr1),),
        (limits,),
        gains.kd1,
        gains.kw1,
    )
    level2 = PriorityLevel(tuple(lower_tasks), (), gains.kd2, gains.kw2)
    return [level1, level2]
