"""Constrained inverse kinematics with manipulability maximization.

A hierarchical QP cascade tracks 6-DOF reference paths with a redundant
serial manipulator while pinning the tool shaft to a fixed incision point
and respecting joint limits; a benchmark harness measures how much the
dexterity-improvement task raises the manipulability index.
"""

from ._backend import HAVE_COMPILED, backend_name
from .chain import (
    Frame,
    Jacobian,
    Joint,
    KinematicChain,
    forward_kinematics,
    geometric_jacobian,
    load_chain,
    load_chain_file,
)
from .errors import ParseError, SolverError, TrackingError, ValidationError
from .hqp import (
    GainSet,
    HierarchySolution,
    HierarchySolver,
    PriorityLevel,
    assemble_level,
    build_surgical_problem,
    null_space_projector,
    solve_hierarchy,
)
from .liegroup import BranchAmbiguityError, Transform, Twist, se3_exp, se3_log
from .paths import PathSpec, helix_point, lissajous_point, path_point
from .qp import QpProblem, QpResult, QpSolver, kkt_residuals, solve_qp
from .scenario import ScenarioConfig, load_scenario
from .tasks import (
    EqualityTask,
    InequalityConstraint,
    RcmState,
    ee_pose_task,
    joint_limit_constraint,
    manipulability,
    manipulability_at,
    manipulability_gradient,
    manipulability_task,
    rcm_jacobian,
    rcm_state,
    rcm_task,
)
from .tracking import ComparisonSummary, TrackingReport, compare_runs, run_tracking

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
