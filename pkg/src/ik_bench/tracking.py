"""Closed-loop path tracking and the on/off comparison report."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import TrackingError, ValidationError
from .hqp import HierarchySolver, build_surgical_problem
from .paths import path_point
from .scenario import RCM_DIVERGENCE_LIMIT, ScenarioConfig
from .tasks import manipulability_at, pose_error_norm, rcm_state

# Threshold above which a gradient is considered numerically suspect
# (square-root kink near singular sets) and flagged in the report.
GRADIENT_FLAG_NORM = 1e6

# Rank cutoff for the cascade's null-space projectors during tracking.
# The incision task carries a spurious third singular direction whose
# magnitude scales with the residual itself (shaft sliding through the
# trocar); it must not be frozen, or the pose level stalls. 5e-3 sits far
# below the task's structural singular values (O(1) relative) and far
# above the residual-induced noise at the divergence abort bound.
CASCADE_RANK_TOL = 5e-3

SERIES_COLUMNS = ("step", "t", "m", "e_rcm_norm", "e_ee_norm", "solve_time_s")


@dataclass
class TrackingReport:
    scenario: dict
    optimize_manipulability: bool
    series: dict
    aggregates: dict
    warnings: list = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.series["step"])


def compute_aggregates(series: dict) -> dict:
    """Aggregate metrics over the recorded series; pure arithmetic, no state."""
    return {
        "steps": len(series["step"]),
        "avg_manipulability": float(np.mean(np.asarray(series["m"]))),
        "max_manipulability": float(np.max(np.asarray(series["m"]))),
        "avg_rcm_error_m": float(np.mean(np.asarray(series["e_rcm_norm"]))),
        "avg_pose_error": float(np.mean(np.asarray(series["e_ee_norm"]))),
        "mean_solve_time_s": float(np.mean(np.asarray(series["solve_time_s"]))),
        "max_solve_time_s": float(np.max(np.asarray(series["solve_time_s"]))),
    }


def run_tracking(config: ScenarioConfig) -> TrackingReport:
    """Track the scenario's reference path step by step.

    Per step: build the cascade at the current q, solve it, integrate
    q += dt * qdot (explicit Euler), then record the metrics at the state
    reached for that waypoint. Constrained runs abort when the shaft
    leaves the trocar by more than the divergence limit.
    """
    chain = config.chain
    q = np.array(config.initial_q, dtype=float)
    trocar = config.trocar
    if trocar is not None:
        start_error = rcm_state(chain, q, trocar).error
        if start_error >= RCM_DIVERGENCE_LIMIT:
            raise ValidationError(
                f"initial shaft misses the trocar by {start_error * 1e3:.2f} mm"
            )

    solver = HierarchySolver(rank_tol=CASCADE_RANK_TOL)
    times = config.path.times()
    n_steps = len(times)
    series = {name: [] for name in SERIES_COLUMNS}
    series["q"] = []
    warnings: list = []

    for k in range(n_steps):
        t_k = float(times[k])
        desired = path_point(t_k, config.path)
        wall = time.perf_counter() if config.record_timing else 0.0
        try:
            levels = build_surgical_problem(
                chain, q, desired, trocar, config.gains,
                config.dt, config.cycle_time, config.optimize_manipulability,
            )
            solution = solver.solve(levels, q)
        except Exception as exc:
            raise TrackingError(f"solver failed: {exc}", step=k) from exc
        solve_time = time.perf_counter() - wall if config.record_timing else 0.0

        if config.optimize_manipulability and config.gains.kt3 > 0.0:
            grad_norm = float(np.linalg.norm(levels[-1].tasks[-1].A)) / config.dt
            if grad_norm > GRADIENT_FLAG_NORM:
                warnings.append(
                    f"step {k}: manipulability gradient norm {grad_norm:.3e} "
                    f"exceeds {GRADIENT_FLAG_NORM:.0e}"
                )

        q = q + config.dt * solution.qdot

        e_rcm = 0.0
        if trocar is not None:
            e_rcm = rcm_state(chain, q, trocar).error
            if e_rcm > RCM_DIVERGENCE_LIMIT:
                raise TrackingError(
                    f"shaft diverged from the trocar: {e_rcm * 1e3:.2f} mm", step=k
                )
        series["step"].append(k)
        series["t"].append(t_k)
        series["m"].append(manipulability_at(chain, q, "ee"))
        series["e_rcm_norm"].append(e_rcm)
        series["e_ee_norm"].append(pose_error_norm(chain, q, desired))
        series["solve_time_s"].append(solve_time)
        series["q"].append([float(v) for v in q])

    return TrackingReport(
        scenario=config.fingerprint(),
        optimize_manipulability=config.optimize_manipulability,
        series=series,
        aggregates=compute_aggregates(series),
        warnings=warnings,
    )


@dataclass
class ComparisonSummary:
    scenario: dict
    aggregates_on: dict
    aggregates_off: dict
    deltas_pct: dict

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "with_optimization": self.aggregates_on,
            "without_optimization": self.aggregates_off,
            "deltas_pct": self.deltas_pct,
        }


_DELTA_KEYS = (
    "avg_manipulability",
    "max_manipulability",
    "avg_rcm_error_m",
    "avg_pose_error",
    "mean_solve_time_s",
    "max_solve_time_s",
)


def compare_runs(report_on: TrackingReport, report_off: TrackingReport) -> ComparisonSummary:
    """Relative changes of the optimization-on run against the off run."""
    if report_on.scenario != report_off.scenario:
        raise ValidationError("mismatched scenario fingerprints")
    deltas = {}
    for key in _DELTA_KEYS:
        on = report_on.aggregates[key]
        off = report_off.aggregates[key]
        deltas[key] = None if off == 0.0 else (on - off) / off * 100.0
    return ComparisonSummary(
        report_on.scenario, report_on.aggregates, report_off.aggregates, deltas
    )
