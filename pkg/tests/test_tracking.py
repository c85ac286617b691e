import json

import numpy as np
import pytest

from ik_bench.chain import forward_kinematics
from ik_bench.errors import TrackingError, ValidationError
from ik_bench.paths import PathSpec
from ik_bench.scenario import ScenarioConfig, load_scenario
from ik_bench.tracking import compare_runs, compute_aggregates, run_tracking

from helpers import data_path

R_D = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])


def short_config(name="kc1_helix_constrained", steps=60, slow=True, **overrides):
    """Shortened scenario; `slow` shrinks the traversed arc so the per-step
    path motion matches the shipped 2000-step density."""
    extra = [f"{k}={json.dumps(v)}" for k, v in overrides.items()]
    if slow:
        extra.append(f"t_end={(steps - 1) / 1000.0}")
    return load_scenario(data_path(f"{name}.json"), [f"steps={steps}"] + extra)


@pytest.fixture(scope="module")
def short_run():
    config = short_config()
    return config, run_tracking(config)


class TestFixedPoint:
    def test_zero_length_path_holds_still(self, kc1):
        config = load_scenario(data_path("kc1_helix_constrained.json"))
        q0 = np.array(config.initial_q)
        tip = forward_kinematics(config.chain, q0, "ee")
        # a degenerate helix: amplitude and parameter span far below double
        # resolution, so the desired pose equals the start pose exactly
        frozen = PathSpec(
            kind="helix", origin=tip.translation - np.array([1e-30, 0, 0]),
            amp_a=1e-30, amp_b=None, amp_c=None, orientation=tip.rotation,
            t_start=0.0, t_end=1e-30, steps=20,
        )
        still = ScenarioConfig(
            name="fixed_point", mode=config.mode, chain=config.chain,
            chain_file=config.chain_file, path=frozen, trocar=config.trocar,
            gains=config.gains, dt=config.dt, cycle_time=config.cycle_time,
            optimize_manipulability=False, initial_q=q0, record_timing=False,
        )
        report = run_tracking(still)
        assert report.aggregates["avg_pose_error"] <= 1e-8
        for q in report.series["q"]:
            np.testing.assert_allclose(q, q0, atol=1e-6)


class TestClosedLoop:
    def test_short_constrained_run_metrics(self, short_run):
        config, report = short_run
        a = report.aggregates
        assert report.steps == 60
        assert a["avg_pose_error"] <= 1e-4
        assert a["avg_rcm_error_m"] <= 1e-4
        settled = report.series["e_rcm_norm"][10:]
        assert max(settled) <= 5e-4

    def test_joint_limits_hold_every_step(self, short_run):
        config, report = short_run
        lo = config.chain.lower_limits - 1e-9
        hi = config.chain.upper_limits + 1e-9
        for q in report.series["q"]:
            q = np.asarray(q)
            assert np.all(q >= lo) and np.all(q <= hi)

    def test_series_lengths_match_steps(self, short_run):
        _, report = short_run
        for name, column in report.series.items():
            assert len(column) == report.steps, name

    def test_aggregates_recomputable_exactly(self, short_run):
        _, report = short_run
        assert compute_aggregates(report.series) == report.aggregates

    def test_determinism_identical_reports(self):
        config = short_config(steps=40)
        a = run_tracking(config)
        b = run_tracking(config)
        assert a.series == b.series
        assert a.aggregates == b.aggregates

    def test_timing_off_records_zeros(self, short_run):
        _, report = short_run
        assert all(v == 0.0 for v in report.series["solve_time_s"])

    def test_timing_on_records_positive(self):
        config = short_config(steps=15, record_timing=True)
        report = run_tracking(config)
        assert all(v > 0.0 for v in report.series["solve_time_s"])

    def test_divergence_aborts_with_step_index(self):
        # a reference far too fast for the control rate: the waypoint jumps
        # drag the shaft off the trocar within a couple of cycles
        config = short_config(steps=20, slow=False)
        with pytest.raises(TrackingError) as err:
            run_tracking(config)
        assert err.value.step >= 0
        assert "trocar" in str(err.value)

    def test_suspect_gradients_are_flagged_in_the_report(self, monkeypatch):
        import ik_bench.tracking as tracking_module

        monkeypatch.setattr(tracking_module, "GRADIENT_FLAG_NORM", 1e-12)
        report = run_tracking(short_config(steps=5))
        assert len(report.warnings) == 5
        assert "gradient norm" in report.warnings[0]

    def test_initial_rcm_violation_rejected(self):
        config = short_config(steps=40)
        far = ScenarioConfig(
            name=config.name, mode=config.mode, chain=config.chain,
            chain_file=config.chain_file, path=config.path,
            trocar=config.trocar + np.array([0.02, 0.0, 0.0]),
            gains=config.gains, dt=config.dt, cycle_time=config.cycle_time,
            optimize_manipulability=True, initial_q=config.initial_q,
            record_timing=False,
        )
        with pytest.raises(ValidationError):
            run_tracking(far)


class TestCompare:
    def test_self_comparison_is_all_zero(self, short_run):
        _, report = short_run
        summary = compare_runs(report, report)
        for key, value in summary.deltas_pct.items():
            assert value is None or value == 0.0

    def test_on_off_deltas_recomputable(self):
        config = short_config(steps=50)
        on = run_tracking(config.with_optimization(True))
        off = run_tracking(config.with_optimization(False))
        summary = compare_runs(on, off)
        expected = (
            on.aggregates["avg_manipulability"]
            / off.aggregates["avg_manipulability"] - 1.0
        ) * 100.0
        assert summary.deltas_pct["avg_manipulability"] == pytest.approx(expected)

    def test_mismatched_fingerprints_rejected(self):
        a = run_tracking(short_config(steps=20))
        b = run_tracking(short_config(steps=21))
        with pytest.raises(ValidationError, match="fingerprint"):
            compare_runs(a, b)

    def test_zero_weight_override_equals_disabled(self):
        base = short_config(steps=40)
        off = run_tracking(base.with_optimization(False))
        zero_weight = run_tracking(short_config(steps=40, Kt3=0.0))
        for key in ("avg_manipulability", "max_manipulability",
                    "avg_rcm_error_m", "avg_pose_error"):
            assert abs(zero_weight.aggregates[key] - off.aggregates[key]) <= 1e-9
