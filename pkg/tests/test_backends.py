import os
import subprocess
import sys

import numpy as np
import pytest

from ik_bench import _backend
from ik_bench._backend import HAVE_COMPILED

from helpers import random_interior_q

needs_compiled = pytest.mark.skipif(
    not HAVE_COMPILED, reason="compiled kernels not built"
)


@pytest.fixture
def both_kernels():
    from ik_bench import _kin_py, _kin_cy

    return _kin_py, _kin_cy


@needs_compiled
class TestKinematicsParity:
    def test_frame_pose(self, kc1, kc2, rng, both_kernels):
        py, cy = both_kernels
        for chain in (kc1, kc2):
            for frame in ("ee", "rcm_pre", "rcm_post"):
                q = random_interior_q(chain, rng)
                args = chain.kernel_args() + (q,) + chain.frame_args(frame)
                rot_p, pos_p = py.frame_pose(*args)
                rot_c, pos_c = cy.frame_pose(*args)
                np.testing.assert_allclose(rot_c, rot_p, atol=1e-13)
                np.testing.assert_allclose(pos_c, pos_p, atol=1e-13)

    def test_jacobian(self, kc1, rng, both_kernels):
        py, cy = both_kernels
        for _ in range(10):
            q = random_interior_q(kc1, rng)
            args = kc1.kernel_args() + (q,) + kc1.frame_args("ee")
            np.testing.assert_allclose(
                cy.jacobian(*args), py.jacobian(*args), atol=1e-13
            )

    def test_manipulability_and_gradient(self, kc2, rng, both_kernels):
        py, cy = both_kernels
        rows = np.arange(6)
        for _ in range(5):
            q = random_interior_q(kc2, rng)
            base = kc2.kernel_args() + (q,) + kc2.frame_args("ee")
            m_p = py.manip_value(*base, rows)
            m_c = cy.manip_value(*base, rows)
            assert m_c == pytest.approx(m_p, abs=1e-12)
            g_p = py.manip_gradient(*base, 1e-6, rows)
            g_c = cy.manip_gradient(*base, 1e-6, rows)
            np.testing.assert_allclose(g_c, g_p, atol=2e-8)


@needs_compiled
class TestQpParity:
    def test_admm_chunk_iterates_match(self, rng):
        from ik_bench import _qp_py, _qp_cy
        from helpers import random_feasible_qp

        for _ in range(5):
            Q, p, C, d = random_feasible_qp(rng, n_max=6)
            if len(d) == 0:
                continue
            state_py = (np.zeros(len(p)), np.zeros(len(d)), C @ np.zeros(len(p)))
            state_cy = tuple(np.array(v) for v in state_py)
            args = (Q, p, C, d, 1e-6, 0.1, 1.6)
            tail = (1e-8, 1e-8, 50, 25)
            r_py = _qp_py.admm_run(*args, *state_py, *tail)
            r_cy = _qp_cy.admm_run(*args, *state_cy, *tail)
            assert r_py[0] == r_cy[0]
            np.testing.assert_allclose(state_cy[0], state_py[0], atol=1e-8)
            np.testing.assert_allclose(state_cy[1], state_py[1], atol=1e-8)


class TestBackendSelection:
    def test_active_backend_is_valid(self):
        assert _backend.backend_name() in ("python", "compiled")

    def test_runtime_switch_round_trip(self):
        original = _backend.backend_name()
        try:
            _backend.use("python")
            assert _backend.backend_name() == "python"
            assert _backend.kin().__name__.endswith("_kin_py")
        finally:
            _backend.use(original)

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError):
            _backend.use("fortran")

    def test_env_var_forces_python(self):
        code = (
            "import ik_bench; "
            "print(ik_bench.backend_name())"
        )
        env = dict(os.environ, IK_BENCH_BACKEND="python")
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == "python"

    @needs_compiled
    def test_tracking_agrees_across_backends(self):
        # full closed loop on both kernel sets; trajectories stay together
        # far tighter than any acceptance tolerance
        from ik_bench.scenario import load_scenario
        from ik_bench.tracking import run_tracking
        from helpers import data_path

        config = load_scenario(data_path("kc1_helix_constrained.json"),
                               ["steps=40", "t_end=0.039"])
        original = _backend.backend_name()
        try:
            _backend.use("compiled")
            compiled = run_tracking(config)
            _backend.use("python")
            fallback = run_tracking(config)
        finally:
            _backend.use(original)
        np.testing.assert_allclose(
            fallback.series["m"], compiled.series["m"], rtol=0, atol=1e-9
        )
        np.testing.assert_allclose(
            np.array(fallback.series["q"]), np.array(compiled.series["q"]),
            atol=1e-8,
        )
