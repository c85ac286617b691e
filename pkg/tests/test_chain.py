import json

import numpy as np
import pytest

from ik_bench.chain import (
    forward_kinematics,
    geometric_jacobian,
    load_chain,
    load_chain_file,
)
from ik_bench.errors import ParseError, ValidationError

from helpers import (
    data_path,
    fd_frame_position_jacobian,
    fd_full_jacobian,
    make_planar_2r,
    planar_2r_doc,
    random_interior_q,
)


def minimal_doc():
    return {
        "name": "one",
        "joints": [
            {"type": "revolute", "axis": [0, 0, 1], "limit_lower": -np.pi,
             "limit_upper": np.pi}
        ],
        "frames": {
            "ee": {"parent": 0, "origin_xyz": [1, 0, 0]},
            "rcm_pre": {"parent": -1, "origin_xyz": [0, 0, 0]},
            "rcm_post": {"parent": 0, "origin_xyz": [0.5, 0, 0]},
        },
    }


class TestLoading:
    def test_minimal_single_joint_chain(self):
        chain = load_chain(json.dumps(minimal_doc()))
        assert chain.dof == 1
        assert chain.joints[0].type == "revolute"

    def test_shipped_chains_load(self):
        kc1 = load_chain_file(data_path("kc1.json"))
        assert kc1.dof == 10
        kc2 = load_chain_file(data_path("kc2.json"))
        assert kc2.dof == 12
        for chain in (kc1, kc2):
            for frame in ("ee", "rcm_pre", "rcm_post"):
                assert frame in chain.frames

    def test_unnormalized_axis_rejected(self):
        doc = minimal_doc()
        doc["joints"][0]["axis"] = [1, 1, 0]
        with pytest.raises(ValidationError):
            load_chain(json.dumps(doc))

    def test_inverted_limits_rejected(self):
        doc = minimal_doc()
        doc["joints"][0]["limit_lower"] = 2.0
        doc["joints"][0]["limit_upper"] = -2.0
        with pytest.raises(ValidationError):
            load_chain(json.dumps(doc))

    def test_missing_required_frame_rejected(self):
        doc = minimal_doc()
        del doc["frames"]["rcm_pre"]
        with pytest.raises(ValidationError):
            load_chain(json.dumps(doc))

    def test_rcm_post_must_be_distal(self):
        doc = planar_2r_doc()
        doc["frames"]["rcm_pre"]["parent"] = 1
        doc["frames"]["rcm_post"]["parent"] = 0
        with pytest.raises(ValidationError):
            load_chain(json.dumps(doc))

    def test_malformed_json_is_parse_error(self):
        with pytest.raises(ParseError):
            load_chain("{not json")

    def test_missing_key_is_parse_error(self):
        doc = minimal_doc()
        del doc["joints"][0]["axis"]
        with pytest.raises(ParseError):
            load_chain(json.dumps(doc))


class TestForwardKinematics:
    def test_zero_configuration_composes_fixed_transforms(self, kc1):
        # with q = 0 the arm is a pure stack of the per-joint offsets
        T = forward_kinematics(kc1, np.zeros(10), "ee")
        z = sum(j.origin.translation[2] for j in kc1.joints) + 0.025
        np.testing.assert_allclose(T.translation, [0.0, 0.0, z], atol=1e-14)
        np.testing.assert_allclose(T.rotation, np.eye(3), atol=1e-14)

    def test_planar_2r_hand_computed_poses(self, planar2r):
        T = forward_kinematics(planar2r, [0.0, np.pi / 2], "ee")
        np.testing.assert_allclose(T.translation, [1.0, 1.0, 0.0], atol=1e-15)
        T = forward_kinematics(planar2r, [np.pi / 2, 0.0], "ee")
        np.testing.assert_allclose(T.translation, [0.0, 2.0, 0.0], atol=1e-15)

    def test_dimension_mismatch(self, planar2r):
        with pytest.raises(ValueError):
            forward_kinematics(planar2r, [0.0], "ee")

    def test_unknown_frame(self, planar2r):
        with pytest.raises(KeyError):
            forward_kinematics(planar2r, [0.0, 0.0], "tool_tip")

    def test_deterministic_bitwise(self, kc1, rng):
        q = random_interior_q(kc1, rng)
        a = forward_kinematics(kc1, q, "ee")
        b = forward_kinematics(kc1, q, "ee")
        assert np.array_equal(a.rotation, b.rotation)
        assert np.array_equal(a.translation, b.translation)


class TestJacobian:
    def test_planar_2r_rows_at_zero(self, planar2r):
        J = geometric_jacobian(planar2r, [0.0, 0.0], "ee").matrix
        np.testing.assert_allclose(J[0], [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(J[1], [2.0, 1.0], atol=1e-15)

    def test_matches_finite_differences(self, kc1, kc2, planar2r, rng):
        for chain in (planar2r, kc1, kc2):
            for _ in range(5):
                q = random_interior_q(chain, rng)
                J = geometric_jacobian(chain, q, "ee").matrix
                J_fd = fd_full_jacobian(chain, q, "ee")
                np.testing.assert_allclose(J, J_fd, atol=1e-6)

    def test_position_rows_match_full(self, kc1, rng):
        q = random_interior_q(kc1, rng)
        full = geometric_jacobian(kc1, q, "ee").matrix
        pos = geometric_jacobian(kc1, q, "ee", position_only=True).matrix
        np.testing.assert_array_equal(pos, full[:3])

    def test_prismatic_column(self):
        doc = minimal_doc()
        doc["joints"][0]["type"] = "prismatic"
        chain = load_chain(json.dumps(doc))
        J = geometric_jacobian(chain, [0.3], "ee").matrix
        np.testing.assert_allclose(J[:, 0], [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
                                   atol=1e-15)
        T = forward_kinematics(chain, [0.3], "ee")
        np.testing.assert_allclose(T.translation, [1.0, 0.0, 0.3], atol=1e-15)

    def test_distal_joints_have_zero_columns(self, kc1, kc2, rng):
        for chain in (kc1, kc2):
            q = random_interior_q(chain, rng)
            J_pre = geometric_jacobian(chain, q, "rcm_pre").matrix
            J_ee = geometric_jacobian(chain, q, "ee").matrix
            zeros_pre = sum(np.all(J_pre[:, i] == 0.0) for i in range(chain.dof))
            zeros_ee = sum(np.all(J_ee[:, i] == 0.0) for i in range(chain.dof))
            assert zeros_pre >= zeros_ee + 1

    def test_frame_jacobians_match_fd_at_rcm_frames(self, kc2, rng):
        q = random_interior_q(kc2, rng)
        for frame in ("rcm_pre", "rcm_post"):
            J = geometric_jacobian(kc2, q, frame, position_only=True).matrix
            np.testing.assert_allclose(
                J, fd_frame_position_jacobian(kc2, q, frame), atol=1e-6
            )
