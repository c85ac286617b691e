import json
import os

import numpy as np
import pytest

from ik_bench.errors import ParseError, ValidationError
from ik_bench.scenario import (
    OVERRIDE_PATHS,
    apply_overrides,
    load_scenario,
    validation_checks,
)

from helpers import data_path

SHIPPED = [
    "kc1_helix_constrained",
    "kc2_helix_constrained",
    "kc1_lissajous_unconstrained",
    "kc2_lissajous_unconstrained",
]


@pytest.fixture()
def shipped_doc():
    with open(data_path("kc1_helix_constrained.json")) as fh:
        return json.load(fh)


def write_scenario(tmp_path, doc, name="scenario.json"):
    # keep the chain reference resolvable
    doc = dict(doc)
    doc["chain"] = data_path(doc["chain"])
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestLoading:
    @pytest.mark.parametrize("name", SHIPPED)
    def test_shipped_scenarios_load_and_validate(self, name):
        config = load_scenario(data_path(f"{name}.json"))
        assert config.name == name
        assert config.chain.dof in (10, 12)
        checks, cfg = validation_checks(data_path(f"{name}.json"))
        assert cfg is not None
        assert all(ok for _, ok, _ in checks)

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{oops")
        with pytest.raises(ParseError):
            load_scenario(str(bad))

    def test_missing_field(self, tmp_path, shipped_doc):
        del shipped_doc["gains"]
        with pytest.raises(ParseError):
            load_scenario(write_scenario(tmp_path, shipped_doc))

    def test_missing_trocar_in_constrained_mode(self, tmp_path, shipped_doc):
        shipped_doc["trocar"] = None
        with pytest.raises(ValidationError, match="trocar"):
            load_scenario(write_scenario(tmp_path, shipped_doc))

    def test_zero_task_weight_rejected(self, tmp_path, shipped_doc):
        shipped_doc["gains"]["Kt2"] = 0.0
        with pytest.raises(ValidationError):
            load_scenario(write_scenario(tmp_path, shipped_doc))

    def test_initial_q_outside_limits_rejected(self, tmp_path, shipped_doc):
        shipped_doc["initial_q"][0] = 99.0
        with pytest.raises(ValidationError, match="limit"):
            load_scenario(write_scenario(tmp_path, shipped_doc))

    def test_initial_shaft_must_pass_near_trocar(self, tmp_path, shipped_doc):
        shipped_doc["trocar"] = [2.0, 2.0, 2.0]
        with pytest.raises(ValidationError, match="trocar"):
            load_scenario(write_scenario(tmp_path, shipped_doc))

    def test_unknown_mode_rejected(self, tmp_path, shipped_doc):
        shipped_doc["mode"] = "floating"
        with pytest.raises(ValidationError):
            load_scenario(write_scenario(tmp_path, shipped_doc))


class TestOverrides:
    def test_every_key_maps_to_exactly_one_field(self, shipped_doc):
        # round trip: each override lands in its documented slot and
        # survives a reload
        values = {
            "Kt1": 2.0, "Kt2": 3.0, "Kt3": 0.5, "Kr1": 10.0, "Kr2": 20.0,
            "Kr3": 0.25, "Kd1": 1e-4, "Kd2": 1e-8, "Kw1": 1e-4, "Kw2": 1e-3,
            "dt": 0.002, "cycle_time": 0.004,
            "optimize_manipulability": False, "record_timing": True,
            "steps": 123, "t_start": 0.25, "t_end": 0.75,
        }
        assert set(values) == set(OVERRIDE_PATHS)
        overrides = [f"{k}={json.dumps(v)}" for k, v in values.items()]
        doc = apply_overrides(shipped_doc, overrides)
        for key, expected in values.items():
            target = doc
            for part in OVERRIDE_PATHS[key][:-1]:
                target = target[part]
            assert target[OVERRIDE_PATHS[key][-1]] == expected

    def test_gain_override_reaches_config(self, tmp_path, shipped_doc):
        path = write_scenario(tmp_path, shipped_doc)
        config = load_scenario(path, ["Kt3=0.5", "steps=50"])
        assert config.gains.kt3 == 0.5
        assert config.path.steps == 50

    def test_unknown_key_rejected(self, shipped_doc):
        with pytest.raises(ParseError, match="unknown override"):
            apply_overrides(shipped_doc, ["K_t9=1.0"])

    def test_malformed_override_rejected(self, shipped_doc):
        with pytest.raises(ParseError):
            apply_overrides(shipped_doc, ["Kt3"])

    def test_source_document_not_mutated(self, shipped_doc):
        before = json.dumps(shipped_doc, sort_keys=True)
        apply_overrides(shipped_doc, ["Kt3=0.5"])
        assert json.dumps(shipped_doc, sort_keys=True) == before


class TestFingerprint:
    def test_excludes_only_the_optimization_flag(self):
        config = load_scenario(data_path("kc1_helix_constrained.json"))
        on = config.with_optimization(True).fingerprint()
        off = config.with_optimization(False).fingerprint()
        assert on == off

    def test_sensitive_to_gains(self, tmp_path, shipped_doc):
        a = load_scenario(write_scenario(tmp_path, shipped_doc))
        b = load_scenario(write_scenario(tmp_path, shipped_doc), ["Kt3=0.555"])
        assert a.fingerprint() != b.fingerprint()

    def test_unconstrained_carries_no_trocar(self):
        config = load_scenario(data_path("kc1_lissajous_unconstrained.json"))
        assert config.trocar is None
        assert np.all(np.isfinite(config.initial_q))
