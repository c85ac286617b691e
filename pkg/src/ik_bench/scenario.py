"""Scenario files: loading, validation, CLI overrides.

A scenario bundles everything one tracking run needs: the chain file, the
reference path, the incision point (constrained mode), gains, timing and
the recorded initial configuration. See README for the JSON schema.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass

import numpy as np

from .chain import KinematicChain, load_chain_file
from .errors import ParseError, ValidationError
from .hqp import GainSet
from .paths import PathSpec
from .tasks import rcm_state

# Initial shaft-to-trocar distance allowed in constrained scenarios (m);
# also the divergence abort threshold during tracking.
RCM_DIVERGENCE_LIMIT = 5e-3

_GAIN_KEYS = ("Kt1", "Kt2", "Kt3", "Kr1", "Kr2", "Kr3", "Kd1", "Kd2", "Kw1", "Kw2")

# Override key -> path into the raw scenario document. Every key maps to
# exactly one ScenarioConfig field.
OVERRIDE_PATHS = {
    **{k: ("gains", k) for k in _GAIN_KEYS},
    "dt": ("dt",),
    "cycle_time": ("cycle_time",),
    "optimize_manipulability": ("optimize_manipulability",),
    "record_timing": ("record_timing",),
    "steps": ("path", "steps"),
    "t_start": ("path", "t_start"),
    "t_end": ("path", "t_end"),
}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    mode: str
    chain: KinematicChain
    chain_file: str
    path: PathSpec
    trocar: np.ndarray | None
    gains: GainSet
    dt: float
    cycle_time: float
    optimize_manipulability: bool
    initial_q: np.ndarray
    record_timing: bool

    def fingerprint(self) -> dict:
        """Everything that determines the run except the optimization flag."""
        return {
            "name": self.name,
            "mode": self.mode,
            "chain": self.chain.name,
            "dof": self.chain.dof,
            "path": {
                "kind": self.path.kind,
                "origin": list(self.path.origin),
                "A": self.path.amp_a,
                "B": self.path.amp_b,
                "C": self.path.amp_c,
                "t_start": self.path.t_start,
                "t_end": self.path.t_end,
                "steps": self.path.steps,
            },
            "trocar": None if self.trocar is None else list(self.trocar),
            "gains": {k: getattr(self.gains, k.lower()) for k in _GAIN_KEYS},
            "dt": self.dt,
            "cycle_time": self.cycle_time,
            "initial_q": list(self.initial_q),
            "record_timing": self.record_timing,
        }

    def with_optimization(self, enabled: bool) -> "ScenarioConfig":
        return ScenarioConfig(
            self.name, self.mode, self.chain, self.chain_file, self.path,
            self.trocar, self.gains, self.dt, self.cycle_time,
            bool(enabled), self.initial_q, self.record_timing,
        )


def _vec(raw, length, what):
    try:
        v = np.array([float(x) for x in raw], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: expected a numeric list") from exc
    if v.shape != (length,):
        raise ParseError(f"{what}: expected {length} entries")
    return v


def parse_path_spec(raw: dict) -> PathSpec:
    if not isinstance(raw, dict):
        raise ParseError("path: expected an object")
    try:
        kind = raw["kind"]
        origin = _vec(raw["origin"], 3, "path.origin")
        orientation = np.array(raw["orientation"], dtype=float)
        steps = int(raw["steps"])
    except KeyError as exc:
        raise ParseError(f"path missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ParseError(f"path: {exc}") from exc
    if orientation.shape != (3, 3):
        raise ParseError("path.orientation must be a 3x3 matrix")
    return PathSpec(
        kind=kind,
        origin=origin,
        amp_a=float(raw.get("A")) if raw.get("A") is not None else None,
        amp_b=float(raw.get("B")) if raw.get("B") is not None else None,
        amp_c=float(raw.get("C")) if raw.get("C") is not None else None,
        orientation=orientation,
        t_start=float(raw.get("t_start", 0.0)),
        t_end=float(raw["t_end"]),
        steps=steps,
    )


def scenario_from_document(raw: dict, base_dir: str) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from a parsed scenario document."""
    if not isinstance(raw, dict):
        raise ParseError("scenario document must be a JSON object")
    try:
        name = str(raw["name"])
        mode = str(raw["mode"])
        chain_file = str(raw["chain"])
        path_raw = raw["path"]
        gains_raw = raw["gains"]
        initial_q_raw = raw["initial_q"]
        dt = float(raw["dt"])
        cycle_time = float(raw["cycle_time"])
        optimize = bool(raw.get("optimize_manipulability", True))
        record_timing = bool(raw.get("record_timing", False))
    except KeyError as exc:
        raise ParseError(f"scenario missing key {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ParseError(f"scenario: {exc}") from exc

    if mode not in ("constrained", "unconstrained"):
        raise ValidationError(f"mode must be constrained or unconstrained, got {mode!r}")

    chain_path = chain_file
    if not os.path.isabs(chain_path):
        chain_path = os.path.join(base_dir, chain_file)
    chain = load_chain_file(chain_path)

    path = parse_path_spec(path_raw)

    if not isinstance(gains_raw, dict):
        raise ParseError("gains: expected an object")
    unknown = set(gains_raw) - set(_GAIN_KEYS)
    if unknown:
        raise ParseError(f"gains: unknown keys {sorted(unknown)}")
    try:
        gains = GainSet(**{k.lower(): float(gains_raw[k]) for k in _GAIN_KEYS if k in gains_raw})
    except KeyError as exc:
        raise ParseError(f"gains missing key {exc}") from exc

    trocar = None
    if raw.get("trocar") is not None:
        trocar = _vec(raw["trocar"], 3, "trocar")
    if mode == "constrained" and trocar is None:
        raise ValidationError("constrained mode requires the field 'trocar'")
    if mode == "unconstrained":
        trocar = None

    q0 = _vec(initial_q_raw, chain.dof, "initial_q")
    if np.any(q0 < chain.lower_limits) or np.any(q0 > chain.upper_limits):
        raise ValidationError("initial_q violates the joint limits")
    if not dt > 0.0 or not cycle_time > 0.0:
        raise ValidationError("dt and cycle_time must be positive")

    config = ScenarioConfig(
        name, mode, chain, chain_file, path, trocar, gains,
        dt, cycle_time, optimize, q0, record_timing,
    )
    if config.trocar is not None:
        start_error = rcm_state(chain, q0, config.trocar).error
        if start_error >= RCM_DIVERGENCE_LIMIT:
            raise ValidationError(
                f"initial shaft misses the trocar by {start_error * 1e3:.2f} mm "
                f"(limit {RCM_DIVERGENCE_LIMIT * 1e3:.1f} mm)"
            )
    return config


def load_scenario(path, overrides=()) -> ScenarioConfig:
    """Load a scenario file, applying `key=value` overrides first."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed scenario document: {exc}") from exc
    raw = apply_overrides(raw, overrides)
    return scenario_from_document(raw, os.path.dirname(os.path.abspath(path)))


def _parse_override_value(text: str):
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"cannot parse override value {text!r}") from exc


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply CLI overrides (strings of the form key=value) to a raw document."""
    if not overrides:
        return raw
    raw = copy.deepcopy(raw)
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"override {item!r} is not of the form key=value")
        if key not in OVERRIDE_PATHS:
            raise ParseError(f"unknown override key {key!r}")
        path = OVERRIDE_PATHS[key]
        target = raw
        for part in path[:-1]:
            target = target.setdefault(part, {})
        target[path[-1]] = _parse_override_value(value)
    return raw


def validation_checks(scenario_path, overrides=()):
    """Run the named invariant checks; returns (checks, config_or_None).

    checks is a list of (name, passed, message). Parse failures raise
    ParseError/OSError instead, since nothing meaningful can be checked.
    """
    checks = []
    try:
        config = load_scenario(scenario_path, overrides)
    except ValidationError as exc:
        checks.append(("scenario invariants", False, str(exc)))
        return checks, None
    checks.append(("document parses", True, ""))
    checks.append(("chain invariants", True, f"{config.chain.name}, dof={config.chain.dof}"))
    checks.append(("gains positive", True, ""))
    checks.append(("path spec", True, config.path.kind))
    checks.append(("initial q within limits", True, ""))
    if config.mode == "constrained":
        err = rcm_state(config.chain, config.initial_q, config.trocar).error
        checks.append(
            ("initial shaft through trocar", True, f"{err * 1e3:.4f} mm")
        )
    return checks, config
