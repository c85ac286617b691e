"""Reference path generators for the tracking benchmark.

Both paths are 6-DOF: the position traces the curve while the orientation
stays fixed. The parameter t runs over [t_start, t_end] in n_steps evenly
spaced samples (endpoints included).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .liegroup import Transform

# Vertical advance of the helix per unit path parameter, in meters.
HELIX_PITCH_RATE = 0.01


@dataclass(frozen=True)
class PathSpec:
    kind: str
    origin: np.ndarray
    amp_a: float
    amp_b: float | None
    amp_c: float | None
    orientation: np.ndarray
    t_start: float
    t_end: float
    steps: int

    def __post_init__(self):
        if self.kind not in ("helix", "lissajous"):
            raise ValidationError(f"unknown path kind {self.kind!r}")
        if self.origin.shape != (3,):
            raise ValidationError("path origin must be a 3-vector")
        required = [self.amp_a] if self.kind == "helix" else [
            self.amp_a, self.amp_b, self.amp_c
        ]
        if any(a is None or not a > 0.0 for a in required):
            raise ValidationError("path amplitudes must be positive")
        Transform(self.orientation, np.zeros(3)).validate()
        if self.steps < 2:
            raise ValidationError("path needs at least 2 steps")
        if not self.t_end > self.t_start:
            raise ValidationError("t_end must exceed t_start")

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.steps)


def helix_point(t: float, spec: PathSpec) -> Transform:
    """Circular sweep in x/y with a slow vertical advance."""
    if spec.kind != "helix":
        raise ValueError("spec is not a helix")
    a = spec.amp_a
    offset = np.array(
        [a * np.cos(2.0 * np.pi * t), a * np.sin(2.0 * np.pi * t), HELIX_PITCH_RATE * t]
    )
    return Transform(spec.orientation, spec.origin + offset)


def lissajous_point(t: float, spec: PathSpec) -> Transform:
    """Figure-style curve: sin t in x, sin(2t + pi) in y, cos 2t - 1 in z."""
    if spec.kind != "lissajous":
        raise ValueError("spec is not a lissajous curve")
    offset = np.array(
        [
            spec.amp_a * np.sin(t),
            spec.amp_b * np.sin(2.0 * t + np.pi),
            spec.amp_c * (np.cos(2.0 * t) - 1.0),
        ]
    )
    return Transform(spec.orientation, spec.origin + offset)


def path_point(t: float, spec: PathSpec) -> Transform:
    if spec.kind == "helix":
        return helix_point(t, spec)
    return lissajous_point(t, spec)
