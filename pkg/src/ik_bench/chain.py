"""Serial kinematic chain: description, loading, forward kinematics, Jacobians.

Chain documents are minimal JSON (see README): an ordered `joints` list
(revolute/prismatic, local unit axis, fixed origin transform, limits) and a
`frames` map attaching named points to a parent joint index. Every chain
must carry the frames "ee", "rcm_pre" and "rcm_post"; for arms without a
physical tool shaft the two shaft frames can sit anywhere sensible, they
only become meaningful for the incision-point constraint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._backend import kin
from .errors import ParseError, ValidationError
from .liegroup import Transform

_JTYPE_CODES = {"revolute": 0, "prismatic": 1}


@dataclass(frozen=True)
class Joint:
    """One joint: motion type, local unit axis, fixed transform to parent link."""

    type: str
    axis: np.ndarray
    origin: Transform
    lower: float
    upper: float


@dataclass(frozen=True)
class Frame:
    """Named attachment point: rigid offset from the link after joint `parent`.

    parent = -1 attaches to the base.
    """

    parent: int
    offset: Transform


@dataclass(frozen=True)
class Jacobian:
    """Geometric Jacobian and the name of the frame it differentiates."""

    matrix: np.ndarray
    frame: str


class KinematicChain:
    """Immutable serial chain; all operations are pure functions of (chain, q)."""

    def __init__(self, name: str, joints: Sequence[Joint], frames: Mapping[str, Frame]):
        self.name = name
        self.joints = tuple(joints)
        self.frames = dict(frames)
        self._validate()
        self._pack()

    @property
    def dof(self) -> int:
        return len(self.joints)

    @property
    def lower_limits(self) -> np.ndarray:
        return self._qlo

    @property
    def upper_limits(self) -> np.ndarray:
        return self._qhi

    def _validate(self) -> None:
        if not self.joints:
            raise ValidationError("chain has no joints")
        for idx, j in enumerate(self.joints):
            if j.type not in _JTYPE_CODES:
                raise ValidationError(f"joint {idx}: unknown type {j.type!r}")
            if abs(np.linalg.norm(j.axis) - 1.0) > 1e-12:
                raise ValidationError(f"joint {idx}: axis is not unit norm")
            if not j.lower < j.upper:
                raise ValidationError(f"joint {idx}: lower limit must be below upper")
            j.origin.validate()
        for required in ("ee", "rcm_pre", "rcm_post"):
            if required not in self.frames:
                raise ValidationError(f"missing required frame {required!r}")
        for name, f in self.frames.items():
            if not -1 <= f.parent < len(self.joints):
                raise ValidationError(f"frame {name!r}: parent index out of range")
            f.offset.validate()
        if not self.frames["rcm_pre"].parent < self.frames["rcm_post"].parent:
            raise ValidationError("rcm_post must be attached distal to rcm_pre")

    def _pack(self) -> None:
        # Flat arrays consumed by the kinematics kernels.
        n = len(self.joints)
        self._jt = np.array([_JTYPE_CODES[j.type] for j in self.joints], dtype=np.int32)
        self._ax = np.array([j.axis for j in self.joints], dtype=float)
        self._fr = np.array([j.origin.rotation for j in self.joints], dtype=float)
        self._ft = np.array([j.origin.translation for j in self.joints], dtype=float)
        self._qlo = np.array([j.lower for j in self.joints], dtype=float)
        self._qhi = np.array([j.upper for j in self.joints], dtype=float)
        for a in (self._jt, self._ax, self._fr, self._ft, self._qlo, self._qhi):
            a.setflags(write=False)
        self._packed_frames = {
            name: (f.parent, np.ascontiguousarray(f.offset.rotation),
                   np.ascontiguousarray(f.offset.translation))
            for name, f in self.frames.items()
        }

    def frame_args(self, frame: str):
        try:
            return self._packed_frames[frame]
        except KeyError:
            raise KeyError(f"unknown frame {frame!r}") from None

    def kernel_args(self):
        return self._jt, self._ax, self._fr, self._ft

    def check_q(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dof,):
            raise ValueError(f"expected {self.dof} joint values, got shape {q.shape}")
        return q


def _parse_vec(obj, length, what):
    try:
        v = np.array([float(x) for x in obj], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what}: expected a numeric list") from exc
    if v.shape != (length,):
        raise ParseError(f"{what}: expected {length} entries")
    return v


def _parse_origin(entry: Mapping, what: str) -> Transform:
    xyz = _parse_vec(entry.get("origin_xyz", (0.0, 0.0, 0.0)), 3, f"{what}.origin_xyz")
    rpy = _parse_vec(entry.get("origin_rpy", (0.0, 0.0, 0.0)), 3, f"{what}.origin_rpy")
    return Transform.from_xyz_rpy(xyz, rpy)


def load_chain(document) -> KinematicChain:
    """Parse and validate a chain description (JSON text or mapping)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed chain document: {exc}") from exc
    if not isinstance(document, Mapping):
        raise ParseError("chain document must be a JSON object")
    try:
        name = document.get("name", "unnamed")
        joint_entries = document["joints"]
        frame_entries = document["frames"]
    except KeyError as exc:
        raise ParseError(f"chain document missing key {exc}") from exc

    joints = []
    for idx, entry in enumerate(joint_entries):
        what = f"joints[{idx}]"
        try:
            jtype = entry["type"]
            axis = _parse_vec(entry["axis"], 3, f"{what}.axis")
            lower = float(entry["limit_lower"])
            upper = float(entry["limit_upper"])
        except KeyError as exc:
            raise ParseError(f"{what} missing key {exc}") from exc
        joints.append(Joint(jtype, axis, _parse_origin(entry, what), lower, upper))

    frames = {}
    for fname, entry in frame_entries.items():
        what = f"frames[{fname}]"
        try:
            parent = int(entry["parent"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{what}: missing or non-integer parent") from exc
        frames[fname] = Frame(parent, _parse_origin(entry, what))

    return KinematicChain(name, joints, frames)


def load_chain_file(path) -> KinematicChain:
    with open(path, "r", encoding="utf-8") as fh:
        return load_chain(fh.read())


def forward_kinematics(chain: KinematicChain, q, frame: str) -> Transform:
    """Pose of the named frame in the base frame."""
    q = chain.check_q(q)
    parent, frot, ftrans = chain.frame_args(frame)
    rot, pos = kin().frame_pose(*chain.kernel_args(), q, parent, frot, ftrans)
    return Transform(rot, pos)


def geometric_jacobian(
    chain: KinematicChain, q, frame: str, position_only: bool = False
) -> Jacobian:
    """Geometric Jacobian at the named frame.

    Linear rows (0..2) give the frame-origin velocity, angular rows (3..5)
    are in base coordinates. position_only=True keeps the linear rows.
    """
    q = chain.check_q(q)
    parent, frot, ftrans = chain.frame_args(frame)
    J = kin().jacobian(*chain.kernel_args(), q, parent, frot, ftrans)
    if position_only:
        J = J[:3]
    return Jacobian(J, frame)
