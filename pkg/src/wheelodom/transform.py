"""Rigid transforms between the flatbed vehicle frame and the UGV frame.

Axes are x forward, y left, z up.  The vehicle frame is centred on the
rear axle; the UGV (mapping robot) frame is offset from it by ``l0`` along
y and ``h0`` along z, with no rotation, giving::

    x_u = x_v,   y_u = y_v - l0,   z_u = z_v - h0

with the measured ``l0 = 1.21 m`` and ``h0 = 0.59 m``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import parse_floats, read_keyvalue
from .errors import ParseError, ValidationError
from .odometry import Trajectory

ORTHONORMAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RigidTransform3D:
    """``p -> rotation @ p + translation`` with a proper orthonormal rotation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.array(self.rotation, dtype=float)
        t = np.array(self.translation, dtype=float).reshape(-1)
        if r.shape != (3, 3) or t.shape != (3,):
            raise ValidationError(f"bad shapes: rotation {r.shape}, translation {t.shape}")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
            raise ValidationError("transform contains non-finite values")
        if np.max(np.abs(r.T @ r - np.eye(3))) > ORTHONORMAL_TOL:
            raise ValidationError("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > ORTHONORMAL_TOL:
            raise ValidationError("rotation is a reflection (det != +1)")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_yaw(cls, yaw, translation=(0.0, 0.0, 0.0)):
        c, s = math.cos(yaw), math.sin(yaw)
        return cls([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]], translation)

    @property
    def is_yaw_only(self):
        """True when the rotation is about the z axis alone."""
        r = self.rotation
        return (
            abs(r[2, 2] - 1.0) <= ORTHONORMAL_TOL
            and np.max(np.abs(r[:2, 2])) <= ORTHONORMAL_TOL
            and np.max(np.abs(r[2, :2])) <= ORTHONORMAL_TOL
        )

    @property
    def yaw(self):
        return math.atan2(self.rotation[1, 0], self.rotation[0, 0])

    def __matmul__(self, other):
        if isinstance(other, RigidTransform3D):
            return compose(self, other)
        return apply(self, other)


def apply(t: RigidTransform3D, p):
    """Transform one point ``(3,)`` or many ``(n, 3)``."""
    p = np.asarray(p, dtype=float)
    return p @ t.rotation.T + t.translation


def compose(a: RigidTransform3D, b: RigidTransform3D) -> RigidTransform3D:
    """The transform applying ``b`` first, then ``a``."""
    return RigidTransform3D(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def invert(t: RigidTransform3D) -> RigidTransform3D:
    rt = t.rotation.T
    return RigidTransform3D(rt, -(rt @ t.translation))


@dataclass(frozen=True)
class VehicleToUgvConstants:
    l0: float = 1.21
    h0: float = 0.59

    def __post_init__(self):
        if not (self.l0 > 0 and self.h0 > 0):
            raise ValidationError(f"l0 and h0 must be positive, got {self.l0}, {self.h0}")

    def transform(self) -> RigidTransform3D:
        return RigidTransform3D(np.eye(3), [0.0, -self.l0, -self.h0])


VEHICLE_TO_UGV = VehicleToUgvConstants().transform()


@dataclass(frozen=True, eq=False)
class Trajectory3D:
    timestamps_us: np.ndarray
    points: np.ndarray
    heading: np.ndarray | None = None

    def __len__(self):
        return len(self.timestamps_us)


def transform_trajectory(traj: Trajectory, t: RigidTransform3D, z_plane: float = 0.0) -> Trajectory3D:
    """Lift planar poses to ``z = z_plane`` and map them through ``t``.

    Heading is rotated along when ``t`` is a pure yaw; otherwise it is
    dropped with a warning.
    """
    pts = np.column_stack([traj.positions, np.full(len(traj), float(z_plane))])
    out = apply(t, pts)
    heading = None
    if t.is_yaw_only:
        heading = traj.poses[:, 2] + t.yaw
    else:
        warnings.warn("transform rotates out of the ground plane; heading omitted", stacklevel=2)
    return Trajectory3D(traj.timestamps_us, out, heading)


def write_trajectory3d_csv(traj: Trajectory3D, path) -> None:
    cols = ["timestamp_us", "x", "y", "z"] + (["theta"] if traj.heading is not None else [])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for k, t in enumerate(traj.timestamps_us.tolist()):
            vals = traj.points[k].tolist()
            if traj.heading is not None:
                vals.append(float(traj.heading[k]))
            fh.write(f"{t}," + ",".join(repr(v) for v in vals) + "\n")


def load_transform_config(path) -> RigidTransform3D:
    """Build a transform from a key-value file.

    Keys ``l0``/``h0`` override the measured offsets; a full ``rotation``
    (9 numbers, row-major) and ``translation`` (3 numbers) take precedence
    when given.
    """
    path = Path(path)
    kv = read_keyvalue(path)
    try:
        if "rotation" in kv or "translation" in kv:
            rot = np.array(parse_floats(kv.get("rotation", "1 0 0 0 1 0 0 0 1"), 9, "rotation"))
            trans = parse_floats(kv.get("translation", "0 0 0"), 3, "translation")
            return RigidTransform3D(rot.reshape(3, 3), trans)
        defaults = VehicleToUgvConstants()
        return VehicleToUgvConstants(
            float(kv.get("l0", defaults.l0)), float(kv.get("h0", defaults.h0))
        ).transform()
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(str(exc), path) from None
