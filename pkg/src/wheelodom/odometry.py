"""Differential-drive dead reckoning from rear-wheel encoder counts.

Each step advances the pose along the heading held *before* the step,
then updates the heading from the wheel travel difference::

    x += (d_l + d_r) / 2 * cos(theta)
    y += (d_l + d_r) / 2 * sin(theta)
    theta += (d_r - d_l) / L

Heading is never wrapped during integration; use :func:`normalize_angle`
for display.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EmptyInputError, FitDegenerateError, ParseError, StepTooLargeError, ValidationError
from .ticklog import TickLog

ENCODER_PPR = 1024
DEFAULT_COUNTS_PER_REV = 4 * ENCODER_PPR
DEFAULT_MAX_STEP_M = 1.0


@dataclass(frozen=True)
class WheelParams:
    """Wheel geometry: baseline ``L``, radius ``R`` and decoded counts per revolution."""

    wheel_base_m: float
    wheel_radius_m: float
    counts_per_rev: int = DEFAULT_COUNTS_PER_REV

    def __post_init__(self):
        for name in ("wheel_base_m", "wheel_radius_m"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be a finite positive number, got {v!r}")
            object.__setattr__(self, name, float(v))
        c = self.counts_per_rev
        if isinstance(c, bool) or not isinstance(c, (int, np.integer)) or c <= 0:
            raise ValidationError(f"counts_per_rev must be a positive integer, got {c!r}")
        object.__setattr__(self, "counts_per_rev", int(c))

    @property
    def tick_quantum_m(self):
        """Wheel travel represented by one count."""
        return 2.0 * math.pi * self.wheel_radius_m / self.counts_per_rev


# Hand-measured geometry and the grid-search optimum reported for the flatbed car.
MEASURED_PARAMS = WheelParams(0.7, 0.1575)
OPTIMIZED_PARAMS = WheelParams(0.64, 0.164)


@dataclass(frozen=True)
class Pose2D:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "theta"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValidationError(f"pose {name} is not finite: {v!r}")
            object.__setattr__(self, name, v)

    def as_array(self):
        return np.array([self.x, self.y, self.theta])


class WheelDelta(NamedTuple):
    d_left_m: float
    d_right_m: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Timestamped planar poses, shape ``(n, 3)`` as ``x, y, theta``.

    ``travel`` optionally holds the signed mean wheel travel of each of the
    ``n - 1`` steps; integrated trajectories always carry it.
    """

    timestamps_us: np.ndarray
    poses: np.ndarray
    travel: np.ndarray | None = None

    def __post_init__(self):
        t = np.array(self.timestamps_us, dtype=np.uint64).reshape(-1)
        p = np.array(self.poses, dtype=float).reshape(-1, 3)
        if len(t) == 0:
            raise EmptyInputError("trajectory must contain at least one pose")
        if len(t) != len(p):
            raise ValidationError(f"{len(t)} timestamps for {len(p)} poses")
        if not np.all(t[1:] > t[:-1]):
            raise ValidationError("trajectory timestamps must be strictly increasing")
        if not np.all(np.isfinite(p)):
            raise ValidationError("trajectory contains non-finite poses")
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "timestamps_us", t)
        object.__setattr__(self, "poses", p)
        if self.travel is not None:
            d = np.array(self.travel, dtype=float).reshape(-1)
            if len(d) != len(p) - 1:
                raise ValidationError("travel must have one entry per step")
            d.setflags(write=False)
            object.__setattr__(self, "travel", d)

    def __len__(self):
        return len(self.timestamps_us)

    @property
    def positions(self):
        return self.poses[:, :2]

    @property
    def initial(self):
        return Pose2D(*self.poses[0])

    @property
    def final(self):
        return Pose2D(*self.poses[-1])


def normalize_angle(theta):
    """Wrap an angle (or array of angles) into ``(-pi, pi]``."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), 2.0 * np.pi)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def ticks_to_travel(delta_ticks, params: WheelParams):
    """Arc length rolled by a wheel for ``delta_ticks`` counts (scalar or array)."""
    if np.ndim(delta_ticks) == 0:
        return params.wheel_radius_m * delta_ticks * 2.0 * math.pi / params.counts_per_rev
    d = np.asarray(delta_ticks, dtype=float)
    return params.wheel_radius_m * d * 2.0 * math.pi / params.counts_per_rev


def _check_delta(d_left, d_right, max_step_m, index=None):
    if not (math.isfinite(d_left) and math.isfinite(d_right)):
        raise StepTooLargeError(d_left, d_right, max_step_m, index)
    if abs(d_left) > max_step_m or abs(d_right) > max_step_m:
        raise StepTooLargeError(d_left, d_right, max_step_m, index)


def integrate_step(pose: Pose2D, delta: WheelDelta, params: WheelParams,
                   max_step_m: float = DEFAULT_MAX_STEP_M) -> Pose2D:
    d_l, d_r = float(delta[0]), float(delta[1])
    _check_delta(d_l, d_r, max_step_m)
    mean = (d_l + d_r) / 2.0
    return Pose2D(
        pose.x + mean * math.cos(pose.theta),
        pose.y + mean * math.sin(pose.theta),
        pose.theta + (d_r - d_l) / params.wheel_base_m,
    )


def integrate_deltas(d_left, d_right, params: WheelParams, initial: Pose2D = Pose2D(),
                     max_step_m: float = DEFAULT_MAX_STEP_M):
    """Integrate per-step wheel travel arrays; returns ``(poses, mean_travel)``.

    Equivalent to folding :func:`integrate_step` over the steps, but each
    running sum is formed sequentially with ``cumsum`` seeded by the
    initial value, so rounding matches the step-by-step fold.
    """
    d_left = np.asarray(d_left, dtype=float)
    d_right = np.asarray(d_right, dtype=float)
    bad = ~(np.isfinite(d_left) & np.isfinite(d_right)) | (np.abs(d_left) > max_step_m) | (
        np.abs(d_right) > max_step_m
    )
    if bad.any():
        k = int(np.argmax(bad))
        raise StepTooLargeError(float(d_left[k]), float(d_right[k]), max_step_m, index=k)

    mean = (d_left + d_right) / 2.0
    dtheta = (d_right - d_left) / params.wheel_base_m
    n = len(mean) + 1
    theta = np.cumsum(np.concatenate(([initial.theta], dtheta)))
    poses = np.empty((n, 3))
    poses[:, 0] = np.cumsum(np.concatenate(([initial.x], mean * np.cos(theta[:-1]))))
    poses[:, 1] = np.cumsum(np.concatenate(([initial.y], mean * np.sin(theta[:-1]))))
    poses[:, 2] = theta
    return poses, mean


def integrate_log(log: TickLog, params: WheelParams, initial: Pose2D = Pose2D(),
                  max_step_m: float = DEFAULT_MAX_STEP_M) -> Trajectory:
    """Dead-reckon a tick log into a trajectory starting at ``initial``."""
    if len(log) == 0:
        raise EmptyInputError("cannot integrate an empty tick log")
    d_left = ticks_to_travel(np.diff(log.left), params)
    d_right = ticks_to_travel(np.diff(log.right), params)
    poses, mean = integrate_deltas(d_left, d_right, params, initial, max_step_m)
    return Trajectory(log.timestamps_us, poses, travel=mean)


def path_length(traj: Trajectory) -> float:
    """Total distance travelled (not displacement)."""
    if traj.travel is not None:
        return math.fsum(np.abs(traj.travel))
    steps = np.diff(traj.positions, axis=0)
    return math.fsum(np.hypot(steps[:, 0], steps[:, 1]))


def fit_circle(points):
    """Algebraic (Kasa) least-squares circle through ``(n, 2)`` points.

    Solves ``2 a x + 2 b y + c = x**2 + y**2`` in the least-squares sense
    on mean-centred coordinates.

    Returns
    -------
    centre : (2,) ndarray
    radius : float
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        raise FitDegenerateError(f"need at least 3 points, got {len(pts)}")
    mean = pts.mean(axis=0)
    u = pts - mean
    A = np.column_stack([2.0 * u, np.ones(len(u))])
    rhs = np.einsum("ij,ij->i", u, u)
    s = np.linalg.svd(A, compute_uv=False)
    # collinear points leave the (x, y) columns rank deficient
    if s[0] == 0 or s[-1] / s[0] < 1e-10:
        raise FitDegenerateError("points are collinear or coincident")
    (a, b, c), *_ = np.linalg.lstsq(A, rhs, rcond=None)
    r2 = c + a * a + b * b
    if not r2 > 0:
        raise FitDegenerateError("fit produced a non-positive squared radius")
    return mean + np.array([a, b]), math.sqrt(r2)


def circle_diameter(traj: Trajectory) -> float:
    """Diameter of the least-squares circle through the trajectory positions."""
    return 2.0 * fit_circle(traj.positions)[1]


def relative_error(measured: float, ground_truth: float) -> float:
    if not (math.isfinite(ground_truth) and ground_truth > 0):
        raise ValidationError(f"ground truth must be positive, got {ground_truth!r}")
    return abs(measured - ground_truth) / ground_truth


TRAJECTORY_HEADER = ("timestamp_us", "x", "y", "theta")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write ``timestamp_us,x,y,theta`` rows with round-trippable floats."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TRAJECTORY_HEADER) + "\n")
        for t, (x, y, th) in zip(traj.timestamps_us.tolist(), traj.poses.tolist()):
            fh.write(f"{t},{x!r},{y!r},{th!r}\n")


def read_trajectory_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or tuple(lines[0].split(",")) != TRAJECTORY_HEADER:
        raise ParseError(f"expected header {','.join(TRAJECTORY_HEADER)!r}", path, 1)
    ts, poses = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw:
            continue
        fields = raw.split(",")
        if len(fields) != 4:
            raise ParseError(f"expected 4 columns, got {len(fields)}", path, lineno)
        try:
            ts.append(int(fields[0]))
            poses.append([float(f) for f in fields[1:]])
        except ValueError:
            raise ParseError(f"malformed row {raw!r}", path, lineno) from None
    return Trajectory(np.array(ts, dtype=np.uint64), poses)
