"""Exact differential-drive ground truth and the encoder data it would produce.

Command profiles are piecewise-constant ``(v, omega)`` segments sampled at
a fixed rate.  Wheel travel per step follows the inverse kinematics
``d_l = (v - omega L / 2) dt`` and ``d_r = (v + omega L / 2) dt``, and the
pose is stepped with the same Euler update the odometry integrator uses,
so a simulate -> integrate round trip differs only by tick quantization.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import AliasingError, ParseError, StepTooLargeError, ValidationError
from .odometry import DEFAULT_MAX_STEP_M, Pose2D, Trajectory, WheelParams, integrate_deltas
from .quadrature import GRAY_SEQUENCE, QuadSampleStream
from .ticklog import TickLog

PROFILE_HEADER = ("v", "omega", "duration_s")
MIN_OVERSAMPLE = 4


@dataclass(frozen=True)
class Segment:
    v: float
    omega: float
    duration_s: float

    def __post_init__(self):
        for name in ("v", "omega", "duration_s"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValidationError(f"segment {name} is not finite")
            object.__setattr__(self, name, val)
        if self.duration_s <= 0:
            raise ValidationError(f"segment duration must be > 0, got {self.duration_s}")


@dataclass(frozen=True)
class CommandProfile:
    segments: tuple
    sample_rate_hz: float

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        if not segs:
            raise ValidationError("command profile has no segments")
        rate = float(self.sample_rate_hz)
        if not (math.isfinite(rate) and 0 < rate <= 1e6):
            raise ValidationError(f"sample rate must be in (0, 1e6] Hz, got {self.sample_rate_hz!r}")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "sample_rate_hz", rate)

    @property
    def dt(self):
        return 1.0 / self.sample_rate_hz

    def steps_per_segment(self):
        """Whole sample periods per segment (duration rounded, at least one)."""
        return [max(1, round(s.duration_s * self.sample_rate_hz)) for s in self.segments]

    @classmethod
    def straight(cls, distance_m, speed=1.0, sample_rate_hz=100.0):
        """Drive ``distance_m`` along the current heading; negative means reverse."""
        v = math.copysign(abs(speed), distance_m)
        return cls(((v, 0.0, abs(distance_m) / abs(speed)),), sample_rate_hz)

    @classmethod
    def circle(cls, diameter_m, speed=1.0, turns=1.0, sample_rate_hz=100.0):
        """Counter-clockwise circle of the given diameter, ``turns`` times round."""
        omega = 2.0 * speed / diameter_m
        return cls(((speed, omega, turns * 2.0 * math.pi / omega),), sample_rate_hz)

    @classmethod
    def rotate(cls, angle_rad, omega=math.pi / 10, sample_rate_hz=100.0):
        w = math.copysign(abs(omega), angle_rad)
        return cls(((0.0, w, abs(angle_rad) / abs(omega)),), sample_rate_hz)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Pre-quantization trajectory plus cumulative wheel angles ``(n, 2)``, left then right."""

    trajectory: Trajectory
    wheel_angles: np.ndarray


def wheel_travel(profile: CommandProfile, params: WheelParams, max_step_m=DEFAULT_MAX_STEP_M):
    """Per-step ``(d_left, d_right)`` arrays for a profile."""
    dt = profile.dt
    half = params.wheel_base_m / 2.0
    d_l, d_r = [], []
    for seg, n in zip(profile.segments, profile.steps_per_segment()):
        dl = (seg.v - seg.omega * half) * dt
        dr = (seg.v + seg.omega * half) * dt
        if abs(dl) > max_step_m or abs(dr) > max_step_m:
            raise StepTooLargeError(dl, dr, max_step_m)
        d_l.append(np.full(n, dl))
        d_r.append(np.full(n, dr))
    return np.concatenate(d_l), np.concatenate(d_r)


def quantize_angles(angles, params: WheelParams):
    """Cumulative counter value for cumulative wheel angles: floor, residual carried."""
    return np.floor(np.asarray(angles) * params.counts_per_rev / (2.0 * math.pi)).astype(np.int64)


def sample_times(n_samples, sample_rate_hz, t0_us=0):
    k = np.arange(n_samples, dtype=np.float64)
    return np.uint64(t0_us) + np.round(k * (1e6 / sample_rate_hz)).astype(np.uint64)


def simulate(profile: CommandProfile, params: WheelParams, initial: Pose2D = Pose2D(),
             t0_us: int = 0, max_step_m: float = DEFAULT_MAX_STEP_M,
             tick_jitter: Callable[[int], np.ndarray] | None = None):
    """Generate ground truth and the ideal encoder tick log for a profile.

    ``tick_jitter(n)`` may return an ``(n, 2)`` integer array added to the
    quantized left/right counts; it models counter noise for robustness
    tests and is off by default.

    Returns
    -------
    (GroundTruth, TickLog)
    """
    d_l, d_r = wheel_travel(profile, params, max_step_m)
    poses, mean = integrate_deltas(d_l, d_r, params, initial, max_step_m)
    n = len(poses)
    ts = sample_times(n, profile.sample_rate_hz, t0_us)
    r = params.wheel_radius_m
    angles = np.column_stack([
        np.cumsum(np.concatenate(([0.0], d_l / r))),
        np.cumsum(np.concatenate(([0.0], d_r / r))),
    ])
    ticks = quantize_angles(angles, params)
    if tick_jitter is not None:
        jitter = np.asarray(tick_jitter(n))
        if jitter.shape != (n, 2) or jitter.dtype.kind not in "iu":
            raise ValidationError(f"tick_jitter must return an ({n}, 2) integer array")
        ticks = ticks + jitter.astype(np.int64)
    gt = GroundTruth(Trajectory(ts, poses, travel=mean), angles)
    return gt, TickLog(ts, ticks[:, 0], ticks[:, 1])


def uniform_jitter(max_ticks: int, seed=None):
    """A ``tick_jitter`` hook drawing independent integers in ``[-max_ticks, max_ticks]``."""
    rng = np.random.default_rng(seed)

    def hook(n):
        return rng.integers(-max_ticks, max_ticks + 1, size=(n, 2))

    return hook


def emit_quadrature(source, params: WheelParams, oversample_factor: int = MIN_OVERSAMPLE):
    """Synthesize A/B level streams for both wheels.

    ``source`` is a :class:`GroundTruth` (quantized here) or a
    :class:`TickLog`.  Each log interval is split into enough sub-samples
    that the fastest wheel gets ``oversample_factor`` samples per count, so
    every transition is a legal single-channel edge.  Decoding the streams
    and holding counts at the log timestamps reproduces the log's counts
    relative to its first sample.

    Returns
    -------
    (left, right) : QuadSampleStream
    """
    if oversample_factor < MIN_OVERSAMPLE:
        raise AliasingError(
            f"oversample_factor {oversample_factor} < {MIN_OVERSAMPLE}: edges could alias"
        )
    if isinstance(source, GroundTruth):
        ticks = quantize_angles(source.wheel_angles, params)
        ts = source.trajectory.timestamps_us
    elif isinstance(source, TickLog):
        ticks = np.column_stack([source.left, source.right])
        ts = source.timestamps_us
    else:
        raise TypeError(f"expected GroundTruth or TickLog, got {type(source).__name__}")

    if len(ts) == 0:
        empty = QuadSampleStream([], [], [])
        return empty, empty
    steps = np.abs(np.diff(ticks, axis=0))
    max_delta = int(steps.max()) if len(steps) else 0
    m = oversample_factor * max(1, max_delta)

    j = np.arange(1, m + 1, dtype=np.int64)
    # fraction of each interval's counts completed at sub-sample j
    t_parts = [ts[:1].astype(np.int64)]
    c_parts = [ticks[:1]]
    dts = np.diff(ts.astype(np.int64))
    for k in range(len(ts) - 1):
        delta = ticks[k + 1] - ticks[k]
        t_parts.append(int(ts[k]) + (j * dts[k] + m - 1) // m)
        c_parts.append(ticks[k] + np.sign(delta) * ((j[:, None] * np.abs(delta)) // m))
    t_all = np.concatenate(t_parts)
    counts = np.concatenate(c_parts)
    phase = GRAY_SEQUENCE[np.mod(counts, 4)]
    streams = tuple(
        QuadSampleStream(t_all, phase[:, w] >> 1, phase[:, w] & 1) for w in range(2)
    )
    return streams


def read_profile_csv(path, sample_rate_hz) -> CommandProfile:
    path = Path(path)
    segments = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty profile file, expected header v,omega,duration_s", path, 1)
        if tuple(h.strip() for h in header) != PROFILE_HEADER:
            raise ParseError(f"bad header {','.join(header)!r}", path, 1)
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 columns, got {len(row)}", path, reader.line_num)
            try:
                segments.append(tuple(float(c) for c in row))
            except ValueError:
                raise ParseError(f"non-numeric field in {row!r}", path, reader.line_num) from None
    if not segments:
        raise ParseError("profile has no segments", path)
    return CommandProfile(segments, sample_rate_hz)


def write_profile_csv(profile: CommandProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(PROFILE_HEADER) + "\n")
        for s in profile.segments:
            fh.write(f"{s.v!r},{s.omega!r},{s.duration_s!r}\n")
