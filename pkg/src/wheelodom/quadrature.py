"""x4 quadrature decoding of two-channel A/B encoder levels.

Forward rotation is the Gray cycle ``00 -> 01 -> 11 -> 10 -> 00`` (levels
written as ``AB``); every edge on either channel counts once, so one
electrical period is 4 counts and a 1024 PPR encoder gives 4096 counts per
revolution.  A sample in which both channels changed is an illegal
transition: a missed sample or a glitch, never interpolated.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import IllegalTransitionError, ParseError, ValidationError
from .ticklog import TickLog

QUAD_HEADER = ("timestamp_us", "a", "b")

# state code = (a << 1) | b, listed in forward order
GRAY_SEQUENCE = np.array([0b00, 0b01, 0b11, 0b10], dtype=np.uint8)
_POSITION = {int(code): i for i, code in enumerate(GRAY_SEQUENCE)}

_ILLEGAL = 2


def _build_table():
    table = np.zeros(16, dtype=np.int8)
    for prev in range(4):
        for nxt in range(4):
            step = (_POSITION[nxt] - _POSITION[prev]) % 4
            table[prev * 4 + nxt] = {0: 0, 1: 1, 2: _ILLEGAL, 3: -1}[step]
    return table


TRANSITION_TABLE = _build_table()

POLICIES = ("fail", "skip-and-count")


class QuadState(NamedTuple):
    a: int
    b: int

    @property
    def code(self):
        return (self.a << 1) | self.b


def _as_state(s):
    a, b = s
    if a not in (0, 1) or b not in (0, 1):
        raise ValidationError(f"quadrature levels must be 0 or 1, got {s!r}")
    return QuadState(int(a), int(b))


def decode_transition(prev, nxt) -> int:
    """Count change between two consecutive ``(a, b)`` samples: -1, 0 or +1."""
    p, n = _as_state(prev), _as_state(nxt)
    step = int(TRANSITION_TABLE[p.code * 4 + n.code])
    if step == _ILLEGAL:
        raise IllegalTransitionError(p, n)
    return step


@dataclass(frozen=True, eq=False)
class QuadSampleStream:
    timestamps_us: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        t = np.array(self.timestamps_us, dtype=np.uint64).reshape(-1)
        a = np.array(self.a, dtype=np.uint8).reshape(-1)
        b = np.array(self.b, dtype=np.uint8).reshape(-1)
        if not (len(t) == len(a) == len(b)):
            raise ValidationError("timestamp and level columns differ in length")
        if np.any(a > 1) or np.any(b > 1):
            raise ValidationError("quadrature levels must be 0 or 1")
        if len(t) > 1 and not np.all(t[1:] >= t[:-1]):
            raise ValidationError("quadrature timestamps must be non-decreasing")
        for arr in (t, a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "timestamps_us", t)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __len__(self):
        return len(self.timestamps_us)

    @property
    def codes(self):
        return (self.a << 1) | self.b

    def reversed(self):
        """The level sequence played backwards, mirrored about the last timestamp.

        ``stream + stream.reversed()`` is therefore a valid stream.
        """
        t = self.timestamps_us
        if len(t) == 0:
            return self
        t_rev = t[-1] + (t[-1] - t[::-1])
        return QuadSampleStream(t_rev, self.a[::-1], self.b[::-1])

    def __add__(self, other):
        if not isinstance(other, QuadSampleStream):
            return NotImplemented
        return QuadSampleStream(
            np.concatenate((self.timestamps_us, other.timestamps_us)),
            np.concatenate((self.a, other.a)),
            np.concatenate((self.b, other.b)),
        )


@dataclass(frozen=True, eq=False)
class DecodedCounts:
    timestamps_us: np.ndarray
    counts: np.ndarray
    illegal_transitions: int = 0

    def __len__(self):
        return len(self.timestamps_us)

    @property
    def final(self):
        return int(self.counts[-1]) if len(self.counts) else 0

    def counts_at(self, timestamps_us):
        """Sample-and-hold count at each query time (0 before the first sample)."""
        q = np.asarray(timestamps_us, dtype=np.uint64)
        idx = np.searchsorted(self.timestamps_us, q, side="right") - 1
        out = np.zeros(len(q), dtype=np.int64)
        ok = idx >= 0
        out[ok] = self.counts[idx[ok]]
        return out


def decode_stream(stream: QuadSampleStream, policy: str = "fail") -> DecodedCounts:
    """Fold the transition table over a level stream, counting from 0.

    Under ``"fail"`` the first illegal transition raises with its sample
    index.  Under ``"skip-and-count"`` (alias ``"skip"``) the offending
    sample contributes 0, decoding resumes from its state, and the number of
    such samples is reported in ``illegal_transitions``.
    """
    if policy == "skip":
        policy = "skip-and-count"
    if policy not in POLICIES:
        raise ValidationError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    n = len(stream)
    if n == 0:
        return DecodedCounts(stream.timestamps_us, np.zeros(0, np.int64), 0)
    codes = stream.codes.astype(np.intp)
    steps = TRANSITION_TABLE[codes[:-1] * 4 + codes[1:]].astype(np.int64)
    illegal = steps == _ILLEGAL
    n_illegal = int(illegal.sum())
    if n_illegal and policy == "fail":
        k = int(np.argmax(illegal))
        prev = QuadState(int(stream.a[k]), int(stream.b[k]))
        nxt = QuadState(int(stream.a[k + 1]), int(stream.b[k + 1]))
        raise IllegalTransitionError(prev, nxt, index=k + 1)
    steps[illegal] = 0
    counts = np.concatenate(([0], np.cumsum(steps)))
    return DecodedCounts(stream.timestamps_us, counts, n_illegal)


def decoded_to_ticklog(left: DecodedCounts, right: DecodedCounts) -> TickLog:
    """Merge two wheels' decoded counts onto their union of timestamps.

    Each wheel's count is held from its latest sample at or before each
    timestamp; repeated timestamps keep the last sample.
    """
    ts = np.union1d(left.timestamps_us, right.timestamps_us).astype(np.uint64)
    return TickLog(ts, left.counts_at(ts), right.counts_at(ts))


def read_quadrature_csv(path) -> QuadSampleStream:
    path = Path(path)
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or tuple(lines[0].split(",")) != QUAD_HEADER:
        raise ParseError(f"expected header {','.join(QUAD_HEADER)!r}", path, 1)
    ts, a, b = [], [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        if raw == "" and lineno == len(lines):
            continue
        fields = raw.split(",")
        if len(fields) != 3:
            raise ParseError(f"expected 3 columns, got {len(fields)}", path, lineno)
        try:
            t = int(fields[0], 10)
        except ValueError:
            raise ParseError(f"bad timestamp {fields[0]!r}", path, lineno) from None
        if t < 0 or (ts and t < ts[-1]):
            raise ParseError("timestamps must be non-negative and non-decreasing", path, lineno)
        if fields[1] not in ("0", "1") or fields[2] not in ("0", "1"):
            raise ParseError(f"levels must be 0 or 1, got {raw!r}", path, lineno)
        ts.append(t)
        a.append(int(fields[1]))
        b.append(int(fields[2]))
    return QuadSampleStream(np.array(ts, dtype=np.uint64), a, b)


def write_quadrature_csv(stream: QuadSampleStream, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(QUAD_HEADER) + "\n")
        for t, a, b in zip(stream.timestamps_us.tolist(), stream.a.tolist(), stream.b.tolist()):
            fh.write(f"{t},{a},{b}\n")
