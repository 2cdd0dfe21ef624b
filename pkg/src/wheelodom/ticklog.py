"""Tick logs and the plain-text file formats built around them.

A tick log is the cumulative signed count of each rear-wheel encoder,
sampled at strictly increasing microsecond timestamps.  On disk it is a CSV
with the exact header ``timestamp_us,left_ticks,right_ticks``.  Experiment
manifests are CSVs with header ``kind,gt_value_m,log_path``; relative log
paths resolve against the manifest's directory.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

TICKLOG_HEADER = ("timestamp_us", "left_ticks", "right_ticks")
MANIFEST_HEADER = ("kind", "gt_value_m", "log_path")
EXPERIMENT_KINDS = ("forward", "backward", "circle")


def _frozen(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TickLog:
    """Cumulative left/right encoder counts at strictly increasing times."""

    timestamps_us: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.timestamps_us)
        if t.size and (t.dtype.kind not in "iu" or t.min() < 0):
            raise ValidationError("timestamps must be non-negative integers")
        t = _frozen(np.array(t, dtype=np.uint64).reshape(-1))
        left = _frozen(np.array(self.left, dtype=np.int64).reshape(-1))
        right = _frozen(np.array(self.right, dtype=np.int64).reshape(-1))
        if not (len(t) == len(left) == len(right)):
            raise ValidationError(
                f"column lengths differ: {len(t)}, {len(left)}, {len(right)}"
            )
        if len(t) > 1 and not np.all(t[1:] > t[:-1]):
            k = int(np.argmin(t[1:] > t[:-1]))
            raise ValidationError(
                f"timestamps not strictly increasing at index {k + 1}"
            )
        object.__setattr__(self, "timestamps_us", t)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def __len__(self):
        return len(self.timestamps_us)

    def __eq__(self, other):
        if not isinstance(other, TickLog):
            return NotImplemented
        return (
            np.array_equal(self.timestamps_us, other.timestamps_us)
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
        )

    @classmethod
    def empty(cls):
        return cls(np.zeros(0, np.uint64), np.zeros(0, np.int64), np.zeros(0, np.int64))

    def rows(self):
        for t, l, r in zip(self.timestamps_us.tolist(), self.left.tolist(), self.right.tolist()):
            yield t, l, r


def _parse_int(text, path, line):
    s = text.strip()
    try:
        if s != text or not s:
            raise ValueError
        return int(s, 10)
    except ValueError:
        raise ParseError(f"not a base-10 integer: {text!r}", path, line) from None


def read_ticklog_csv(path) -> TickLog:
    """Read a tick log CSV. Parsing is strict; errors carry the line number."""
    path = Path(path)
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file, expected header", path, 1)
    if tuple(lines[0].split(",")) != TICKLOG_HEADER:
        raise ParseError(f"bad header {lines[0]!r}", path, 1)
    ts, left, right = [], [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        if raw == "":
            # tolerate a single trailing blank line only
            if lineno == len(lines):
                continue
            raise ParseError("blank line", path, lineno)
        fields = raw.split(",")
        if len(fields) != 3:
            raise ParseError(f"expected 3 columns, got {len(fields)}", path, lineno)
        t, l, r = (_parse_int(f, path, lineno) for f in fields)
        if t < 0:
            raise ParseError("negative timestamp", path, lineno)
        if ts and t <= ts[-1]:
            raise ParseError("timestamp not strictly increasing", path, lineno)
        ts.append(t)
        left.append(l)
        right.append(r)
    return TickLog(np.array(ts, dtype=np.uint64), left, right)


def write_ticklog_csv(log: TickLog, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TICKLOG_HEADER) + "\n")
        for t, l, r in log.rows():
            fh.write(f"{t},{l},{r}\n")


@dataclass(frozen=True)
class ManifestEntry:
    kind: str
    gt_value_m: float
    log_path: Path


def read_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    base = path.parent
    entries = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, expected header", path, 1) from None
        if tuple(h.strip() for h in header) != MANIFEST_HEADER:
            raise ParseError(f"bad header {','.join(header)!r}", path, 1)
        for row in reader:
            lineno = reader.line_num
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 columns, got {len(row)}", path, lineno)
            kind, gt, log_path = (c.strip() for c in row)
            if kind not in EXPERIMENT_KINDS:
                raise ParseError(f"unknown experiment kind {kind!r}", path, lineno)
            try:
                gt_value = float(gt)
            except ValueError:
                raise ParseError(f"not a number: {gt!r}", path, lineno) from None
            if not np.isfinite(gt_value) or gt_value <= 0:
                raise ParseError(f"ground truth must be > 0, got {gt!r}", path, lineno)
            p = Path(log_path)
            if not p.is_absolute():
                p = base / p
            entries.append(ManifestEntry(kind, gt_value, p))
    return entries


def write_manifest(entries, path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(MANIFEST_HEADER) + "\n")
        for e in entries:
            p = Path(e.log_path)
            try:
                p = Path(os.path.relpath(p, path.parent))
            except ValueError:
                pass
            fh.write(f"{e.kind},{e.gt_value_m!r},{p.as_posix()}\n")
