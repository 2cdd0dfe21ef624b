"""21-byte encoder frames for the MCU -> cluster serial link.

Frame layout, multi-byte fields little-endian::

    offset  size  field
         0     2  sync 0xAA 0x55
         2     1  version (u8, = 1)
         3     8  timestamp_us (u64)
        11     4  left cumulative ticks (i32)
        15     4  right cumulative ticks (i32)
        19     2  CRC-16/CCITT-FALSE over bytes 2..18

CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
Counts on the wire are cumulative, so a lost frame loses no displacement;
the 32-bit counters wrap and are unwrapped by :func:`frames_to_ticklog`.
A ``.ticks`` file is a bare concatenation of frames.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, ValidationError
from .ticklog import TickLog

SYNC = b"\xaa\x55"
VERSION = 1
FRAME_SIZE = 21
_BODY = struct.Struct("<BQii")
_CRC = struct.Struct("<H")

_I32_MIN, _I32_MAX = -(2**31), 2**31 - 1
_U64_MAX = 2**64 - 1


def _make_crc_table(poly=0x1021):
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ poly) if crc & 0x8000 else (crc << 1)
        table.append(crc & 0xFFFF)
    return tuple(table)


_CRC_TABLE = _make_crc_table()


def crc16_ccitt_false(data, crc=0xFFFF):
    for b in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[(crc >> 8) ^ b]
    return crc


@dataclass(frozen=True)
class EncoderFrame:
    timestamp_us: int
    left_cum_ticks: int
    right_cum_ticks: int
    version: int = VERSION

    def __post_init__(self):
        if not 0 <= self.timestamp_us <= _U64_MAX:
            raise ValidationError(f"timestamp out of u64 range: {self.timestamp_us}")
        for name in ("left_cum_ticks", "right_cum_ticks"):
            v = getattr(self, name)
            if not _I32_MIN <= v <= _I32_MAX:
                raise ValidationError(f"{name} out of i32 range: {v}")
        if not 0 <= self.version <= 255:
            raise ValidationError(f"version out of u8 range: {self.version}")


def encode_frame(frame: EncoderFrame) -> bytes:
    body = _BODY.pack(frame.version, frame.timestamp_us, frame.left_cum_ticks, frame.right_cum_ticks)
    return SYNC + body + _CRC.pack(crc16_ccitt_false(body))


@dataclass
class ParseDiagnostics:
    bad_crc: int = 0
    bad_version: int = 0
    resyncs: int = 0
    trailing_partial: int = 0
    non_monotonic: int = 0
    skipped_bytes: int = 0

    def total(self):
        return self.bad_crc + self.bad_version + self.resyncs + self.trailing_partial + self.non_monotonic

    def as_dict(self):
        return {
            "bad_crc": self.bad_crc,
            "bad_version": self.bad_version,
            "resyncs": self.resyncs,
            "trailing_partial": self.trailing_partial,
            "non_monotonic": self.non_monotonic,
            "skipped_bytes": self.skipped_bytes,
        }


class FrameParser:
    """Resumable frame scanner over byte chunks.

    On a bad CRC or version the scan resumes one byte past the rejected
    sync word, so a valid frame starting anywhere inside a corrupted region
    is still found.  ``resyncs`` counts runs of bytes discarded while
    hunting for a sync word.
    """

    def __init__(self):
        self.diagnostics = ParseDiagnostics()
        self._buf = bytearray()
        self._hunting = False

    def _skip(self, n):
        if n <= 0:
            return
        if not self._hunting:
            self.diagnostics.resyncs += 1
            self._hunting = True
        self.diagnostics.skipped_bytes += n

    def feed(self, data) -> list[EncoderFrame]:
        buf = self._buf
        buf.extend(data)
        frames = []
        pos = 0
        n = len(buf)
        while True:
            i = buf.find(SYNC, pos)
            if i < 0:
                # keep a trailing 0xAA: it may start the next chunk's sync
                keep = 1 if n > pos and buf[n - 1] == SYNC[0] else 0
                self._skip(n - keep - pos)
                pos = n - keep
                break
            self._skip(i - pos)
            pos = i
            if n - pos < FRAME_SIZE:
                break
            body = bytes(buf[pos + 2:pos + 19])
            (crc,) = _CRC.unpack_from(buf, pos + 19)
            if crc16_ccitt_false(body) != crc:
                self.diagnostics.bad_crc += 1
            elif body[0] != VERSION:
                self.diagnostics.bad_version += 1
            else:
                version, t, left, right = _BODY.unpack(body)
                frames.append(EncoderFrame(t, left, right, version))
                pos += FRAME_SIZE
                self._hunting = False
                continue
            # rejected candidate: step past its first sync byte and hunt on
            self._skip(1)
            pos += 1
        del buf[:pos]
        return frames

    def finish(self) -> ParseDiagnostics:
        """Declare end of stream; leftover bytes become diagnostics."""
        if self._buf:
            if self._buf.startswith(SYNC):
                self.diagnostics.trailing_partial += 1
            else:
                self._skip(len(self._buf))
            self._buf.clear()
        return self.diagnostics


def parse_stream(data) -> tuple[list[EncoderFrame], ParseDiagnostics]:
    """Extract every valid frame from a byte string. Never raises on corruption."""
    parser = FrameParser()
    frames = parser.feed(data)
    return frames, parser.finish()


def frames_to_ticklog(frames, diagnostics: ParseDiagnostics | None = None) -> TickLog:
    """Unwrap 32-bit counters into 64-bit logical counts.

    Frames whose timestamp does not exceed the last accepted one are
    dropped (counted in ``diagnostics.non_monotonic``).  Unwrapping assumes
    the true change between accepted frames is below 2**30 counts.
    """
    frames = list(frames)
    if not frames:
        raise EmptyInputError("no frames to convert")
    ts, left, right = [], [], []
    raw_l = raw_r = None
    for f in frames:
        if ts and f.timestamp_us <= ts[-1]:
            if diagnostics is not None:
                diagnostics.non_monotonic += 1
            continue
        if raw_l is None:
            left.append(f.left_cum_ticks)
            right.append(f.right_cum_ticks)
        else:
            left.append(left[-1] + _wrap_delta(f.left_cum_ticks - raw_l))
            right.append(right[-1] + _wrap_delta(f.right_cum_ticks - raw_r))
        raw_l, raw_r = f.left_cum_ticks, f.right_cum_ticks
        ts.append(f.timestamp_us)
    return TickLog(np.array(ts, dtype=np.uint64), left, right)


def _wrap_delta(d):
    return ((d + 2**31) % 2**32) - 2**31


def ticklog_to_frames(log: TickLog) -> list[EncoderFrame]:
    """Frames for a tick log, with logical counts wrapped to the i32 wire field."""
    return [EncoderFrame(t, _wrap_delta(l), _wrap_delta(r)) for t, l, r in log.rows()]


def encode_ticklog(log: TickLog) -> bytes:
    return b"".join(encode_frame(f) for f in ticklog_to_frames(log))


def write_ticks_file(log: TickLog, path) -> None:
    Path(path).write_bytes(encode_ticklog(log))


def read_ticks_file(path) -> tuple[TickLog, ParseDiagnostics]:
    """Parse a ``.ticks`` file; the first frame's wire counts seed the logical counts."""
    frames, diag = parse_stream(Path(path).read_bytes())
    return frames_to_ticklog(frames, diag), diag
