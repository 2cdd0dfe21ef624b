import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import crc16_bitwise
from wheelodom.errors import EmptyInputError
from wheelodom.protocol import (
    FRAME_SIZE,
    EncoderFrame,
    FrameParser,
    ParseDiagnostics,
    crc16_ccitt_false,
    encode_frame,
    encode_ticklog,
    frames_to_ticklog,
    parse_stream,
    read_ticks_file,
    write_ticks_file,
)
from wheelodom.ticklog import TickLog

# frozen from the bit-serial oracle in tests/oracles.py
ZERO_FRAME_CRC = 0xD70E

frames_st = st.builds(
    EncoderFrame,
    st.integers(0, 2**64 - 1),
    st.integers(-(2**31), 2**31 - 1),
    st.integers(-(2**31), 2**31 - 1),
)


def test_oracle_check_value():
    assert crc16_bitwise(b"123456789") == 0x29B1


def test_crc_matches_oracle():
    rng = np.random.default_rng(0)
    for n in (0, 1, 17, 100):
        data = rng.integers(0, 256, n, dtype=np.uint8).tobytes()
        assert crc16_ccitt_false(data) == crc16_bitwise(data)
    assert crc16_ccitt_false(b"123456789") == 0x29B1


def test_zero_frame_bytes():
    raw = encode_frame(EncoderFrame(0, 0, 0))
    assert len(raw) == FRAME_SIZE
    assert raw[:3] == b"\xaa\x55\x01"
    assert raw[3:19] == bytes(16)
    assert crc16_bitwise(bytes([1]) + bytes(16)) == ZERO_FRAME_CRC
    assert raw[19:] == struct.pack("<H", ZERO_FRAME_CRC) == b"\x0e\xd7"


def test_negative_ticks_twos_complement():
    raw = encode_frame(EncoderFrame(5, -1, 2))
    assert raw[11:15] == b"\xff\xff\xff\xff"
    assert raw[15:19] == b"\x02\x00\x00\x00"
    assert raw[3:11] == (5).to_bytes(8, "little")


@given(frames_st)
def test_round_trip(frame):
    frames, diag = parse_stream(encode_frame(frame))
    assert frames == [frame]
    assert diag.total() == 0


@given(st.lists(frames_st, max_size=20))
def test_concatenation(frames):
    out, diag = parse_stream(b"".join(encode_frame(f) for f in frames))
    assert out == frames
    assert diag.total() == 0


def test_every_single_bit_flip_detected():
    raw = bytearray(encode_frame(EncoderFrame(123456789, -42, 99999)))
    positions = range(2 * 8, FRAME_SIZE * 8)
    assert len(positions) == 152
    for bit in positions:
        bad = bytearray(raw)
        bad[bit // 8] ^= 1 << (bit % 8)
        frames, diag = parse_stream(bytes(bad))
        assert frames == []
        assert diag.bad_crc == 1


def test_flipped_frame_then_recovery():
    good = [EncoderFrame(t, t * 3, -t) for t in range(1, 6)]
    chunks = [bytearray(encode_frame(f)) for f in good]
    chunks[1][8] ^= 0x10
    frames, diag = parse_stream(b"".join(chunks))
    assert frames == [good[0]] + good[2:]
    assert diag.bad_crc == 1


def test_garbage_prefix():
    good = [EncoderFrame(t, t, t) for t in range(3)]
    data = b"\x13\x37\xaa\x00\xaa\x55\x01garbage" + b"".join(encode_frame(f) for f in good)
    frames, diag = parse_stream(data)
    assert frames == good
    assert diag.resyncs >= 1
    assert diag.skipped_bytes == 14
    assert diag.as_dict()["skipped_bytes"] == 14


def test_bad_version_counted():
    body = struct.pack("<BQii", 2, 1, 2, 3)
    raw = b"\xaa\x55" + body + struct.pack("<H", crc16_ccitt_false(body))
    frames, diag = parse_stream(raw + encode_frame(EncoderFrame(9, 9, 9)))
    assert frames == [EncoderFrame(9, 9, 9)]
    assert diag.bad_version == 1


def test_trailing_partial():
    raw = encode_frame(EncoderFrame(1, 2, 3))
    frames, diag = parse_stream(raw + raw[:10])
    assert len(frames) == 1
    assert diag.trailing_partial == 1


def test_resumable_any_chunking():
    good = [EncoderFrame(t, -t, 2 * t) for t in range(40)]
    data = b"".join(encode_frame(f) for f in good)
    rng = np.random.default_rng(1)
    cuts = np.sort(rng.choice(len(data), 30, replace=False))
    parser = FrameParser()
    out = []
    for a, b in zip(np.concatenate(([0], cuts)), np.concatenate((cuts, [len(data)]))):
        out.extend(parser.feed(data[a:b]))
    diag = parser.finish()
    assert out == good
    assert diag.total() == 0


def test_sync_split_across_chunks():
    raw = encode_frame(EncoderFrame(7, 8, 9))
    parser = FrameParser()
    assert parser.feed(b"\x00" + raw[:1]) == []
    assert parser.feed(raw[1:]) == [EncoderFrame(7, 8, 9)]


class TestFramesToTicklog:
    def test_empty(self):
        with pytest.raises(EmptyInputError):
            frames_to_ticklog([])

    def test_wrap_around(self):
        frames = [EncoderFrame(1, 2147483640, 0), EncoderFrame(2, -2147483640, 0)]
        log = frames_to_ticklog(frames)
        assert log.left.tolist() == [2147483640, 2147483656]

    def test_wrap_backwards(self):
        frames = [EncoderFrame(1, -2147483640, 0), EncoderFrame(2, 2147483640, 0)]
        assert frames_to_ticklog(frames).left.tolist() == [-2147483640, -2147483656]

    def test_monotone_identity(self):
        frames = [EncoderFrame(t, t * 100, -t * 7) for t in range(10)]
        log = frames_to_ticklog(frames)
        assert log.left.tolist() == [f.left_cum_ticks for f in frames]
        assert log.right.tolist() == [f.right_cum_ticks for f in frames]

    def test_duplicate_timestamp_dropped(self):
        diag = ParseDiagnostics()
        frames = [EncoderFrame(1, 0, 0), EncoderFrame(1, 5, 5), EncoderFrame(2, 6, 6), EncoderFrame(0, 7, 7)]
        log = frames_to_ticklog(frames, diag)
        assert log.timestamps_us.tolist() == [1, 2]
        assert log.left.tolist() == [0, 6]
        assert diag.non_monotonic == 2


def test_large_logical_counts_survive_wire(tmp_path):
    # steps stay under the 2**30 unwrap limit but the total passes 2**32
    left = np.arange(7, dtype=np.int64) * (2**30 - 100)
    log = TickLog(np.arange(7), left, -left)
    path = tmp_path / "run.ticks"
    write_ticks_file(log, path)
    back, diag = read_ticks_file(path)
    assert back == log
    assert diag.total() == 0
    assert len(encode_ticklog(log)) == 7 * FRAME_SIZE
