import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import quadrature_levels
from wheelodom.errors import IllegalTransitionError, ParseError, ValidationError
from wheelodom.quadrature import (
    QuadSampleStream,
    decode_stream,
    decode_transition,
    decoded_to_ticklog,
    read_quadrature_csv,
    write_quadrature_csv,
)

# (prev, next) -> expected step, written out by hand; None = illegal
EXPECTED = {
    ((0, 0), (0, 0)): 0, ((0, 0), (0, 1)): +1, ((0, 0), (1, 0)): -1, ((0, 0), (1, 1)): None,
    ((0, 1), (0, 1)): 0, ((0, 1), (1, 1)): +1, ((0, 1), (0, 0)): -1, ((0, 1), (1, 0)): None,
    ((1, 1), (1, 1)): 0, ((1, 1), (1, 0)): +1, ((1, 1), (0, 1)): -1, ((1, 1), (0, 0)): None,
    ((1, 0), (1, 0)): 0, ((1, 0), (0, 0)): +1, ((1, 0), (1, 1)): -1, ((1, 0), (0, 1)): None,
}


def stream_from_counts(counts, t0=0):
    levels = quadrature_levels(counts)
    return QuadSampleStream(np.arange(t0, t0 + len(levels)), [a for a, _ in levels], [b for _, b in levels])


@pytest.mark.parametrize("prev,nxt", sorted(EXPECTED))
def test_transition_table(prev, nxt):
    expected = EXPECTED[(prev, nxt)]
    if expected is None:
        with pytest.raises(IllegalTransitionError):
            decode_transition(prev, nxt)
    else:
        assert decode_transition(prev, nxt) == expected


def test_table_partition():
    outcomes = []
    for prev, nxt in itertools.product(itertools.product((0, 1), repeat=2), repeat=2):
        try:
            outcomes.append(decode_transition(prev, nxt))
        except IllegalTransitionError:
            outcomes.append("err")
    assert outcomes.count(1) + outcomes.count(-1) == 8
    assert outcomes.count(0) == 4
    assert outcomes.count("err") == 4


def test_examples():
    assert decode_transition((0, 0), (0, 1)) == 1
    assert decode_transition((0, 1), (0, 0)) == -1
    with pytest.raises(IllegalTransitionError):
        decode_transition((0, 0), (1, 1))


def test_invalid_level():
    with pytest.raises(ValidationError):
        decode_transition((0, 2), (0, 0))


def test_full_cycle_is_four():
    s = QuadSampleStream([0, 1, 2, 3, 4], [0, 0, 1, 1, 0], [0, 1, 1, 0, 0])
    assert decode_stream(s).final == 4


def test_one_revolution_1024_ppr():
    s = stream_from_counts(range(4 * 1024 + 1))
    out = decode_stream(s)
    assert out.final == 4096
    assert out.illegal_transitions == 0


def test_empty_stream():
    out = decode_stream(QuadSampleStream([], [], []))
    assert len(out) == 0 and out.illegal_transitions == 0


def test_fail_policy_reports_index():
    s = QuadSampleStream([0, 1, 2, 3], [0, 0, 1, 1], [0, 1, 0, 0])  # 01 -> 10 at sample 2
    with pytest.raises(IllegalTransitionError) as info:
        decode_stream(s, "fail")
    assert info.value.index == 2


def test_skip_policy_resynchronizes():
    # 00 01 | 10 (illegal, counts 0) 00 (+1 from 10) 01 (+1)
    s = QuadSampleStream([0, 1, 2, 3, 4], [0, 0, 1, 0, 0], [0, 1, 0, 0, 1])
    out = decode_stream(s, "skip-and-count")
    assert out.illegal_transitions == 1
    assert out.counts.tolist() == [0, 1, 1, 2, 3]
    assert decode_stream(s, "skip").counts.tolist() == out.counts.tolist()


def test_unknown_policy():
    with pytest.raises(ValidationError):
        decode_stream(QuadSampleStream([], [], []), "interpolate")


def test_timestamps_must_not_decrease():
    with pytest.raises(ValidationError):
        QuadSampleStream([0, 2, 1], [0, 0, 0], [0, 0, 0])


walks = st.lists(st.sampled_from([-1, 0, 1]), max_size=300)


@given(walks)
def test_decode_follows_walk(steps):
    counts = np.concatenate(([0], np.cumsum(steps))).astype(int)
    out = decode_stream(stream_from_counts(counts.tolist()))
    assert out.counts.tolist() == counts.tolist()
    assert set(np.diff(out.counts).tolist()) <= {-1, 0, 1}


@given(walks)
def test_stream_then_reversal_is_zero(steps):
    counts = np.concatenate(([0], np.cumsum(steps))).astype(int)
    s = stream_from_counts(counts.tolist())
    assert decode_stream(s + s.reversed()).final == 0


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), max_size=200))
def test_skip_policy_deltas_bounded(levels):
    s = QuadSampleStream(range(len(levels)), [a for a, _ in levels], [b for _, b in levels])
    out = decode_stream(s, "skip")
    assert np.all(np.abs(np.diff(out.counts)) <= 1)


def test_counts_at_sample_and_hold():
    s = stream_from_counts([0, 1, 2, 3])
    out = decode_stream(QuadSampleStream([10, 20, 20, 30], s.a, s.b))
    assert out.counts_at([5, 10, 20, 25, 30, 99]).tolist() == [0, 0, 2, 2, 3, 3]


def test_merge_to_ticklog():
    left = decode_stream(QuadSampleStream([0, 10, 20], [0, 0, 1], [0, 1, 1]))
    right = decode_stream(QuadSampleStream([0, 15], [0, 1], [0, 0]))
    log = decoded_to_ticklog(left, right)
    assert log.timestamps_us.tolist() == [0, 10, 15, 20]
    assert log.left.tolist() == [0, 1, 1, 2]
    assert log.right.tolist() == [0, 0, -1, -1]


def test_csv_round_trip(tmp_path):
    s = stream_from_counts([0, 1, 2, 1, 0, -1])
    p = tmp_path / "q.csv"
    write_quadrature_csv(s, p)
    back = read_quadrature_csv(p)
    assert back.a.tolist() == s.a.tolist() and back.b.tolist() == s.b.tolist()
    assert p.read_text().splitlines()[0] == "timestamp_us,a,b"


@pytest.mark.parametrize("body", ["0,0,2\n", "0,0\n", "x,0,1\n", "5,0,0\n3,0,1\n"])
def test_csv_rejects(tmp_path, body):
    p = tmp_path / "q.csv"
    p.write_text("timestamp_us,a,b\n" + body)
    with pytest.raises(ParseError):
        read_quadrature_csv(p)
