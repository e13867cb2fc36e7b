import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tsencode import core
from tsencode.core import Dataset, ExampleLabels, NormStats, TimeSeries, concat_segments, normalize_minmax, segment_signal
from tsencode.errors import IngestionError, LengthError, SegmentationError, ShapeError, ValidationError

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_segment_48_by_4_round_trips():
    x = np.arange(48.0)
    segs = segment_signal(x, 4)
    assert len(segs) == 12
    assert all(s.shape == (4,) for s in segs)
    np.testing.assert_array_equal(np.concatenate(segs), x)


def test_segment_single_value():
    segs = segment_signal([5.0], 1)
    assert len(segs) == 1 and segs[0].tolist() == [5.0]


def test_segment_zero_padding():
    x = np.arange(1.0, 11.0)
    segs = segment_signal(x, 4, pad_zero=True)
    assert len(segs) == 3
    assert segs[-1].tolist() == [9.0, 10.0, 0.0, 0.0]


def test_segment_errors():
    with pytest.raises(SegmentationError):
        segment_signal(np.arange(10.0), 4)
    with pytest.raises(SegmentationError):
        segment_signal(np.arange(3.0), 4)
    with pytest.raises(ValidationError):
        segment_signal([1.0, float("nan")], 1)
    with pytest.raises(SegmentationError):
        segment_signal([1.0], 0)


def test_concat_examples():
    assert concat_segments([[1, 2], [3, 4]], 4).tolist() == [1, 2, 3, 4]
    assert concat_segments([[1, 2], [3, 0]], 3).tolist() == [1, 2, 3]
    with pytest.raises(LengthError):
        concat_segments([[1, 2]], 3)
    with pytest.raises(LengthError):
        concat_segments([], 0)


@given(st.integers(1, 12), st.integers(1, 10), st.data())
def test_segment_concat_identity(n, n_seg, data):
    x = data.draw(arrays(float, n * n_seg, elements=finite))
    segs = segment_signal(x, n)
    assert len(segs) == n_seg
    np.testing.assert_array_equal(concat_segments(segs, x.size), x)


@given(arrays(float, st.integers(1, 60), elements=finite), st.data())
def test_padded_count_and_truncation(x, data):
    n = data.draw(st.integers(1, x.size))
    segs = segment_signal(x, n, pad_zero=True)
    assert len(segs) == math.ceil(x.size / n)
    np.testing.assert_array_equal(concat_segments(segs, x.size), x)


def _series(rows):
    rows = np.asarray(rows, dtype=float)
    return TimeSeries(tuple(f"f{i}" for i in range(len(rows))), rows)


def test_normalize_examples():
    out, stats, clamped = normalize_minmax(_series([[0, 5, 10], [7, 7, 7]]))
    assert out.values.tolist() == [[0, 0.5, 1], [0, 0, 0]]
    assert clamped == 0
    assert stats.mins.tolist() == [0, 7] and stats.maxs.tolist() == [10, 7]


def test_normalize_clamps_under_supplied_stats():
    s = _series([[12.0, 5.0, -1.0]])
    out, _, clamped = normalize_minmax(s, NormStats(("f0",), [0.0], [10.0]))
    assert out.values.tolist() == [[1.0, 0.5, 0.0]]
    assert clamped == 2


@given(arrays(float, (3, 7), elements=finite))
def test_normalize_range_and_idempotence(values):
    s = _series(values)
    once, stats, _ = normalize_minmax(s)
    assert np.all((once.values >= 0) & (once.values <= 1))
    again, _, _ = normalize_minmax(s, stats)
    np.testing.assert_array_equal(once.values, again.values)


def test_timeseries_invariants():
    with pytest.raises(ValidationError):
        _series([[1.0, float("inf")]])
    with pytest.raises(ShapeError):
        TimeSeries(("a", "b"), np.zeros((1, 3)))
    s = _series([[1.0, 2.0]])
    assert s.values.flags.writeable is False


def test_dataset_rejects_shape_mismatch():
    a = _series(np.zeros((2, 4)))
    b = _series(np.zeros((2, 5)))
    with pytest.raises(ShapeError):
        Dataset((("a", a), ("b", b)))
    with pytest.raises(ValidationError):
        Dataset((("a", a),), {"zzz": ExampleLabels(1)})


def test_dataset_round_trip(tmp_path, small_dataset):
    core.write_dataset(tmp_path, small_dataset)
    back = core.read_dataset(tmp_path)
    assert back.ids == small_dataset.ids
    assert back.labels == dict(small_dataset.labels)
    np.testing.assert_array_equal(back.stack(), small_dataset.stack())


def test_csv_layout_is_time_major(tmp_path):
    s = TimeSeries(("hr", "bp"), [[1.5, 2.0, 3.0], [0.1, 0.2, 0.3]])
    core.write_series_csv(tmp_path / "e.csv", s)
    assert (tmp_path / "e.csv").read_text() == "hr,bp\n1.5,0.1\n2.0,0.2\n3.0,0.3\n"


def test_ingestion_errors_name_the_file(tmp_path):
    (tmp_path / "bad.csv").write_text("a,b\n1,x\n")
    with pytest.raises(IngestionError, match="bad.csv"):
        core.read_dataset(tmp_path)
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    (tmp_path / "labels.csv").write_text("example_id,task_label\nbad,2\n")
    with pytest.raises(IngestionError, match="labels.csv"):
        core.read_dataset(tmp_path)
    with pytest.raises(IngestionError, match="nope"):
        core.read_dataset(tmp_path / "nope")
