import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tsencode import core, pipeline, qsim
from tsencode.core import EncodingKey, NormStats, TimeSeries
from tsencode.errors import ConfigError, IngestionError, SegmentationError, ShapeError, ValidationError
from tsencode.pipeline import encode_dataset, encode_series, encode_signal, generate_key


def identity_key(n=4, normalize=False):
    return EncodingKey("random_projection", n, normalize, projection=np.eye(n))


def empty_circuit_key(n=4):
    return EncodingKey("quantum", n, True, circuit=qsim.CircuitSpec(n, 0, np.zeros((0, n)), ()))


def test_generate_quantum_key():
    key = generate_key("quantum", 4, 7, layers=2)
    a = key.circuit.rx_angles
    assert a.shape == (2, 4)
    assert np.all((a >= 0) & (a < 2 * math.pi))
    assert key.circuit.cnot_pattern == (qsim.ring_pattern(4),) * 2
    assert key.provenance_seed == 7


def test_generate_projection_key():
    key = generate_key("random_projection", 4, 7)
    assert key.projection.shape == (4, 4) and key.circuit is None
    assert generate_key("random-projection", 4, 7).projection.tolist() == key.projection.tolist()


def test_key_json_deterministic():
    a = json.dumps(pipeline.key_to_json(generate_key("quantum", 4, 7)))
    b = json.dumps(pipeline.key_to_json(generate_key("quantum", 4, 7)))
    assert a == b
    assert pipeline.key_fingerprint(generate_key("quantum", 4, 7)) != pipeline.key_fingerprint(generate_key("quantum", 4, 8))


def test_key_generation_errors():
    with pytest.raises(ConfigError):
        generate_key("fourier", 4, 1)
    with pytest.raises(ConfigError):
        generate_key("quantum", 0, 1)
    with pytest.raises(ConfigError):
        generate_key("quantum", 13, 1)
    with pytest.raises(ConfigError):
        generate_key("quantum", 4, 1, cnot="star")


def test_key_invariants():
    with pytest.raises(ConfigError):
        EncodingKey("quantum", 4, projection=np.eye(4))
    with pytest.raises(ShapeError):
        EncodingKey("random_projection", 4, projection=np.eye(3))
    with pytest.raises(ConfigError):
        EncodingKey("quantum", 3, circuit=qsim.CircuitSpec(4, 0, [], ()))
    with pytest.raises(ValidationError):
        EncodingKey("random_projection", 2, projection=[[1, float("nan")], [0, 1]])


@pytest.mark.parametrize("method", ["quantum", "random_projection"])
def test_key_file_round_trip(tmp_path, method):
    key = generate_key(method, 4, 11)
    fp = pipeline.save_key(key, tmp_path / "k.json")
    back = pipeline.load_key(tmp_path / "k.json")
    assert pipeline.key_fingerprint(back) == fp
    assert pipeline.canonical_key_bytes(back) == pipeline.canonical_key_bytes(key)


def test_load_key_errors(tmp_path):
    with pytest.raises(IngestionError, match="missing.json"):
        pipeline.load_key(tmp_path / "missing.json")
    (tmp_path / "k.json").write_text("{")
    with pytest.raises(IngestionError, match="k.json"):
        pipeline.load_key(tmp_path / "k.json")
    (tmp_path / "k.json").write_text('{"version": 2}')
    with pytest.raises(ConfigError):
        pipeline.load_key(tmp_path / "k.json")


def test_encode_signal_examples():
    x = np.random.default_rng(0).standard_normal(12)
    np.testing.assert_array_equal(encode_signal(x, identity_key()), x)
    np.testing.assert_array_equal(encode_signal(np.zeros(12), empty_circuit_key()), np.ones(12))


def test_encode_signal_padding():
    x = np.linspace(0, 1, 10)
    with pytest.raises(SegmentationError):
        encode_signal(x, empty_circuit_key())
    out = encode_signal(x, empty_circuit_key(), pad_zero=True)
    np.testing.assert_allclose(out, np.cos(np.pi * x), atol=1e-12)


def test_quantum_rejects_unnormalized_input():
    key = generate_key("quantum", 4, 1, normalize=False)
    with pytest.raises(ValidationError):
        encode_signal(np.array([0.0, 0.5, 1.5, 0.2]), key)


keys = st.sampled_from(
    [generate_key("quantum", 4, 7), generate_key("random_projection", 4, 7), generate_key("quantum", 3, 2, layers=3, cnot="chain")]
)


@given(keys, st.integers(1, 5), st.integers(0, 2**32 - 1), st.data())
def test_segment_locality(key, n_seg, seed, data):
    n = key.segment_len
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, n * n_seg)
    j = data.draw(st.integers(0, n_seg - 1))
    y = x.copy()
    y[j * n : (j + 1) * n] = rng.uniform(0, 1, n)
    ex, ey = encode_signal(x, key), encode_signal(y, key)
    outside = np.ones(x.size, bool)
    outside[j * n : (j + 1) * n] = False
    assert np.array_equal(ex[outside], ey[outside])


@given(keys, st.integers(1, 6), st.integers(1, 5), st.integers(0, 2**32 - 1), st.data())
def test_series_shape_and_signal_independence(key, F, n_seg, seed, data):
    T = key.segment_len * n_seg
    rng = np.random.default_rng(seed)
    names = tuple(f"f{i}" for i in range(F))
    s = TimeSeries(names, rng.standard_normal((F, T)))
    out = encode_series(s, key)
    assert out.values.shape == (F, T) and out.feature_names == names
    i = data.draw(st.integers(0, F - 1))
    v = s.values.copy()
    v[i] = rng.standard_normal(T)
    out2 = encode_series(s.with_values(v), key)
    others = [f for f in range(F) if f != i]
    assert np.array_equal(out.values[others], out2.values[others])
    if key.method == "quantum":
        assert np.all(np.abs(out.values) <= 1)


def test_encode_series_mimic_shape():
    s = TimeSeries(tuple(f"f{i}" for i in range(60)), np.random.default_rng(0).standard_normal((60, 48)))
    assert encode_series(s, generate_key("quantum", 4, 3)).values.shape == (60, 48)


def test_identity_key_returns_normalized_input():
    s = TimeSeries(("a", "b"), [[0.0, 5.0, 10.0, 2.5], [1.0, 1.0, 1.0, 1.0]])
    out = encode_series(s, identity_key(normalize=True))
    np.testing.assert_array_equal(out.values, [[0, 0.5, 1, 0.25], [0, 0, 0, 0]])


def test_encode_dataset(tmp_path, small_dataset):
    src = tmp_path / "src"
    core.write_dataset(src, small_dataset)
    key = generate_key("quantum", 4, 7)
    m = encode_dataset(src, key, tmp_path / "a")
    assert m["n_examples"] == 40
    assert m["key_fingerprint"] == pipeline.key_fingerprint(key)
    assert m["clamped_values"] == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert len([f for f in files if f.startswith("ex")]) == 40
    assert "manifest.json" in files and "labels.csv" in files
    assert (tmp_path / "a" / "labels.csv").read_bytes() == (src / "labels.csv").read_bytes()
    enc = core.read_dataset(tmp_path / "a")
    assert np.all(np.abs(enc.stack()) <= 1)
    encode_dataset(src, key, tmp_path / "b")
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_encode_dataset_three_examples(tmp_path, small_dataset):
    three = core.Dataset(small_dataset.examples[:3], {i: small_dataset.labels[i] for i in small_dataset.ids[:3]})
    m = encode_dataset(three, generate_key("random_projection", 4, 1), tmp_path)
    assert m["n_examples"] == 3
    assert len(core.example_files(tmp_path)) == 3


def test_encode_dataset_worker_determinism(tmp_path, small_dataset):
    key = generate_key("quantum", 4, 5)
    encode_dataset(small_dataset, key, tmp_path / "w1", workers=1)
    encode_dataset(small_dataset, key, tmp_path / "w3", workers=3)
    for p in sorted((tmp_path / "w1").iterdir()):
        assert p.read_bytes() == (tmp_path / "w3" / p.name).read_bytes()


def test_manifest_counts_clamped_cells(tmp_path):
    names = ("a", "b")
    s1 = TimeSeries(names, [[0.0, 11.0, 5.0, 5.0], [1.0, 2.0, 3.0, 4.0]])
    s2 = TimeSeries(names, [[1.0, 2.0, 3.0, 4.0], [1.0, 2.0, -3.0, 4.0]])
    ds = core.Dataset((("x", s1), ("y", s2)))
    stats = NormStats(names, [0.0, 0.0], [10.0, 10.0])
    m = encode_dataset(ds, generate_key("quantum", 4, 1), tmp_path, stats=stats)
    assert m["clamped_values"] == 2
    assert m["clamped_per_example"] == {"x": 1, "y": 1}
    assert json.loads((tmp_path / "manifest.json").read_text())["normalization_stats"] == {"a": [0.0, 10.0], "b": [0.0, 10.0]}


def test_encode_dataset_needs_divisible_length(tmp_path):
    s = TimeSeries(("a",), [np.arange(10.0)])
    ds = core.Dataset((("x", s),))
    with pytest.raises(SegmentationError):
        encode_dataset(ds, generate_key("quantum", 4, 1), tmp_path / "o")
    m = encode_dataset(ds, generate_key("quantum", 4, 1), tmp_path / "o", pad_zero=True)
    assert m["padded_steps"] == 12
    assert core.read_dataset(tmp_path / "o").shape == (1, 10)


def test_csv_round_trip_is_lossless(tmp_path, small_dataset):
    key = generate_key("random_projection", 4, 2)
    encode_dataset(small_dataset, key, tmp_path)
    enc = core.read_dataset(tmp_path)
    stats = NormStats.from_values(small_dataset.feature_names, small_dataset.stack())
    expected = encode_series(small_dataset.examples[0][1], key, stats)
    assert np.array_equal(enc.examples[0][1].values, expected.values)
