"""Key generation and segment-wise encoding of signals, series and dataset directories."""
from __future__ import annotations

import hashlib
import json
import logging
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import core, qsim, rproj
from .core import Dataset, EncodingKey, NormStats, TimeSeries
from .errors import ConfigError, IngestionError, SegmentationError, ValidationError

log = logging.getLogger(__name__)

CNOT_PATTERNS = {"ring": qsim.ring_pattern, "chain": qsim.chain_pattern}
DEFAULT_LAYERS = 2


def _method_name(method: str) -> str:
    m = method.replace("-", "_")
    if m not in core.METHODS:
        raise ConfigError(f"unsupported encoding method {method!r}")
    return m


def generate_key(
    method: str,
    n: int,
    seed: int,
    layers: int = DEFAULT_LAYERS,
    cnot: str = "ring",
    normalize: bool = True,
) -> EncodingKey:
    """Materialize every random parameter of an encoder from ``seed``.

    Quantum keys draw ``layers x n`` RX angles uniformly on [0, 2*pi); projection keys
    draw an n x n N(0, 1/n) matrix. The seed is recorded but never used again.
    """
    method = _method_name(method)
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ConfigError(f"segment length must be a positive integer, got {n!r}")
    n = int(n)
    rng = rproj.as_generator(seed)
    if method == "random_projection":
        return EncodingKey(method, n, normalize, projection=rproj.sample_projection(n, rng), provenance_seed=seed)
    if n > qsim.MAX_WIRES:
        raise ConfigError(f"quantum encoding supports at most {qsim.MAX_WIRES} wires, got segment length {n}")
    if layers < 0:
        raise ConfigError(f"layer count must be >= 0, got {layers}")
    if cnot not in CNOT_PATTERNS:
        raise ConfigError(f"unknown CNOT pattern {cnot!r}; expected one of {sorted(CNOT_PATTERNS)}")
    angles = 2.0 * np.pi * rng.random((layers, n))
    # guard against 2*pi from rounding of u just below 1
    angles = np.where(angles >= 2.0 * np.pi, 0.0, angles)
    pattern = CNOT_PATTERNS[cnot](n)
    spec = qsim.CircuitSpec(n, layers, angles, tuple(pattern for _ in range(layers)))
    return EncodingKey(method, n, normalize, circuit=spec, provenance_seed=seed)


# --- key (de)serialization ----------------------------------------------------


def key_to_json(key: EncodingKey) -> dict:
    return {
        "version": key.version,
        "method": key.method,
        "segment_len": key.segment_len,
        "normalize": key.normalize,
        "projection": None if key.projection is None else [[float(v) for v in row] for row in key.projection],
        "circuit": None if key.circuit is None else key.circuit.to_json(),
        "provenance_seed": key.provenance_seed,
    }


def key_from_json(obj: dict) -> EncodingKey:
    if obj.get("version") != core.KEY_VERSION:
        raise ConfigError(f"unsupported key version {obj.get('version')!r}")
    try:
        circuit = obj.get("circuit")
        return EncodingKey(
            method=obj["method"],
            segment_len=obj["segment_len"],
            normalize=bool(obj["normalize"]),
            projection=obj.get("projection"),
            circuit=None if circuit is None else qsim.CircuitSpec.from_json(circuit),
            provenance_seed=obj.get("provenance_seed"),
            version=obj["version"],
        )
    except KeyError as e:
        raise ConfigError(f"key is missing field {e.args[0]!r}") from e


def canonical_key_bytes(key: EncodingKey) -> bytes:
    return json.dumps(key_to_json(key), sort_keys=True, separators=(",", ":")).encode()


def key_fingerprint(key: EncodingKey) -> str:
    return hashlib.sha256(canonical_key_bytes(key)).hexdigest()


def save_key(key: EncodingKey, path: Path) -> str:
    Path(path).write_text(json.dumps(key_to_json(key), indent=2) + "\n")
    return key_fingerprint(key)


def load_key(path: Path) -> EncodingKey:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except OSError as e:
        raise IngestionError(f"{path}: cannot read key ({e.strerror})") from e
    except json.JSONDecodeError as e:
        raise IngestionError(f"{path}: key is not valid JSON ({e})") from e
    return key_from_json(obj)


# --- encoding -------------------------------------------------------------------


def _encode_segments(segs: np.ndarray, key: EncodingKey) -> np.ndarray:
    if key.method == "random_projection":
        return rproj.project_segments(key.projection, segs)
    return qsim.run_circuit_batch(key.circuit, segs)


def encode_rows(values: np.ndarray, key: EncodingKey, pad_zero: bool = False) -> np.ndarray:
    """Encode each row of an (..., T) array as an independent signal; output has the same shape."""
    values = np.asarray(values, dtype=float)
    T = values.shape[-1]
    n = key.segment_len
    rows = values.reshape(-1, T)
    segs = np.stack([core.segment_matrix(r, n, pad_zero) for r in rows])
    enc = _encode_segments(segs.reshape(-1, n), key).reshape(rows.shape[0], -1)
    return enc[:, :T].reshape(values.shape)


def encode_signal(x, key: EncodingKey, pad_zero: bool = False) -> np.ndarray:
    """Segment ``x``, encode every segment with the key's backend, concatenate back to length T."""
    x = np.asarray(x, dtype=float)
    segs = core.segment_matrix(x, key.segment_len, pad_zero)
    enc = _encode_segments(segs, key)
    return core.concat_segments(list(enc), x.size)


def encode_series(
    series: TimeSeries, key: EncodingKey, stats: NormStats | None = None, pad_zero: bool = False
) -> TimeSeries:
    """Encode each feature signal independently with one shared key.

    If the key asks for normalization, the series is min-max scaled first, with
    ``stats`` when given and otherwise with its own per-feature ranges.
    """
    values = series.values
    if key.normalize:
        values = normalize_values(series, stats)[0]
    return series.with_values(encode_rows(values, key, pad_zero))


def normalize_values(series: TimeSeries, stats: NormStats | None):
    normed, _, clamped = core.normalize_minmax(series, stats)
    return normed.values, clamped


@dataclass(frozen=True)
class _Job:
    example_id: str
    series: TimeSeries
    key: EncodingKey
    stats: NormStats | None
    pad_zero: bool
    out_dir: str


def _encode_job(job: _Job) -> tuple[str, int]:
    values = job.series.values
    clamped = 0
    if job.key.normalize:
        values, clamped = normalize_values(job.series, job.stats)
    enc = job.series.with_values(encode_rows(values, job.key, job.pad_zero))
    core.write_series_csv(Path(job.out_dir) / f"{job.example_id}.csv", enc)
    return job.example_id, clamped


def encode_dataset(
    dataset: Dataset | Path | str,
    key: EncodingKey,
    out_dir: Path | str,
    stats: NormStats | None = None,
    pad_zero: bool = False,
    workers: int = 1,
) -> dict:
    """Encode every example into ``out_dir`` and write ``manifest.json``; returns the manifest.

    Normalization stats default to per-feature ranges over the whole dataset. Supplied
    stats may leave cells out of range; those are clamped and counted in the manifest.
    """
    src_dir = None
    if not isinstance(dataset, Dataset):
        src_dir = Path(dataset)
        dataset = core.read_dataset(src_dir)
    if not dataset.examples:
        raise ValidationError("dataset has no examples")
    F, T = dataset.shape
    n = key.segment_len
    if T % n and not pad_zero:
        raise SegmentationError(
            f"series length {T} is not divisible by segment length {n}; pass pad_zero to zero-pad"
        )
    if key.normalize and stats is None:
        stats = NormStats.from_values(dataset.feature_names, dataset.stack())
    if stats is not None and stats.feature_names != dataset.feature_names:
        raise ValidationError("normalization stats do not match the dataset's feature names")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [_Job(i, s, key, stats if key.normalize else None, pad_zero, str(out)) for i, s in dataset.examples]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_encode_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_encode_job(j) for j in jobs]
    clamp_counts = {i: c for i, c in results}
    if src_dir is not None and (src_dir / core.LABELS_FILE).exists():
        shutil.copyfile(src_dir / core.LABELS_FILE, out / core.LABELS_FILE)
    elif dataset.labels:
        core.write_labels_csv(out / core.LABELS_FILE, dataset.labels, dataset.ids)
    manifest = {
        "n_examples": len(jobs),
        "n_features": F,
        "n_steps": T,
        "feature_names": list(dataset.feature_names),
        "method": key.method,
        "segment_len": n,
        "padded_steps": core.padded_length(T, n),
        "key_fingerprint": key_fingerprint(key),
        "normalized": key.normalize,
        "normalization_range": [0.0, 1.0] if key.normalize else None,
        "normalization_stats": stats.to_json() if key.normalize else None,
        "clamped_values": sum(clamp_counts.values()),
        "clamped_per_example": {i: c for i, c in clamp_counts.items() if c},
    }
    (out / core.MANIFEST_FILE).write_text(json.dumps(manifest, indent=2) + "\n")
    log.info("encoded %d examples (%s, n=%d) into %s", len(jobs), key.method, n, out)
    return manifest
