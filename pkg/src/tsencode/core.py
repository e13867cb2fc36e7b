"""Shared domain types: time series, encoding keys, labelled datasets and their on-disk layout.

A dataset directory holds one ``<example_id>.csv`` per example (header = feature
names, one row per time step), a ``labels.csv`` with ``example_id,task_label,<attr>...``
columns and, when produced by the encoder, a ``manifest.json``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    IngestionError,
    LengthError,
    SegmentationError,
    ShapeError,
    ValidationError,
)
from .qsim import CircuitSpec

KEY_VERSION = 1
METHODS = ("random_projection", "quantum")
LABELS_FILE = "labels.csv"
MANIFEST_FILE = "manifest.json"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TimeSeries:
    """F feature signals over T uniformly spaced steps; ``values[f]`` is feature f."""

    feature_names: tuple[str, ...]
    values: np.ndarray
    time_step_hours: float = 1.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ShapeError(f"time series values must be a non-empty F x T matrix, got shape {values.shape}")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != values.shape[0]:
            raise ShapeError(f"{len(names)} feature names for {values.shape[0]} feature rows")
        if not np.all(np.isfinite(values)):
            raise ValidationError("time series contains non-finite entries")
        if not self.time_step_hours > 0:
            raise ValidationError("time_step_hours must be positive")
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "values", _frozen(values))

    @property
    def n_features(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    def with_values(self, values: np.ndarray) -> "TimeSeries":
        return TimeSeries(self.feature_names, values, self.time_step_hours)


@dataclass(frozen=True)
class EncodingKey:
    """Fully materialized encoding transform. Encoding is a pure function of (key, data)."""

    method: str
    segment_len: int
    normalize: bool = True
    projection: np.ndarray | None = None
    circuit: CircuitSpec | None = None
    provenance_seed: int | None = None
    version: int = KEY_VERSION

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unsupported encoding method {self.method!r}; expected one of {METHODS}")
        n = self.segment_len
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ConfigError(f"segment_len must be a positive integer, got {n!r}")
        object.__setattr__(self, "segment_len", int(n))
        if self.method == "random_projection":
            if self.projection is None or self.circuit is not None:
                raise ConfigError("random_projection key needs a projection matrix and no circuit")
            R = np.asarray(self.projection, dtype=float)
            if R.shape != (n, n):
                raise ShapeError(f"projection must be {n}x{n}, got {R.shape}")
            if not np.all(np.isfinite(R)):
                raise ValidationError("projection matrix has non-finite entries")
            object.__setattr__(self, "projection", _frozen(R))
        else:
            if self.circuit is None or self.projection is not None:
                raise ConfigError("quantum key needs a circuit and no projection matrix")
            if self.circuit.wires != n:
                raise ConfigError(f"circuit has {self.circuit.wires} wires but segment_len is {n}")


@dataclass(frozen=True)
class ExampleLabels:
    task_label: int
    attributes: Mapping[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class Dataset:
    """Examples sharing one (F, T, feature_names) shape, plus binary labels keyed by example id."""

    examples: tuple[tuple[str, TimeSeries], ...]
    labels: Mapping[str, ExampleLabels] = field(default_factory=dict)

    def __post_init__(self):
        examples = tuple((str(i), s) for i, s in self.examples)
        object.__setattr__(self, "examples", examples)
        if not examples:
            return
        first_id, first = examples[0]
        seen = set()
        for ex_id, s in examples:
            if ex_id in seen:
                raise ValidationError(f"duplicate example id {ex_id!r}")
            seen.add(ex_id)
            if s.values.shape != first.values.shape:
                raise ShapeError(
                    f"example {ex_id!r} has shape {s.values.shape}, expected {first.values.shape} (from {first_id!r})"
                )
            if s.feature_names != first.feature_names:
                raise ShapeError(f"example {ex_id!r} feature names differ from {first_id!r}")
        missing = [i for i in self.labels if i not in seen]
        if missing:
            raise ValidationError(f"labels reference unknown example ids: {missing[:5]}")

    @property
    def ids(self) -> list[str]:
        return [i for i, _ in self.examples]

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.examples[0][1].feature_names

    @property
    def shape(self) -> tuple[int, int]:
        return self.examples[0][1].values.shape

    def attribute_names(self) -> list[str]:
        names: list[str] = []
        for lab in self.labels.values():
            for a in lab.attributes:
                if a not in names:
                    names.append(a)
        return names

    def stack(self) -> np.ndarray:
        """N x F x T array in example order."""
        return np.stack([s.values for _, s in self.examples])


# --- segmentation -----------------------------------------------------------


def _as_signal(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ShapeError(f"signal must be a non-empty 1-d vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("signal contains non-finite entries")
    return x


def segment_matrix(x, n: int, pad_zero: bool = False) -> np.ndarray:
    """Segments of ``x`` as rows of a ceil(T/n) x n array."""
    x = _as_signal(x)
    if n < 1:
        raise SegmentationError(f"segment length must be >= 1, got {n}")
    T = x.size
    rem = T % n
    if rem and not pad_zero:
        raise SegmentationError(
            f"signal length {T} is not divisible by segment length {n}; enable zero padding to encode it"
        )
    if rem:
        x = np.concatenate([x, np.zeros(n - rem)])
    return x.reshape(-1, n)


def segment_signal(x, n: int, pad_zero: bool = False) -> list[np.ndarray]:
    """Split ``x`` into consecutive length-``n`` segments, right-padding the last with zeros if allowed."""
    return list(segment_matrix(x, n, pad_zero))


def padded_length(T: int, n: int) -> int:
    return math.ceil(T / n) * n


def concat_segments(segments: Sequence, original_T: int) -> np.ndarray:
    if len(segments) == 0:
        raise LengthError("no segments to concatenate")
    segs = [np.asarray(s, dtype=float) for s in segments]
    n = segs[0].shape
    if any(s.ndim != 1 or s.shape != n for s in segs):
        raise ShapeError("all segments must be 1-d vectors of equal length")
    out = np.concatenate(segs)
    if out.size < original_T:
        raise LengthError(f"segments hold {out.size} values, fewer than original length {original_T}")
    return out[:original_T]


# --- normalization -----------------------------------------------------------


@dataclass(frozen=True)
class NormStats:
    """Per-feature (min, max) used for min-max scaling to [0, 1]."""

    feature_names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "mins", _frozen(self.mins))
        object.__setattr__(self, "maxs", _frozen(self.maxs))
        if not (len(self.feature_names) == self.mins.size == self.maxs.size):
            raise ShapeError("normalization stats must have one (min, max) pair per feature")

    @classmethod
    def from_values(cls, feature_names: Sequence[str], values: np.ndarray) -> "NormStats":
        """Stats over the last axis (and any leading batch axes) of an (..., F, T) array."""
        v = np.asarray(values, dtype=float)
        v = np.moveaxis(v, -2, 0).reshape(v.shape[-2], -1)
        return cls(tuple(feature_names), v.min(axis=1), v.max(axis=1))

    def to_json(self) -> dict:
        return {name: [float(lo), float(hi)] for name, lo, hi in zip(self.feature_names, self.mins, self.maxs)}

    @classmethod
    def from_json(cls, obj: Mapping[str, Sequence[float]]) -> "NormStats":
        names = list(obj)
        return cls(tuple(names), [obj[k][0] for k in names], [obj[k][1] for k in names])


def scale_minmax(values: np.ndarray, mins: np.ndarray, maxs: np.ndarray) -> tuple[np.ndarray, int]:
    """Scale an (..., F, T) array row-wise to [0, 1]; returns the scaled array and the clamp count."""
    values = np.asarray(values, dtype=float)
    lo = np.asarray(mins, dtype=float)[:, None]
    hi = np.asarray(maxs, dtype=float)[:, None]
    span = hi - lo
    degenerate = span <= 0
    safe = np.where(degenerate, 1.0, span)
    scaled = np.where(degenerate, 0.0, (values - lo) / safe)
    clamped = int(np.count_nonzero((scaled < 0) | (scaled > 1)))
    return np.clip(scaled, 0.0, 1.0), clamped


def normalize_minmax(series: TimeSeries, stats: NormStats | None = None) -> tuple[TimeSeries, NormStats, int]:
    """Min-max scale every feature to [0, 1].

    Without ``stats`` the per-feature range comes from ``series`` itself. A feature
    whose max equals its min maps to 0. Under supplied stats, values falling outside
    the range are clamped and the number of clamped cells is returned third.
    """
    if stats is None:
        stats = NormStats.from_values(series.feature_names, series.values)
    elif stats.feature_names != series.feature_names:
        raise ValidationError("normalization stats do not match the series feature names")
    scaled, clamped = scale_minmax(series.values, stats.mins, stats.maxs)
    return series.with_values(scaled), stats, clamped


# --- disk format ---------------------------------------------------------------


def format_float(v: float) -> str:
    """Shortest decimal literal that round-trips to the same double."""
    return repr(float(v))


def write_series_csv(path: Path, series: TimeSeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(series.feature_names)
        for row in series.values.T:
            w.writerow([format_float(v) for v in row])


def read_series_csv(path: Path) -> TimeSeries:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise IngestionError(f"{path}: cannot read ({e.strerror})") from e
    if len(rows) < 2:
        raise IngestionError(f"{path}: needs a header row and at least one time step")
    header, body = rows[0], rows[1:]
    try:
        values = np.array([[float(c) for c in r] for r in body if r], dtype=float)
    except ValueError as e:
        raise IngestionError(f"{path}: non-numeric cell ({e})") from e
    if values.ndim != 2 or values.shape[1] != len(header):
        raise IngestionError(f"{path}: every row must have {len(header)} cells")
    try:
        return TimeSeries(tuple(header), values.T)
    except (ValidationError, ShapeError) as e:
        raise IngestionError(f"{path}: {e}") from e


def write_labels_csv(path: Path, labels: Mapping[str, ExampleLabels], ids: Sequence[str] | None = None) -> None:
    ids = list(labels) if ids is None else [i for i in ids if i in labels]
    attrs: list[str] = []
    for lab in labels.values():
        attrs += [a for a in lab.attributes if a not in attrs]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["example_id", "task_label", *attrs])
        for i in ids:
            lab = labels[i]
            w.writerow([i, int(lab.task_label), *(int(lab.attributes[a]) for a in attrs)])


def _binary(v: str, path: Path, line: int) -> int:
    if v.strip() not in ("0", "1"):
        raise IngestionError(f"{path}:{line}: expected binary 0/1, got {v!r}")
    return int(v)


def read_labels_csv(path: Path) -> dict[str, ExampleLabels]:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as e:
        raise IngestionError(f"{path}: cannot read ({e.strerror})") from e
    if not rows or rows[0][:2] != ["example_id", "task_label"]:
        raise IngestionError(f"{path}: header must start with example_id,task_label")
    attrs = rows[0][2:]
    out: dict[str, ExampleLabels] = {}
    for line, r in enumerate(rows[1:], start=2):
        if not r:
            continue
        if len(r) != len(rows[0]):
            raise IngestionError(f"{path}:{line}: expected {len(rows[0])} cells, got {len(r)}")
        out[r[0]] = ExampleLabels(
            _binary(r[1], path, line), {a: _binary(v, path, line) for a, v in zip(attrs, r[2:])}
        )
    return out


def example_files(directory: Path) -> list[Path]:
    return sorted(p for p in Path(directory).glob("*.csv") if p.name != LABELS_FILE)


def read_dataset(directory: Path) -> Dataset:
    directory = Path(directory)
    if not directory.is_dir():
        raise IngestionError(f"{directory}: dataset directory does not exist")
    files = example_files(directory)
    if not files:
        raise IngestionError(f"{directory}: no example CSV files found")
    examples = [(p.stem, read_series_csv(p)) for p in files]
    label_path = directory / LABELS_FILE
    labels = read_labels_csv(label_path) if label_path.exists() else {}
    try:
        return Dataset(tuple(examples), labels)
    except (ValidationError, ShapeError) as e:
        raise IngestionError(f"{directory}: {e}") from e


def write_dataset(directory: Path, dataset: Dataset) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for ex_id, s in dataset.examples:
        write_series_csv(directory / f"{ex_id}.csv", s)
    if dataset.labels:
        write_labels_csv(directory / LABELS_FILE, dataset.labels, dataset.ids)
