"""Irreversible segment-wise encoding of multivariate time series and leakage auditing."""
from .core import Dataset, EncodingKey, ExampleLabels, NormStats, TimeSeries, concat_segments, normalize_minmax, segment_signal
from .pipeline import encode_dataset, encode_series, encode_signal, generate_key, key_fingerprint, load_key, save_key
from .qsim import CircuitSpec, QuantumState, run_circuit
from .rproj import project_segment, sample_projection

__version__ = "0.1.0"
