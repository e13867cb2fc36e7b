"""Synthetic labelled datasets with a known task signal and an optional planted attribute."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import Dataset, ExampleLabels, TimeSeries


def make_dataset(
    n_examples: int = 2000,
    n_features: int = 8,
    n_steps: int = 16,
    seed: int = 0,
    task_features: Sequence[int] = (0, 1),
    label_noise: float = 0.15,
    attr_features: Sequence[int] = (2, 3),
    attr_shift: float = 1.0,
    attr_name: str = "attr",
    noise: float = 0.5,
) -> Dataset:
    """Random-walk-around-a-level series with binary labels.

    Each feature is ``level + AR(1) noise`` with ``level ~ N(0, 1)`` per example and
    feature. The task label thresholds the noisy mean of ``task_features`` at zero.
    A Bernoulli(1/2) attribute, drawn independently of the task, raises the levels of
    ``attr_features`` by ``attr_shift``; with ``attr_shift = 0`` it is pure noise.
    """
    rng = np.random.default_rng(seed)
    level = rng.standard_normal((n_examples, n_features))
    eps = rng.standard_normal((n_examples, n_features, n_steps))
    ar = np.empty_like(eps)
    ar[..., 0] = eps[..., 0]
    for t in range(1, n_steps):
        ar[..., t] = 0.7 * ar[..., t - 1] + np.sqrt(1 - 0.49) * eps[..., t]
    attr = rng.integers(0, 2, n_examples)
    values = level[..., None] + noise * ar
    values[:, list(attr_features), :] += attr_shift * attr[:, None, None]
    score = values[:, list(task_features), :].mean(axis=(1, 2))
    task = (score + label_noise * rng.standard_normal(n_examples) > 0).astype(int)
    names = tuple(f"f{i}" for i in range(n_features))
    width = len(str(n_examples - 1))
    examples = []
    labels = {}
    for i in range(n_examples):
        ex_id = f"ex{i:0{width}d}"
        examples.append((ex_id, TimeSeries(names, values[i])))
        labels[ex_id] = ExampleLabels(int(task[i]), {attr_name: int(attr[i])})
    return Dataset(tuple(examples), labels)
