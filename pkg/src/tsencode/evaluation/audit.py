"""Leakage audit: train the reference model per seed, probe its embedding, estimate MI, report."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .. import core
from ..core import Dataset
from ..errors import AlignmentError, ValidationError
from .metrics import auroc, odds_ratio
from .mi import estimate_mi, reduce_series
from .models import Split, fit_reference_model, train_probe

log = logging.getLogger(__name__)


@dataclass
class AuditConfig:
    hidden_dim: int = 64
    epochs: int = 50
    lr: float = 1e-3
    batch_size: int = 64
    probe_epochs: int = 500
    probe_batch_size: int = 256
    mi_k: int = 3


@dataclass
class LeakageReport:
    variant: str
    probe_auroc: dict[str, list[float]]
    task_auroc: list[float]
    mi_averaged: list[float]
    mi_vectorized: list[float]
    odds_ratio: dict[str, float]
    n_examples: int
    n_test: int
    seeds: list[int]
    mi_k: int
    mi_samples: int = 0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def ms(v):
            return {"mean": float(np.mean(v)), "std": float(np.std(v)), "per_seed": [float(x) for x in v]}

        return {
            "probe_auroc": {a: ms(v) for a, v in self.probe_auroc.items()},
            "mi_averaged": float(np.mean(self.mi_averaged)),
            "mi_vectorized": float(np.mean(self.mi_vectorized)),
            "mi_averaged_per_seed": [float(x) for x in self.mi_averaged],
            "mi_vectorized_per_seed": [float(x) for x in self.mi_vectorized],
            "mi_k": self.mi_k,
            "mi_samples": self.mi_samples,
            "odds_ratio": {a: float(v) for a, v in self.odds_ratio.items()},
            "task_auroc": float(np.mean(self.task_auroc)),
            "task_auroc_per_seed": [float(x) for x in self.task_auroc],
            "n_examples": self.n_examples,
            "n_test": self.n_test,
            "seeds": list(self.seeds),
        }


def _label_arrays(ds: Dataset, attrs: Sequence[str]) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    missing = [i for i in ds.ids if i not in ds.labels]
    if missing:
        raise AlignmentError(f"examples without labels: {missing[:5]}")
    y = np.array([ds.labels[i].task_label for i in ds.ids])
    out = {}
    for a in attrs:
        lacking = [i for i in ds.ids if a not in ds.labels[i].attributes]
        if lacking:
            raise AlignmentError(f"attribute {a!r} missing for examples {lacking[:5]}")
        out[a] = np.array([ds.labels[i].attributes[a] for i in ds.ids])
    return y, out


def check_alignment(reference: Dataset, other: Dataset, name: str) -> None:
    if reference.ids != other.ids:
        extra = sorted(set(other.ids) - set(reference.ids))[:5]
        lost = sorted(set(reference.ids) - set(other.ids))[:5]
        raise AlignmentError(f"variant {name!r} example ids differ (unexpected: {extra}, missing: {lost})")
    for i in reference.ids:
        if reference.labels.get(i) != other.labels.get(i):
            raise AlignmentError(f"variant {name!r} labels differ for example {i!r}")


def audit_variant(
    name: str, ds: Dataset, attrs: Sequence[str], seeds: Sequence[int], config: AuditConfig | None = None
) -> LeakageReport:
    cfg = config or AuditConfig()
    if not seeds:
        raise ValidationError("at least one seed is required")
    X = ds.stack()
    y, A = _label_arrays(ds, attrs)
    split = Split.from_ids(ds.ids)
    inputs_avg = reduce_series(X, "averaged")
    inputs_vec = reduce_series(X, "vectorized")
    probe_scores: dict[str, list[float]] = {a: [] for a in attrs}
    task_scores, mi_avg, mi_vec = [], [], []
    for seed in seeds:
        model = fit_reference_model(
            X, y, split.train, split.val, cfg.hidden_dim, cfg.epochs, cfg.lr, cfg.batch_size, seed
        )
        emb = model.embed(X)
        task_scores.append(auroc(model.predict_proba(X[split.test]), y[split.test]))
        for a in attrs:
            probe = train_probe(
                emb, A[a], split.train, split.val, cfg.probe_epochs, cfg.lr, cfg.probe_batch_size, seed
            )
            probe_scores[a].append(auroc(probe.predict_proba(emb[split.test])[:, 0], A[a][split.test]))
        mi_avg.append(estimate_mi(emb, inputs_avg, cfg.mi_k))
        mi_vec.append(estimate_mi(emb, inputs_vec, cfg.mi_k))
        log.info("%s seed %s: task AUROC %.3f", name, seed, task_scores[-1])
    return LeakageReport(
        variant=name,
        probe_auroc=probe_scores,
        task_auroc=task_scores,
        mi_averaged=mi_avg,
        mi_vectorized=mi_vec,
        odds_ratio={a: odds_ratio(A[a], y) for a in attrs},
        n_examples=len(ds.ids),
        n_test=len(split.test),
        seeds=list(seeds),
        mi_k=cfg.mi_k,
        mi_samples=len(ds.ids),
    )


def audit_leakage(
    variants: Mapping[str, Dataset | Path | str],
    attrs: Sequence[str],
    seeds: Sequence[int],
    config: AuditConfig | None = None,
) -> dict[str, LeakageReport]:
    """Audit every variant (first = reference for alignment) with the same attributes and seeds."""
    loaded = {k: v if isinstance(v, Dataset) else core.read_dataset(Path(v)) for k, v in variants.items()}
    names = list(loaded)
    if not names:
        raise ValidationError("no dataset variants to audit")
    ref = loaded[names[0]]
    for k in names[1:]:
        check_alignment(ref, loaded[k], k)
    return {k: audit_variant(k, loaded[k], attrs, seeds, config) for k in names}


def write_report(reports: Mapping[str, LeakageReport], path: Path) -> dict:
    obj = {k: r.to_json() for k, r in reports.items()}
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return obj
