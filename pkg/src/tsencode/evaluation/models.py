"""Small numpy networks: the reference task model that supplies embeddings, and linear probes.

Both train with Adam on binary cross-entropy over shuffled mini-batches and keep the
parameters from the epoch with the lowest validation loss.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import ShapeError, TrainingError, ValidationError

SPLIT_FRACTIONS = (0.70, 0.15, 0.15)


def split_of(example_id: str) -> str:
    """'train', 'val' or 'test' from a SHA-256 of the id, in 70/15/15 proportion."""
    h = int.from_bytes(hashlib.sha256(example_id.encode()).digest()[:8], "big") / 2.0**64
    if h < SPLIT_FRACTIONS[0]:
        return "train"
    if h < SPLIT_FRACTIONS[0] + SPLIT_FRACTIONS[1]:
        return "val"
    return "test"


@dataclass(frozen=True)
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    @classmethod
    def from_ids(cls, ids: Sequence[str]) -> "Split":
        tags = np.array([split_of(i) for i in ids])
        return cls(*(np.flatnonzero(tags == t) for t in ("train", "val", "test")))


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_with_logits(logits: np.ndarray, y: np.ndarray) -> float:
    # log(1 + e^z) - y z, evaluated stably
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


class Adam:
    def __init__(self, params: dict[str, np.ndarray], lr: float = 1e-3, b1=0.9, b2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        c1 = 1 - self.b1**self.t
        c2 = 1 - self.b2**self.t
        for k, g in grads.items():
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * g * g
            params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def _fit(
    params: dict[str, np.ndarray],
    loss_grad: Callable[[dict, np.ndarray], tuple[float, dict]],
    val_loss: Callable[[dict], float],
    n_train: int,
    epochs: int,
    lr: float,
    batch_size: int,
    rng: np.random.Generator,
) -> tuple[dict[str, np.ndarray], list[float], int]:
    """Mini-batch Adam; returns best-validation params, per-epoch validation losses, best epoch."""
    opt = Adam(params, lr)
    best = {k: v.copy() for k, v in params.items()}
    history = [val_loss(params)]
    best_epoch = 0
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n_train)
        for start in range(0, n_train, batch_size):
            _, grads = loss_grad(params, order[start : start + batch_size])
            opt.step(params, grads)
        history.append(val_loss(params))
        if history[-1] < history[best_epoch]:
            best_epoch = epoch
            best = {k: v.copy() for k, v in params.items()}
    return best, history, best_epoch


def _check_labels(y: np.ndarray, what: str) -> None:
    if not np.all((y == 0) | (y == 1)):
        raise ValidationError(f"{what} labels must be binary 0/1")
    for col in y.reshape(y.shape[0], -1).T:
        if col.min() == col.max():
            raise TrainingError(f"{what} labels contain a single class in the training split")


def mlp_loss_grad(p: dict, Z: np.ndarray, t: np.ndarray) -> tuple[float, dict]:
    """Mean BCE of the one-hidden-layer tanh network and its parameter gradients."""
    H = np.tanh(Z @ p["W1"] + p["b1"])
    logits = H @ p["w2"] + p["b2"][0]
    d = (sigmoid(logits) - t) / len(t)
    dH = np.outer(d, p["w2"]) * (1 - H * H)
    grads = {"W1": Z.T @ dH, "b1": dH.sum(0), "w2": H.T @ d, "b2": np.array([d.sum()])}
    return bce_with_logits(logits, t), grads


def probe_loss_grad(p: dict, E: np.ndarray, A: np.ndarray) -> tuple[float, dict]:
    """BCE summed over outputs, averaged over rows, for an affine + sigmoid probe."""
    logits = E @ p["W"] + p["b"]
    d = (sigmoid(logits) - A) / len(A)
    return bce_with_logits(logits, A) * A.shape[1], {"W": E.T @ d, "b": d.sum(0)}


@dataclass
class ReferenceModel:
    """flatten -> standardize -> affine -> tanh -> affine(1) -> sigmoid.

    Standardization uses train-split column means and deviations and is part of the model.
    """

    mean: np.ndarray
    scale: np.ndarray
    W1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    history: list[float] = field(default_factory=list)
    best_epoch: int = 0

    def embed(self, X: np.ndarray) -> np.ndarray:
        Z = (_flatten(X) - self.mean) / self.scale
        return np.tanh(Z @ self.W1 + self.b1)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.embed(X) @ self.w2 + self.b2)


def _flatten(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim < 2:
        raise ShapeError(f"expected N x ... inputs, got shape {X.shape}")
    return X.reshape(X.shape[0], -1)


def fit_reference_model(
    X,
    y,
    train_idx,
    val_idx,
    hidden_dim: int = 64,
    epochs: int = 50,
    lr: float = 1e-3,
    batch_size: int = 64,
    seed: int = 0,
) -> ReferenceModel:
    X = _flatten(X)
    y = np.asarray(y, dtype=float)
    if y.shape != (X.shape[0],):
        raise ShapeError(f"labels shape {y.shape} does not match {X.shape[0]} examples")
    train_idx, val_idx = np.asarray(train_idx), np.asarray(val_idx)
    _check_labels(y[train_idx], "task")
    rng = np.random.default_rng(seed)
    D = X.shape[1]
    mean = X[train_idx].mean(axis=0)
    sd = X[train_idx].std(axis=0)
    scale = np.where(sd > 0, sd, 1.0)
    Ztr = (X[train_idx] - mean) / scale
    Zva = (X[val_idx] - mean) / scale
    ytr, yva = y[train_idx], y[val_idx]
    lim1 = np.sqrt(6.0 / (D + hidden_dim))
    lim2 = np.sqrt(6.0 / (hidden_dim + 1))
    params = {
        "W1": rng.uniform(-lim1, lim1, (D, hidden_dim)),
        "b1": np.zeros(hidden_dim),
        "w2": rng.uniform(-lim2, lim2, hidden_dim),
        "b2": np.zeros(1),
    }

    def loss_grad(p, idx):
        return mlp_loss_grad(p, Ztr[idx], ytr[idx])

    def val_loss(p):
        if len(val_idx) == 0:
            return 0.0
        H = np.tanh(Zva @ p["W1"] + p["b1"])
        return bce_with_logits(H @ p["w2"] + p["b2"][0], yva)

    best, history, best_epoch = _fit(params, loss_grad, val_loss, len(train_idx), epochs, lr, batch_size, rng)
    return ReferenceModel(mean, scale, best["W1"], best["b1"], best["w2"], best["b2"][0], history, best_epoch)


@dataclass
class LinearProbe:
    """Affine map + independent sigmoid per output. ``weights`` is D x C, ``bias`` length C."""

    weights: np.ndarray
    bias: np.ndarray
    history: list[float] = field(default_factory=list)
    best_epoch: int = 0

    def predict_proba(self, emb: np.ndarray) -> np.ndarray:
        return sigmoid(np.asarray(emb, dtype=float) @ self.weights + self.bias)


def train_probe(
    emb,
    attrs,
    train_idx,
    val_idx,
    epochs: int = 500,
    lr: float = 1e-3,
    batch_size: int = 256,
    seed: int = 0,
) -> LinearProbe:
    """Fit one linear probe over frozen embeddings for one or more binary attributes.

    ``attrs`` may be a length-N vector or an N x C matrix; the probe has C outputs.
    The embedding is used as given, with no rescaling.
    """
    E = np.asarray(emb, dtype=float)
    if E.ndim != 2 or not np.all(np.isfinite(E)):
        raise ValidationError("embedding must be a finite N x D matrix")
    A = np.asarray(attrs, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.shape[0] != E.shape[0]:
        raise ShapeError(f"{A.shape[0]} attribute rows for {E.shape[0]} embedding rows")
    train_idx, val_idx = np.asarray(train_idx), np.asarray(val_idx)
    _check_labels(A[train_idx], "attribute")
    rng = np.random.default_rng(seed)
    D, C = E.shape[1], A.shape[1]
    lim = np.sqrt(6.0 / (D + C))
    params = {"W": rng.uniform(-lim, lim, (D, C)), "b": np.zeros(C)}
    Etr, Atr = E[train_idx], A[train_idx]
    Eva, Ava = E[val_idx], A[val_idx]

    def loss_grad(p, idx):
        return probe_loss_grad(p, Etr[idx], Atr[idx])

    def val_loss(p):
        if len(val_idx) == 0:
            return 0.0
        return bce_with_logits(Eva @ p["W"] + p["b"], Ava)

    best, history, best_epoch = _fit(params, loss_grad, val_loss, len(train_idx), epochs, lr, batch_size, rng)
    return LinearProbe(best["W"], best["b"], history, best_epoch)


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Penultimate activations, one row per example, aligned with ``example_ids``."""

    rows: np.ndarray
    example_ids: tuple[str, ...]

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] < 2 or rows.shape[1] < 1:
            raise ShapeError(f"embedding must be N x D with N >= 2, D >= 1; got {rows.shape}")
        if rows.shape[0] != len(self.example_ids):
            raise ShapeError("embedding rows and example ids differ in count")
        if not np.all(np.isfinite(rows)):
            raise ValidationError("embedding contains non-finite entries")
        rows = rows.copy()
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "example_ids", tuple(self.example_ids))


def train_reference_model(dataset, hidden_dim: int = 64, epochs: int = 50, lr: float = 1e-3,
                          batch_size: int = 64, seed: int = 0) -> tuple[ReferenceModel, EmbeddingMatrix]:
    """Fit the reference model on a labelled Dataset's task label using its hashed split."""
    ids = dataset.ids
    missing = [i for i in ids if i not in dataset.labels]
    if missing:
        raise TrainingError(f"examples without task labels: {missing[:5]}")
    y = np.array([dataset.labels[i].task_label for i in ids])
    split = Split.from_ids(ids)
    model = fit_reference_model(dataset.stack(), y, split.train, split.val, hidden_dim, epochs, lr, batch_size, seed)
    return model, EmbeddingMatrix(model.embed(dataset.stack()), tuple(ids))
