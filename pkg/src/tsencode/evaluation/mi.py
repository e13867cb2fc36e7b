"""k-nearest-neighbour mutual information (Kraskov, Stoegbauer & Grassberger, estimator 1)."""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from scipy.special import digamma

from ..errors import SampleSizeError, ShapeError, ValidationError

REDUCTIONS = ("averaged", "vectorized")
# above this joint dimension kd-trees are slower than chunked brute force
BRUTE_FORCE_DIM = 16
_CHUNK = 512


def reduce_series(batch, mode: str) -> np.ndarray:
    """Collapse an N x F x T batch to a matrix: per-feature time means (N x F) or row-major flattening (N x F*T)."""
    b = np.asarray(batch, dtype=float)
    if b.ndim != 3:
        raise ShapeError(f"expected an N x F x T batch, got shape {b.shape}")
    if mode == "averaged":
        return b.mean(axis=2)
    if mode == "vectorized":
        return b.reshape(b.shape[0], -1)
    raise ValidationError(f"unknown reduction {mode!r}; expected one of {REDUCTIONS}")


def _as_samples(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ShapeError(f"{name} must be an N x D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite entries")
    return a


def _jitter(a: np.ndarray, rng: np.random.Generator, scale: float) -> np.ndarray:
    # breaks exact ties; distances at zero would otherwise make the neighbour counts ill-defined
    sd = a.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return a + scale * sd * rng.standard_normal(a.shape)


def _standardize(a: np.ndarray) -> np.ndarray:
    sd = a.std(axis=0)
    return (a - a.mean(axis=0)) / np.where(sd > 0, sd, 1.0)


def ksg_mi_raw(
    X, Y, k: int = 3, standardize: bool = True, jitter: float = 1e-10, seed: int = 0
) -> float:
    """Unclipped estimate in nats: psi(k) + psi(N) - <psi(n_x + 1) + psi(n_y + 1)>.

    Distances use the max-norm. For each sample, eps is its distance to the k-th
    joint-space neighbour and n_x, n_y count the other samples strictly closer than
    eps in each marginal space. Columns are z-scored first unless ``standardize`` is
    off, since the max-norm otherwise lets the widest coordinate dominate.
    """
    X = _as_samples(X, "X")
    Y = _as_samples(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise ShapeError(f"X has {X.shape[0]} samples but Y has {Y.shape[0]}")
    N = X.shape[0]
    if k < 1 or N <= k:
        raise SampleSizeError(f"need N > k >= 1, got N={N}, k={k}")
    if standardize:
        X, Y = _standardize(X), _standardize(Y)
    if jitter:
        rng = np.random.default_rng(seed)
        X = _jitter(X, rng, jitter)
        Y = _jitter(Y, rng, jitter)
    if X.shape[1] + Y.shape[1] > BRUTE_FORCE_DIM:
        nx, ny = _counts_brute(X, Y, k)
    else:
        nx, ny = _counts_tree(X, Y, k)
    return float(digamma(k) + digamma(N) - np.mean(digamma(nx + 1) + digamma(ny + 1)))


def _counts_tree(X: np.ndarray, Y: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    joint = np.hstack([X, Y])
    eps = cKDTree(joint).query(joint, k=k + 1, p=np.inf)[0][:, k]
    radius = np.nextafter(eps, 0)
    nx = cKDTree(X).query_ball_point(X, radius, p=np.inf, return_length=True) - 1
    ny = cKDTree(Y).query_ball_point(Y, radius, p=np.inf, return_length=True) - 1
    return nx, ny


def _counts_brute(X: np.ndarray, Y: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    N = X.shape[0]
    nx = np.empty(N, dtype=int)
    ny = np.empty(N, dtype=int)
    for lo in range(0, N, _CHUNK):
        hi = min(N, lo + _CHUNK)
        dx = cdist(X[lo:hi], X, "chebyshev")
        dy = cdist(Y[lo:hi], Y, "chebyshev")
        dz = np.maximum(dx, dy)
        # k-th neighbour excluding self (self sits at distance 0, position 0)
        eps = np.partition(dz, k, axis=1)[:, k][:, None]
        nx[lo:hi] = (dx < eps).sum(axis=1) - 1
        ny[lo:hi] = (dy < eps).sum(axis=1) - 1
    return nx, ny


def estimate_mi(X, Y, k: int = 3, **kw) -> float:
    """k-NN MI estimate between paired samples, clipped below at zero."""
    return max(0.0, ksg_mi_raw(X, Y, k, **kw))
