"""Gaussian random projection of segments: ``e = R @ x`` with R entries i.i.d. N(0, 1/n)."""
from __future__ import annotations

import numpy as np

from .errors import ShapeError, ValidationError


def as_generator(rng) -> np.random.Generator:
    """Accept an integer seed or an existing Generator. Seeds map to PCG64."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.PCG64(int(rng)))


def box_muller(u1: np.ndarray, u2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map two arrays of uniforms on [0, 1) to two independent standard-normal arrays."""
    r = np.sqrt(-2.0 * np.log1p(-u1))
    theta = 2.0 * np.pi * u2
    return r * np.cos(theta), r * np.sin(theta)


def standard_normals(rng, size: int) -> np.ndarray:
    """``size`` N(0, 1) draws from uniform pairs via Box-Muller.

    The generator's ``random()`` stream is consumed as 2*ceil(size/2) doubles,
    first half as u1 and second half as u2; outputs interleave (cos, sin) per pair.
    """
    gen = as_generator(rng)
    m = (size + 1) // 2
    u = gen.random(2 * m)
    z0, z1 = box_muller(u[:m], u[m:])
    return np.column_stack([z0, z1]).reshape(-1)[:size]


def sample_projection(n: int, rng) -> np.ndarray:
    """n x n matrix of independent N(0, 1/n) entries (row-major fill). Columns are not rescaled."""
    if n < 1:
        raise ShapeError(f"projection size must be >= 1, got {n}")
    R = standard_normals(rng, n * n).reshape(n, n) / np.sqrt(n)
    R.setflags(write=False)
    return R


def project_segment(R: np.ndarray, seg) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    x = np.asarray(seg, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ShapeError(f"projection must be square, got {R.shape}")
    if x.shape != (R.shape[1],):
        raise ShapeError(f"segment of shape {x.shape} does not fit a {R.shape} projection")
    if not np.all(np.isfinite(x)):
        raise ValidationError("segment contains non-finite entries")
    return R @ x


def project_segments(R: np.ndarray, segs: np.ndarray) -> np.ndarray:
    """Row-wise projection of a B x n segment matrix.

    Each output row is computed as its own matrix-vector product so results do not
    depend on how many segments are batched together.
    """
    R = np.asarray(R, dtype=float)
    segs = np.asarray(segs, dtype=float)
    if segs.ndim != 2 or segs.shape[1] != R.shape[1]:
        raise ShapeError(f"segments of shape {segs.shape} do not fit a {R.shape} projection")
    return np.einsum("ij,bj->bi", R, segs, optimize=False)
