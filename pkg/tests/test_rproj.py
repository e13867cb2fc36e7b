import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from tsencode import rproj
from tsencode.errors import ShapeError
from tsencode.rproj import project_segment, sample_projection

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_projection_shape_and_determinism():
    R = sample_projection(4, 7)
    assert R.shape == (4, 4) and np.all(np.isfinite(R))
    assert np.array_equal(R, sample_projection(4, 7))
    assert not np.array_equal(R, sample_projection(4, 8))
    assert sample_projection(1, 0).shape == (1, 1)


def test_pooled_moments_n4():
    rng = np.random.default_rng(123)
    pooled = np.concatenate([sample_projection(4, rng).ravel() for _ in range(100_000)])
    se = np.sqrt(0.25 / pooled.size)
    assert abs(pooled.mean()) < 3 * se
    assert abs(pooled.var() - 0.25) < 0.05 * 0.25


def test_n1_variance_is_one():
    rng = np.random.default_rng(9)
    draws = np.array([sample_projection(1, rng)[0, 0] for _ in range(20_000)])
    assert abs(draws.var() - 1.0) < 0.05


def test_box_muller_is_standard_normal():
    z = rproj.standard_normals(0, 100_001)
    assert z.size == 100_001
    assert stats.kstest(z, "norm").pvalue > 0.01


def test_project_examples():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(project_segment(np.eye(4), x), x)
    P = np.eye(4)[[1, 0, 2, 3]]
    np.testing.assert_array_equal(project_segment(P, x), [2, 1, 3, 4])
    R = np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1], [1, 0, 0, 1]], dtype=float)
    np.testing.assert_array_equal(project_segment(R, x), [3, 5, 7, 5])


def test_project_shape_errors():
    with pytest.raises(ShapeError):
        project_segment(np.eye(4), np.ones(3))
    with pytest.raises(ShapeError):
        project_segment(np.ones((2, 3)), np.ones(3))


@given(
    st.integers(0, 2**32 - 1),
    arrays(float, 4, elements=finite),
    arrays(float, 4, elements=finite),
    st.floats(-10, 10),
    st.floats(-10, 10),
)
def test_linearity(seed, x, y, a, b):
    R = sample_projection(4, seed)
    lhs = project_segment(R, a * x + b * y)
    rhs = a * project_segment(R, x) + b * project_segment(R, y)
    scale = 1 + np.abs(R).sum() * (abs(a) * np.abs(x).max() + abs(b) * np.abs(y).max())
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * scale, rtol=0)


def test_batched_rows_match_single_rows():
    R = sample_projection(4, 3)
    segs = np.random.default_rng(0).standard_normal((50, 4))
    batch = rproj.project_segments(R, segs)
    single = np.array([rproj.project_segments(R, s[None])[0] for s in segs])
    assert np.array_equal(batch, single)
    np.testing.assert_allclose(batch, segs @ R.T, atol=1e-14)
