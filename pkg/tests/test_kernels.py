"""Both kernel backends against a literal brute-force oracle."""

import numpy as np
import pytest

from descsys import _kernels


def brute_weighted(weights, seq):
    T, m = seq.shape
    out = np.zeros((T, m), dtype=np.result_type(weights, seq))
    for k in range(T):
        for j in range(k + 1):
            for c in range(m):
                out[k, c] += weights[k - j] * seq[j, c]
    return out


def brute_matconv(mats, vecs):
    T, p = vecs.shape
    out = np.zeros((T, p), dtype=np.result_type(mats, vecs))
    for t in range(T):
        for j in range(t + 1):
            out[t] += mats[j] @ vecs[t - j]
    return out


def backends_weighted():
    impls = [_kernels.weighted_history_sums_numpy, _kernels.weighted_history_sums]
    if _kernels.HAVE_NUMBA:
        impls.append(lambda w, s: _kernels._weighted_history_sums_jit(w, s))
    return impls


def backends_matconv():
    impls = [
        _kernels.matrix_kernel_convolution_numpy,
        _kernels.matrix_kernel_convolution,
    ]
    if _kernels.HAVE_NUMBA:
        impls.append(lambda m, v: _kernels._matrix_kernel_convolution_jit(m, v))
    return impls


def test_active_backend_reports():
    assert _kernels.active_backend() in ("numba", "numpy")


@pytest.mark.parametrize("dtype", [np.float64, np.complex128])
def test_weighted_history_sums_matches_brute_force(dtype):
    rng = np.random.default_rng(3)
    w = rng.standard_normal(17).astype(dtype)
    if dtype == np.complex128:
        w = w + 1j * rng.standard_normal(17)
    seq = rng.standard_normal((17, 3)).astype(dtype)
    expected = brute_weighted(w, seq)
    for impl in backends_weighted():
        np.testing.assert_allclose(impl(w, seq), expected, atol=1e-12)


@pytest.mark.parametrize("dtype", [np.float64, np.complex128])
def test_matrix_kernel_convolution_matches_brute_force(dtype):
    rng = np.random.default_rng(4)
    mats = rng.standard_normal((11, 4, 4)).astype(dtype)
    vecs = rng.standard_normal((11, 4)).astype(dtype)
    if dtype == np.complex128:
        mats = mats + 1j * rng.standard_normal(mats.shape)
    expected = brute_matconv(mats, vecs)
    for impl in backends_matconv():
        np.testing.assert_allclose(impl(mats, vecs), expected, atol=1e-12)


def test_mixed_dtype_promotion():
    rng = np.random.default_rng(5)
    mats = rng.standard_normal((6, 2, 2)) + 1j * rng.standard_normal((6, 2, 2))
    vecs = rng.standard_normal((6, 2))
    out = _kernels.matrix_kernel_convolution(mats, vecs)
    assert out.dtype == np.complex128
    np.testing.assert_allclose(out, brute_matconv(mats, vecs), atol=1e-12)


def test_shape_validation():
    with pytest.raises(ValueError):
        _kernels.weighted_history_sums(np.ones(2), np.ones((5, 1)))
    with pytest.raises(ValueError):
        _kernels.weighted_history_sums(np.ones(5), np.ones(5))
    with pytest.raises(ValueError):
        _kernels.matrix_kernel_convolution(np.ones((5, 2, 3)), np.ones((5, 2)))
    with pytest.raises(ValueError):
        _kernels.matrix_kernel_convolution(np.ones((4, 2, 2)), np.ones((5, 2)))


def test_empty_inputs_pass_through():
    out = _kernels.weighted_history_sums(np.ones(1), np.zeros((1, 0)))
    assert out.shape == (1, 0)
