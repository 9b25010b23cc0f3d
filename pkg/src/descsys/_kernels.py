"""Hot inner-loop kernels: numba-jitted with a pure-numpy fallback.

Two triangular convolutions dominate the cost of long-horizon runs:
a scalar-weighted history sum (fractional sums applied to a whole
sequence) and a matrix-kernel convolution (forcing terms built from
cached transition matrices). Both scale as O(K^2) in the horizon, so
they are jitted. The numpy implementations remain importable for
cross-checking and benchmarking; set ``DESCSYS_DISABLE_NUMBA=1`` to
select them at import time.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    HAVE_NUMBA = False


def _env_disabled() -> bool:
    return os.environ.get("DESCSYS_DISABLE_NUMBA", "").strip().lower() in {
        "1",
        "true",
        "yes",
    }


USE_NUMBA = HAVE_NUMBA and not _env_disabled()


def active_backend() -> str:
    """Name of the kernel backend selected at import time."""
    return "numba" if USE_NUMBA else "numpy"


def _promote_pair(a: np.ndarray, b: np.ndarray):
    dt = np.result_type(a, b, np.float64)
    return (
        np.ascontiguousarray(a, dtype=dt),
        np.ascontiguousarray(b, dtype=dt),
    )


def weighted_history_sums_numpy(weights: np.ndarray, seq: np.ndarray) -> np.ndarray:
    """out[k] = sum_{j<=k} weights[k-j] * seq[j], for every k."""
    T = seq.shape[0]
    out = np.empty_like(seq)
    for k in range(T):
        out[k] = weights[: k + 1][::-1] @ seq[: k + 1]
    return out


def matrix_kernel_convolution_numpy(mats: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """out[t] = sum_{j<=t} mats[j] @ vecs[t-j], for every t."""
    T = vecs.shape[0]
    out = np.empty_like(vecs)
    for t in range(T):
        out[t] = np.einsum("jab,jb->a", mats[: t + 1], vecs[t::-1])
    return out


if HAVE_NUMBA:

    @njit(cache=True)
    def _weighted_history_sums_jit(weights, seq):
        T, m = seq.shape
        out = np.zeros_like(seq)
        for k in range(T):
            for j in range(k + 1):
                w = weights[k - j]
                for c in range(m):
                    out[k, c] += w * seq[j, c]
        return out

    @njit(cache=True)
    def _matrix_kernel_convolution_jit(mats, vecs):
        T, p = vecs.shape
        out = np.zeros_like(vecs)
        for t in range(T):
            for j in range(t + 1):
                for a in range(p):
                    for b in range(p):
                        out[t, a] += mats[j, a, b] * vecs[t - j, b]
        return out


def weighted_history_sums(weights: np.ndarray, seq: np.ndarray) -> np.ndarray:
    """Triangular weighted sum of a sequence against a scalar kernel.

    ``weights`` has length >= len(seq); ``seq`` is (T, m). Returns the
    (T, m) array of partial convolutions out[k] = sum_{j<=k} w[k-j] seq[j].
    """
    weights, seq = _promote_pair(np.asarray(weights), np.asarray(seq))
    if seq.ndim != 2:
        raise ValueError("seq must be 2-D (samples by components)")
    if weights.shape[0] < seq.shape[0]:
        raise ValueError("need one weight per history offset")
    if seq.shape[0] == 0 or seq.shape[1] == 0:
        return seq.copy()
    if USE_NUMBA:
        return _weighted_history_sums_jit(weights, seq)
    return weighted_history_sums_numpy(weights, seq)


def matrix_kernel_convolution(mats: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Triangular convolution of a vector sequence against matrix kernels.

    ``mats`` is (T, p, p), ``vecs`` is (T, p). Returns the (T, p) array
    out[t] = sum_{j<=t} mats[j] @ vecs[t-j].
    """
    mats, vecs = _promote_pair(np.asarray(mats), np.asarray(vecs))
    if mats.ndim != 3 or vecs.ndim != 2:
        raise ValueError("mats must be 3-D and vecs 2-D")
    if mats.shape[0] < vecs.shape[0]:
        raise ValueError("need one kernel matrix per offset")
    if mats.shape[1] != mats.shape[2] or mats.shape[1] != vecs.shape[1]:
        raise ValueError("kernel blocks must be square and match vec width")
    if vecs.shape[0] == 0 or vecs.shape[1] == 0:
        return vecs.copy()
    if USE_NUMBA:
        return _matrix_kernel_convolution_jit(mats, vecs)
    return matrix_kernel_convolution_numpy(mats, vecs)
