"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time from the ``HG_BACKEND``
environment variable (``numba`` or ``numpy``).  When unset, numba is used if
it imports cleanly.  Both paths are always importable as ``*_numpy`` /
``*_numba`` so they can be compared directly.
"""

import math
import os
import warnings

import numpy as np

EXP_FLOOR = -745.0

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAS_NUMBA = False


def _select_backend():
    requested = os.environ.get("HG_BACKEND", "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise ValueError(f"HG_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numpy":
        return "numpy"
    if not HAS_NUMBA:
        if requested == "numba":
            warnings.warn("HG_BACKEND=numba requested but numba is not available; "
                          "falling back to numpy", RuntimeWarning, stacklevel=2)
        return "numpy"
    return "numba"


BACKEND = _select_backend()


# --------------------------------------------------------------------------
# numpy reference implementations


def vn_batch_numpy(proj):
    """V_n(f) for every probe column of a batch of centred projections.

    ``proj[b, j, k]`` is the inner product of probe ``k`` with the ``j``-th
    centred curve of batch member ``b``.  Returns an array of shape (B, M).
    """
    n = proj.shape[1]
    s = np.cos(proj).sum(axis=1) + np.sin(proj).sum(axis=1)
    sig2 = np.einsum("bjk,bjk->bk", proj, proj) / n
    return (s - n * np.exp(np.maximum(-0.5 * sig2, EXP_FLOOR))) / math.sqrt(n)


def pair_exp_sum_numpy(gram):
    """Sum over all (j, k) of exp(-d_jk / 2), d_jk = G_jj + G_kk - 2 G_jk."""
    diag = np.diagonal(gram, axis1=1, axis2=2)
    d = diag[:, :, None] + diag[:, None, :] - 2.0 * gram
    arg = np.maximum(-0.5 * np.maximum(d, 0.0), EXP_FLOOR)
    return np.exp(arg).sum(axis=(1, 2))


# --------------------------------------------------------------------------
# numba implementations

if HAS_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def vn_batch_numba(proj):
        nb, n, m = proj.shape
        out = np.empty((nb, m))
        rootn = math.sqrt(n)
        for b in range(nb):
            for k in range(m):
                s = 0.0
                ss = 0.0
                for j in range(n):
                    p = proj[b, j, k]
                    s += math.cos(p) + math.sin(p)
                    ss += p * p
                arg = -0.5 * ss / n
                if arg < EXP_FLOOR:
                    arg = EXP_FLOOR
                out[b, k] = (s - n * math.exp(arg)) / rootn
        return out

    @numba.njit(cache=True, nogil=True)
    def pair_exp_sum_numba(gram):
        nb, n, _ = gram.shape
        out = np.empty(nb)
        for b in range(nb):
            # diagonal terms are exp(0) = 1; the off-diagonal sum is symmetric
            acc = 0.0
            for j in range(n):
                gjj = gram[b, j, j]
                for k in range(j + 1, n):
                    d = gjj + gram[b, k, k] - 2.0 * gram[b, j, k]
                    if d < 0.0:
                        d = 0.0
                    arg = -0.5 * d
                    if arg < EXP_FLOOR:
                        arg = EXP_FLOOR
                    acc += math.exp(arg)
            out[b] = n + 2.0 * acc
        return out

else:  # pragma: no cover
    vn_batch_numba = None
    pair_exp_sum_numba = None


if BACKEND == "numba":
    vn_batch = vn_batch_numba
    pair_exp_sum = pair_exp_sum_numba
else:
    vn_batch = vn_batch_numpy
    pair_exp_sum = pair_exp_sum_numpy
