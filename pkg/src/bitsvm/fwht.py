"""In-place fast Walsh-Hadamard transform.

The transform is unnormalized: applying it twice multiplies a vector by its
length. The 1/sqrt(d) factor that would make it orthonormal is folded into
the structured-projection scaling constant instead, which keeps the
butterfly addition-only.
"""

from __future__ import annotations

import numpy as np


def _check_pow2(d: int) -> None:
    if d < 2 or d & (d - 1):
        raise ValueError(f"length must be a power of two >= 2, got {d}")


def fwht_inplace(v: np.ndarray) -> np.ndarray:
    """Apply the Walsh-Hadamard transform along the last axis, in place.

    Accepts a 1-D vector or a batch shaped (..., d). Uses the iterative
    butterfly (H_2 = [[1, 1], [1, -1]] recursion), O(d log d) per row.
    Returns the mutated input array.
    """
    d = v.shape[-1]
    _check_pow2(d)
    x = v.reshape(-1, d)
    h = 1
    while h < d:
        y = x.reshape(-1, d // (2 * h), 2, h)
        top = y[:, :, 0, :] + y[:, :, 1, :]
        bot = y[:, :, 0, :] - y[:, :, 1, :]
        y[:, :, 0, :] = top
        y[:, :, 1, :] = bot
        h *= 2
    return v


def fwht(v: np.ndarray) -> np.ndarray:
    """Out-of-place variant of :func:`fwht_inplace` (float64 copy)."""
    out = np.array(v, dtype=np.float64, copy=True)
    return fwht_inplace(out)


def hadamard_matrix(d: int) -> np.ndarray:
    """Explicit H_d built from the recursive definition. Test oracle only."""
    _check_pow2(d)
    h = np.array([[1, 1], [1, -1]], dtype=np.int64)
    while h.shape[0] < d:
        h = np.block([[h, h], [h, -h]])
    return h
