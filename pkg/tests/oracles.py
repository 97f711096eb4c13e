"""Independent reference implementations the tests check the library against.

Everything here recomputes results from first principles (dense matrices,
exhaustive enumeration, derivative-free search) and deliberately shares no
code with the paths under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from bitsvm.fwht import hadamard_matrix


def golden_section(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Minimize a unimodal function on [lo, hi] by golden-section search."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def dense_block_matrix(block, sigma: float) -> np.ndarray:
    """Explicit d x d matrix of one structured factor, from its definition."""
    d = block.B.shape[0]
    H = hadamard_matrix(d).astype(np.float64)
    P = np.eye(d)[block.perm]  # row-select: (P v)_i = v[perm[i]]
    return (
        np.diag(block.S.astype(np.float64))
        @ H
        @ np.diag(block.G.astype(np.float64))
        @ P
        @ H
        @ np.diag(block.B.astype(np.float64))
    ) / (sigma * math.sqrt(d))


def dense_transform_matrix(transform) -> np.ndarray:
    """Explicit (p, d) matrix of the whole stacked projection."""
    rows = np.vstack([dense_block_matrix(b, transform.sigma) for b in transform.blocks])
    return rows[: transform.p]


def naive_sign_dot(a_signs: np.ndarray, b_signs: np.ndarray) -> int:
    """Plain integer dot product of +-1 vectors."""
    return int(np.sum(a_signs.astype(np.int64) * b_signs.astype(np.int64)))


def naive_hamming(a_bits: np.ndarray, b_bits: np.ndarray) -> int:
    """Bit-by-bit count of differing positions."""
    return int(np.sum(a_bits != b_bits))


def hinge_objective(Z: np.ndarray, y: np.ndarray, w: np.ndarray, alpha: float, lam: float) -> float:
    """From-scratch hinge + l2 objective, no caches."""
    margins = 1.0 - alpha * y.astype(np.float64) * (Z.astype(np.float64) @ w.astype(np.float64))
    return float(np.mean(np.maximum(0.0, margins)) + lam * alpha * alpha * float(np.sum(w.astype(np.float64) ** 2)))


def square_objective(Z: np.ndarray, y: np.ndarray, w: np.ndarray, alpha: float, lam: float) -> float:
    """From-scratch square-loss + l2 objective."""
    e = y.astype(np.float64) - alpha * (Z.astype(np.float64) @ w.astype(np.float64))
    return float(np.mean(e * e) + lam * alpha * alpha * float(np.sum(w.astype(np.float64) ** 2)))


def ternary_landscape(Z: np.ndarray, y: np.ndarray, alpha: float, lam: float):
    """Objective of every w in {-1,0,1}^p at fixed alpha, plus local-minimum flags.

    Returns (W, objs, is_local_min) where W is (3^p, p) and a point is a
    local minimum iff no single-coordinate change lowers the objective.
    """
    p = Z.shape[1]
    W = np.array(list(itertools.product((-1, 0, 1), repeat=p)), dtype=np.int64)
    margins = 1.0 - alpha * y.astype(np.float64)[None, :] * (W @ Z.T.astype(np.int64))
    objs = np.mean(np.maximum(0.0, margins), axis=1) + lam * alpha * alpha * np.sum(W * W, axis=1)
    # index of a ternary vector in W under the product(-1,0,1) ordering
    powers = 3 ** np.arange(p - 1, -1, -1)
    idx_of = lambda w: int(np.dot(w + 1, powers))
    is_local = np.ones(W.shape[0], dtype=bool)
    for i, w in enumerate(W):
        for j in range(p):
            for v in (-1, 0, 1):
                if v != w[j]:
                    nb = w.copy()
                    nb[j] = v
                    if objs[idx_of(nb)] < objs[i] - 1e-12:
                        is_local[i] = False
                        break
            if not is_local[i]:
                break
    return W, objs, is_local


def explicit_gaussian_kernel(x: np.ndarray, y: np.ndarray, sigma: float) -> float:
    d = x - y
    return math.exp(-float(d @ d) / (2.0 * sigma * sigma))
