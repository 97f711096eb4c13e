"""Seeded structured random projection for the Gaussian kernel.

Each block reparameterizes a d x d Gaussian matrix as the product
(1/(sigma*sqrt(d))) * S * H * G * P * H * B where H is the Walsh-Hadamard
matrix (applied implicitly), B is a random sign diagonal, P a random
permutation, G a Gaussian diagonal, and S a chi(d)-based row-norm
correction. ceil(p/d) independent blocks are stacked and truncated to p
output coordinates, so each output coordinate is marginally distributed as
a projection onto an N(0, sigma^-2 I_d) direction.

Storage is float32 / int (32 bits per retained parameter, 1 bit per sign);
all arithmetic runs in float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fwht import fwht_inplace

RNG_NAME = "pcg64"  # np.random.default_rng bit generator, recorded in model files


@dataclass
class FastfoodBlock:
    """One d x d structured factor: sign, permutation, Gaussian, scaling diagonals."""

    B: np.ndarray  # (d,) int8 in {-1, +1}
    perm: np.ndarray  # (d,) int64, a permutation of 0..d-1
    G: np.ndarray  # (d,) float32, iid N(0, 1)
    S: np.ndarray  # (d,) float32, chi(d) draws divided by ||G||_2

    def __post_init__(self) -> None:
        d = self.B.shape[0]
        if not np.all(np.abs(self.B) == 1):
            raise ValueError("B entries must be +-1")
        if sorted(self.perm.tolist()) != list(range(d)):
            raise ValueError("perm is not a permutation")
        if np.any(self.S <= 0):
            raise ValueError("S entries must be strictly positive")


@dataclass
class FastfoodTransform:
    """Stacked blocks projecting d-dim inputs to p output coordinates."""

    blocks: list[FastfoodBlock]
    d: int
    p: int
    sigma: float
    seed: int

    def __post_init__(self) -> None:
        if self.p > 0 and len(self.blocks) != -(-self.p // self.d):
            raise ValueError("block count must be ceil(p/d)")


def _sample_blocks(rng: np.random.Generator, d: int, n_blocks: int) -> list[FastfoodBlock]:
    """Draw blocks in the canonical order (B, perm, G, S chi draws) per block."""
    blocks = []
    for _ in range(n_blocks):
        B = (2 * rng.integers(0, 2, size=d, dtype=np.int64) - 1).astype(np.int8)
        perm = rng.permutation(d).astype(np.int64)
        G = rng.standard_normal(d)
        chi = np.sqrt(rng.chisquare(d, size=d))
        S = chi / np.linalg.norm(G)
        blocks.append(FastfoodBlock(B=B, perm=perm, G=G.astype(np.float32), S=S.astype(np.float32)))
    return blocks


def sample_transform(d: int, p: int, sigma: float, seed: int) -> FastfoodTransform:
    """Sample a transform deterministically from (d, p, sigma, seed)."""
    if d < 2 or d & (d - 1):
        raise ValueError(f"d must be a power of two >= 2, got {d}")
    if p < 1:
        raise ValueError("p must be >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    blocks = _sample_blocks(rng, d, -(-p // d))
    # sigma is float32-quantized up front so serialization is lossless
    return FastfoodTransform(blocks=blocks, d=d, p=p, sigma=float(np.float32(sigma)), seed=int(seed))


def apply_batch(transform: FastfoodTransform, X: np.ndarray) -> np.ndarray:
    """Project rows of X: returns (n, p) float64, truncated to p coordinates."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != transform.d:
        raise ValueError(f"dimension mismatch: input has {X.shape[1]}, transform expects {transform.d}")
    d = transform.d
    scale = 1.0 / (transform.sigma * math.sqrt(d))
    cols = []
    for blk in transform.blocks:
        v = X * blk.B.astype(np.float64)
        fwht_inplace(v)
        v = v[:, blk.perm]
        v *= blk.G.astype(np.float64)
        fwht_inplace(v)
        v *= blk.S.astype(np.float64)
        v *= scale
        cols.append(v)
    if not cols:
        return np.zeros((X.shape[0], 0), dtype=np.float64)
    return np.hstack(cols)[:, : transform.p]


def apply(transform: FastfoodTransform, x: np.ndarray) -> np.ndarray:
    """Project a single d-vector to p coordinates."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("apply expects a 1-D vector; use apply_batch for matrices")
    return apply_batch(transform, x[None, :])[0]


def memory_report(transform: FastfoodTransform) -> int:
    """Storage bits for the projection: 32 per S/G/perm entry, 1 per B sign."""
    return sum(3 * blk.B.shape[0] * 32 + blk.B.shape[0] for blk in transform.blocks)


def sample_dense_gaussian(d: int, p: int, sigma: float, seed: int) -> np.ndarray:
    """Explicit (d, p) matrix with iid N(0, sigma^-2) entries.

    Baseline-only path: this is the unstructured projection the structured
    transform replaces; it costs d*p*32 bits to store.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((d, p)) / sigma
