"""Dithered-cosine binary embedding and packed bit-vector primitives.

An input x is embedded as sign(cos(Vx + b) + t) where V is the structured
projection, b is a uniform [0, 2pi] phase dither and t a uniform [-1, 1]
threshold dither. Bits encode +1 as 1 and -1 as 0, packed LSB-first into
64-bit words with a zero tail; that layout is part of the model-file
contract. A sign tie at exactly zero maps to +1 so embeddings are
bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fastfood import FastfoodTransform, _sample_blocks, apply, apply_batch

_WORD = 64


def _tail_mask(n: int) -> np.ndarray:
    """All-ones per word, except unused tail bits of the last word."""
    nwords = -(-n // _WORD)
    mask = np.full(nwords, np.uint64(0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    r = n % _WORD
    if r:
        mask[-1] = np.uint64((1 << r) - 1)
    return mask


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack boolean rows (..., n) into LSB-first uint64 words (..., ceil(n/64))."""
    bits = np.asarray(bits, dtype=bool)
    n = bits.shape[-1]
    nbytes = -(-n // 8)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    pad = -nbytes % 8
    if pad:
        shape = packed.shape[:-1] + (pad,)
        packed = np.concatenate([packed, np.zeros(shape, dtype=np.uint8)], axis=-1)
    return np.ascontiguousarray(packed).view(np.uint64)


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`: words (..., w) back to booleans (..., n)."""
    raw = np.ascontiguousarray(words).view(np.uint8)
    bits = np.unpackbits(raw, axis=-1, bitorder="little")
    return bits[..., :n].astype(bool)


def popcount(words: np.ndarray) -> int:
    """Total number of set bits across an array of words."""
    return int(np.bitwise_count(words).sum())


class BitVector:
    """Packed vector over {-1, +1}: bit 1 encodes +1, bit 0 encodes -1."""

    __slots__ = ("words", "n", "_ival")

    def __init__(self, words: np.ndarray, n: int):
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (-(-n // _WORD),):
            raise ValueError("word count does not match bit length")
        if n % _WORD and int(words[-1]) >> (n % _WORD):
            raise ValueError("tail bits beyond the declared length must be zero")
        self.words = words
        self.n = n
        self._ival: int | None = None

    def as_int(self) -> int:
        """The packed bits as one arbitrary-precision integer (cached)."""
        if self._ival is None:
            self._ival = int.from_bytes(self.words.tobytes(), "little")
        return self._ival

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "BitVector":
        bits = np.asarray(bits, dtype=bool)
        return cls(pack_bits(bits), bits.shape[0])

    @classmethod
    def from_signs(cls, signs: np.ndarray) -> "BitVector":
        signs = np.asarray(signs)
        if not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be +-1")
        return cls.from_bits(signs > 0)

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.n)

    def to_signs(self) -> np.ndarray:
        return np.where(self.to_bits(), 1, -1).astype(np.int8)

    def invert(self) -> "BitVector":
        return BitVector((~self.words) & _tail_mask(self.n), self.n)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BitVector)
            and self.n == other.n
            and bool(np.array_equal(self.words, other.words))
        )

    def __repr__(self) -> str:
        return f"BitVector(n={self.n})"


@dataclass
class EmbeddingParams:
    """Projection plus the two dither vectors, all reconstructible from one seed.

    The random objects are drawn in a fixed order (per block: signs,
    permutation, Gaussian, scaling; then b; then t) so serialized models are
    portable.
    """

    transform: FastfoodTransform
    b: np.ndarray  # (p,) float32 in [0, 2pi]
    t: np.ndarray  # (p,) float32 in [-1, 1]

    @classmethod
    def sample(cls, d: int, p: int, sigma: float, seed: int) -> "EmbeddingParams":
        if d < 2 or d & (d - 1):
            raise ValueError(f"d must be a power of two >= 2, got {d}")
        if p < 1 or sigma <= 0:
            raise ValueError("need p >= 1 and sigma > 0")
        rng = np.random.default_rng(seed)
        blocks = _sample_blocks(rng, d, -(-p // d))
        # float32-quantized sigma keeps serialization lossless
        transform = FastfoodTransform(blocks=blocks, d=d, p=p, sigma=float(np.float32(sigma)), seed=int(seed))
        b = rng.uniform(0.0, 2.0 * math.pi, size=p).astype(np.float32)
        t = rng.uniform(-1.0, 1.0, size=p).astype(np.float32)
        return cls(transform=transform, b=b, t=t)

    @property
    def p(self) -> int:
        return self.transform.p

    @property
    def d(self) -> int:
        return self.transform.d


def embed_bits(params: EmbeddingParams, X: np.ndarray) -> np.ndarray:
    """Boolean embedding of rows of X, shape (n, p). True encodes +1."""
    u = apply_batch(params.transform, X)
    return np.cos(u + params.b.astype(np.float64)) + params.t.astype(np.float64) >= 0.0


def embed(params: EmbeddingParams, x: np.ndarray) -> BitVector:
    """Embed one sample into a packed bit vector of length p."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != params.d:
        raise ValueError(f"expected a vector of length {params.d}")
    return BitVector.from_bits(embed_bits(params, x[None, :])[0])


def embed_matrix(params: EmbeddingParams, X: np.ndarray) -> np.ndarray:
    """Embed rows of X into packed words, shape (n, ceil(p/64))."""
    return pack_bits(embed_bits(params, X))


def embed_signs(params: EmbeddingParams, X: np.ndarray) -> np.ndarray:
    """Embed rows of X as an int8 matrix over {-1, +1}, shape (n, p)."""
    return np.where(embed_bits(params, X), 1, -1).astype(np.int8)


def hamming(a: BitVector, b: BitVector) -> int:
    """Number of differing bits; equals (p - dot(a, b)) / 2 on sign vectors."""
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n}")
    return popcount(a.words ^ b.words)


def h1(u) -> np.ndarray:
    """Lower band: 4/pi^2 * (1 - u) for kernel similarity u in [0, 1]."""
    u = np.asarray(u, dtype=np.float64)
    if np.any(u < 0) or np.any(u > 1):
        raise ValueError("similarity must lie in [0, 1]")
    return (4.0 / math.pi**2) * (1.0 - u)


def h2(u) -> np.ndarray:
    """Upper band: min(sqrt(1 - u)/2, 4/pi^2 * (1 - 2u/3)) for u in [0, 1]."""
    u = np.asarray(u, dtype=np.float64)
    if np.any(u < 0) or np.any(u > 1):
        raise ValueError("similarity must lie in [0, 1]")
    return np.minimum(0.5 * np.sqrt(1.0 - u), (4.0 / math.pi**2) * (1.0 - (2.0 / 3.0) * u))


def gaussian_kernel(X: np.ndarray, Y: np.ndarray, sigma: float) -> np.ndarray:
    """exp(-||x - y||^2 / (2 sigma^2)) for all row pairs of X and Y."""
    X = np.atleast_2d(X)
    Y = np.atleast_2d(Y)
    sq = np.sum(X**2, axis=1)[:, None] + np.sum(Y**2, axis=1)[None, :] - 2.0 * X @ Y.T
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / (2.0 * sigma**2))


def band_check(X: np.ndarray, params: EmbeddingParams, delta: float, eps: float) -> float:
    """Fraction of sample pairs whose normalized Hamming distance leaves the band.

    For each pair the band is [h1(k) - delta, h2(k) + delta] with k the
    Gaussian kernel at the transform's sigma. The guarantee assumes
    p >= log(n^2/eps) / (2 delta^2); eps is the allowed failure probability
    and is not used in the computation itself.
    """
    if not (0.0 < delta and 0.0 < eps < 1.0):
        raise ValueError("need delta > 0 and eps in (0, 1)")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    words = embed_matrix(params, X)
    p = params.p
    kmat = gaussian_kernel(X, X, params.transform.sigma)
    np.clip(kmat, 0.0, 1.0, out=kmat)
    violations = 0
    total = 0
    for i in range(n - 1):
        dh = np.bitwise_count(words[i] ^ words[i + 1 :]).sum(axis=1) / p
        k = kmat[i, i + 1 :]
        lo = h1(k) - delta
        hi = h2(k) + delta
        violations += int(np.sum((dh < lo) | (dh > hi)))
        total += n - 1 - i
    return violations / total if total else 0.0
