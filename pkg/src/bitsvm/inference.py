"""Bit-packed prediction: XNOR/POPCOUNT dot products, pruning, cost accounting.

Ternary coefficients are stored as two planes: a sign plane (bit 1 for +1)
and a support plane (bit 1 for nonzero); sign bits under a zero support bit
are canonically 0. For binary classification the zero coefficients are
dropped entirely, leaving a plain sign vector over the surviving
coordinates plus the keep mask that selects them from an embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataio import Scaler, apply_scaler, pad_to_pow2
from .embedding import BitVector, EmbeddingParams, embed_matrix, popcount
from .fastfood import memory_report
from .ternary_trainer import TernaryModel

_WORD = 64


@dataclass
class PackedTernary:
    """Two-plane encoding of a ternary vector: w_j = ws_j ? (wp_j ? +1 : -1) : 0."""

    wp: BitVector  # sign plane
    ws: BitVector  # support plane

    def __post_init__(self) -> None:
        if self.wp.n != self.ws.n:
            raise ValueError("plane lengths differ")
        if np.any(self.wp.words & ~self.ws.words):
            raise ValueError("sign bits outside the support must be zero")

    @property
    def n(self) -> int:
        return self.wp.n

    @classmethod
    def from_ternary(cls, w: np.ndarray) -> "PackedTernary":
        w = np.asarray(w)
        if np.any(np.abs(w.astype(np.int64)) > 1):
            raise ValueError("coefficients must be in {-1, 0, 1}")
        return cls(wp=BitVector.from_bits(w > 0), ws=BitVector.from_bits(w != 0))

    def decode(self) -> np.ndarray:
        signs = np.where(self.wp.to_bits(), 1, -1).astype(np.int8)
        return np.where(self.ws.to_bits(), signs, 0).astype(np.int8)


@dataclass
class PrunedBinaryModel:
    """Binary-task model with zero coefficients removed."""

    w_packed: BitVector  # signs of the surviving coordinates
    keep_mask: BitVector  # length-p mask of nonzero coefficients
    len_active: int

    def __post_init__(self) -> None:
        if self.len_active != popcount(self.keep_mask.words):
            raise ValueError("len_active does not match the keep mask")
        if self.w_packed.n != self.len_active:
            raise ValueError("packed sign length does not match len_active")


def dot_binary(z: BitVector, w: BitVector) -> int:
    """Integer dot product of two sign vectors: 2 POPCOUNT(z XNOR w) - len.

    Runs on arbitrary-precision integers: one XNOR, one mask, one popcount
    regardless of width, with no per-word dispatch overhead.
    """
    if z.n != w.n:
        raise ValueError(f"length mismatch: {z.n} vs {w.n}")
    mask = (1 << z.n) - 1
    agree = ((~(z.as_int() ^ w.as_int())) & mask).bit_count()
    return 2 * agree - z.n


def dot_masked(z: BitVector, pt: PackedTernary) -> int:
    """Dot product restricted to the support: 2 POPCOUNT(z XNOR wp AND ws) - |ws|.

    The subtrahend is the support population, which reduces to the full
    length exactly when no coefficient is zero.
    """
    if z.n != pt.n:
        raise ValueError(f"length mismatch: {z.n} vs {pt.n}")
    agree = ((~(z.as_int() ^ pt.wp.as_int())) & pt.ws.as_int()).bit_count()
    return 2 * agree - pt.ws.as_int().bit_count()


def _dots_masked_rows(words: np.ndarray, pt: PackedTernary) -> np.ndarray:
    """dot_masked for every packed row of an (n, nwords) matrix."""
    agree = np.bitwise_count(~(words ^ pt.wp.words[None, :]) & pt.ws.words[None, :]).sum(axis=1)
    return (2 * agree.astype(np.int64)) - popcount(pt.ws.words)


def prune(model: TernaryModel) -> PrunedBinaryModel:
    """Drop zero coefficients; prediction over compacted bits is unchanged."""
    w = np.asarray(model.w, dtype=np.int8)
    keep = w != 0
    return PrunedBinaryModel(
        w_packed=BitVector.from_bits(w[keep] > 0),
        keep_mask=BitVector.from_bits(keep),
        len_active=int(np.count_nonzero(keep)),
    )


def compact_bits(z: BitVector, keep_mask: BitVector) -> BitVector:
    """Select the embedding bits under the keep mask, preserving order."""
    if z.n != keep_mask.n:
        raise ValueError(f"length mismatch: {z.n} vs {keep_mask.n}")
    return BitVector.from_bits(z.to_bits()[keep_mask.to_bits()])


@dataclass
class ModelBundle:
    """Everything needed for prediction: scaler, embedding, per-class models.

    One model means a single binary classifier scored by the sign of the
    pruned dot product; several mean one-vs-all with argmax over
    alpha_k * (w_k . z). All float parameters are float32-quantized so a
    serialization round trip is bit-exact.
    """

    scaler: Scaler
    params: EmbeddingParams
    models: list[TernaryModel]
    label_map: list[int]
    d_raw: int
    lam: float
    seed: int

    @classmethod
    def build(
        cls,
        scaler: Scaler,
        params: EmbeddingParams,
        models: Sequence[TernaryModel],
        label_map: Sequence[int],
        d_raw: int,
        lam: float,
        seed: int,
    ) -> "ModelBundle":
        scaler32 = Scaler(
            lo=np.asarray(scaler.lo, dtype=np.float32).astype(np.float64),
            hi=np.asarray(scaler.hi, dtype=np.float32).astype(np.float64),
        )
        quantized = [
            TernaryModel(
                w=np.asarray(m.w, dtype=np.int8),
                alpha=float(np.float32(m.alpha)),
                lam=float(np.float32(m.lam)),
                class_id=m.class_id,
            )
            for m in models
        ]
        return cls(
            scaler=scaler32,
            params=params,
            models=quantized,
            label_map=list(label_map),
            d_raw=int(d_raw),
            lam=float(np.float32(lam)),
            seed=int(seed),
        )

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def class_count(self) -> int:
        return len(self.label_map)

    @property
    def is_binary(self) -> bool:
        return len(self.models) == 1

    def packed(self) -> list[PackedTernary]:
        return [PackedTernary.from_ternary(m.w) for m in self.models]

    def prepare(self, X: np.ndarray) -> np.ndarray:
        """Normalize raw features and pad to the transform's input width."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.d_raw:
            raise ValueError(f"expected {self.d_raw} raw features, got {X.shape[1]}")
        return pad_to_pow2(apply_scaler(self.scaler, X))


def predict_binary(bundle: ModelBundle, x: np.ndarray) -> int:
    """+-1 for one raw sample via the pruned model; sign(0) maps to +1.

    The scale alpha only stretches the score, so it plays no part here.
    """
    if not bundle.is_binary:
        raise ValueError("bundle holds a one-vs-all model; use predict_multiclass")
    pruned = prune(bundle.models[0])
    X = bundle.prepare(np.asarray(x, dtype=np.float64)[None, :])
    z = BitVector(embed_matrix(bundle.params, X)[0], bundle.p)
    score = dot_binary(compact_bits(z, pruned.keep_mask), pruned.w_packed) if pruned.len_active else 0
    return 1 if score >= 0 else -1


def predict_multiclass(bundle: ModelBundle, x: np.ndarray) -> int:
    """Class id with the largest alpha_k * (w_k . z); ties take the lowest id."""
    X = bundle.prepare(np.asarray(x, dtype=np.float64)[None, :])
    z_words = embed_matrix(bundle.params, X)
    scores = [
        m.alpha * _dots_masked_rows(z_words, pt)[0]
        for m, pt in zip(bundle.models, bundle.packed())
    ]
    return int(np.argmax(scores))


def predict_ids(bundle: ModelBundle, X: np.ndarray) -> np.ndarray:
    """Vectorized prediction of class ids for raw sample rows."""
    Xp = bundle.prepare(X)
    words = embed_matrix(bundle.params, Xp)
    if bundle.is_binary:
        dots = _dots_masked_rows(words, bundle.packed()[0])
        return (dots >= 0).astype(np.int64)  # id 1 iff predicted +1
    scores = np.stack(
        [m.alpha * _dots_masked_rows(words, pt) for m, pt in zip(bundle.models, bundle.packed())]
    )
    return np.argmax(scores, axis=0).astype(np.int64)


def predict_labels(bundle: ModelBundle, X: np.ndarray) -> np.ndarray:
    """Raw-label predictions for raw sample rows."""
    ids = predict_ids(bundle, X)
    return np.asarray(bundle.label_map, dtype=np.int64)[ids]


def cost_report(bundle: ModelBundle) -> dict:
    """Inference footprint: storage bits by section plus word/float op counts.

    transform_bits covers the projection diagonals, permutations, and both
    dither vectors; embedding_bits is one bit per embedded coordinate;
    classifier_bits is the pruned sign plane for a binary model and the
    two planes per class otherwise (alpha scalars are not counted, matching
    the convention that drops O(1) terms). bops counts the XNOR/AND/POPCOUNT
    word operations of one prediction; flops counts the butterfly adds,
    diagonal multiplies, and cosine/dither evaluations of one embedding.
    """
    p = bundle.p
    d = bundle.params.d
    blocks = len(bundle.params.transform.blocks)
    transform_bits = memory_report(bundle.params.transform) + 2 * 32 * p
    embedding_bits = p
    if bundle.is_binary:
        pruned = prune(bundle.models[0])
        classifier_bits = pruned.len_active
        bops = 2 * (-(-pruned.len_active // _WORD))
    else:
        classifier_bits = 2 * bundle.class_count * p
        bops = 3 * (-(-p // _WORD)) * bundle.class_count
    flops = blocks * (2 * d * int(math.log2(d)) + 4 * d) + 3 * p if p else 0
    if not bundle.is_binary:
        flops += bundle.class_count  # alpha scaling of the integer scores
    return {
        "transform_bits": transform_bits,
        "embedding_bits": embedding_bits,
        "classifier_bits": classifier_bits,
        "bops": bops,
        "flops": flops,
    }


def rfe_reference_bits(d: int, p: int, class_count: int) -> int:
    """Footprint of the dense cosine-feature baseline at the same (d, p, c)."""
    return d * p * 32 + p * 32 + class_count * p * 32
