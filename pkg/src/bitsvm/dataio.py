"""LIBSVM data loading, min-max normalization to [-1, 1], power-of-two padding.

All functions are pure; parsing is single-pass per stream. Normalization
statistics are always fit on training data only and reused for test data.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO, Union

import numpy as np

SparseSample = tuple[np.ndarray, np.ndarray]  # (0-based indices, values)


class DataFormatError(ValueError):
    """Raised for malformed input data files."""


def next_pow2(n: int) -> int:
    """Smallest power of two >= n, floored at 2 so H_2 is always defined."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return max(2, 1 << (n - 1).bit_length())


def parse_libsvm(source: Union[str, Path, TextIO, Iterable[str]]) -> tuple[list[SparseSample], list[int]]:
    """Parse LIBSVM-format lines `<label> <idx>:<val> ...` (1-based indices).

    Returns sparse samples as (indices, values) pairs with 0-based indices,
    plus integer labels. Blank lines are skipped. Indices on a line must be
    strictly increasing; violations raise :class:`DataFormatError` with the
    line number.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as f:
            return parse_libsvm(f)
    samples: list[SparseSample] = []
    labels: list[int] = []
    for line_no, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        try:
            label_f = float(parts[0])
        except ValueError as exc:
            raise DataFormatError(f"line {line_no}: invalid label {parts[0]!r}") from exc
        if not label_f.is_integer():
            raise DataFormatError(f"line {line_no}: non-integer label {parts[0]!r}")
        idxs: list[int] = []
        vals: list[float] = []
        prev = 0
        for tok in parts[1:]:
            if ":" not in tok:
                raise DataFormatError(f"line {line_no}: invalid token {tok!r}")
            idx_s, val_s = tok.split(":", 1)
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError as exc:
                raise DataFormatError(f"line {line_no}: invalid token {tok!r}") from exc
            if idx < 1:
                raise DataFormatError(f"line {line_no}: index {idx} is not 1-based")
            if idx <= prev:
                raise DataFormatError(f"line {line_no}: indices not strictly increasing at {idx}")
            prev = idx
            idxs.append(idx - 1)
            vals.append(val)
        samples.append((np.asarray(idxs, dtype=np.int64), np.asarray(vals, dtype=np.float64)))
        labels.append(int(label_f))
    return samples, labels


def format_libsvm(samples: Sequence[SparseSample], labels: Sequence[int]) -> str:
    """Serialize sparse samples back to LIBSVM text (inverse of parse)."""
    out = io.StringIO()
    for (idxs, vals), label in zip(samples, labels):
        parts = [str(int(label))]
        parts.extend(f"{int(i) + 1}:{v:.17g}" for i, v in zip(idxs, vals))
        out.write(" ".join(parts))
        out.write("\n")
    return out.getvalue()


def densify(samples: Sequence[SparseSample], d: int) -> np.ndarray:
    """Expand sparse samples to a dense (n, d) float64 matrix."""
    X = np.zeros((len(samples), d), dtype=np.float64)
    for i, (idxs, vals) in enumerate(samples):
        if len(idxs) and idxs[-1] >= d:
            raise DataFormatError(f"sample {i}: index {int(idxs[-1]) + 1} exceeds dimension {d}")
        X[i, idxs] = vals
    return X


@dataclass(frozen=True)
class Scaler:
    """Per-feature min/max fitted on training data."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        if np.any(self.lo > self.hi):
            raise ValueError("scaler min exceeds max")


def fit_scaler(X: np.ndarray) -> Scaler:
    """Fit per-feature min/max over the rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] < 1 or X.size == 0:
        raise ValueError("cannot fit scaler on empty data")
    return Scaler(lo=X.min(axis=0), hi=X.max(axis=0))


def apply_scaler(scaler: Scaler, x: np.ndarray) -> np.ndarray:
    """Map features to [-1, 1]: x' = 2(x - min)/(max - min) - 1.

    Constant features (min == max) map to 0. Values outside the fitted
    range are clamped to [-1, 1] so embedded test points stay bounded.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != scaler.lo.shape[0]:
        raise ValueError(f"dimension mismatch: sample has {x.shape[-1]}, scaler has {scaler.lo.shape[0]}")
    span = scaler.hi - scaler.lo
    safe = np.where(span > 0, span, 1.0)
    out = 2.0 * (x - scaler.lo) / safe - 1.0
    out = np.where(span > 0, out, 0.0)
    return np.clip(out, -1.0, 1.0)


def pad_to_pow2(x: np.ndarray) -> np.ndarray:
    """Zero-pad the last axis to the next power of two (minimum 2)."""
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[-1]
    target = next_pow2(d)
    if target == d:
        return x.copy()
    pad = [(0, 0)] * (x.ndim - 1) + [(0, target - d)]
    return np.pad(x, pad)


@dataclass
class Dataset:
    """Normalized, padded samples with contiguous integer class ids.

    For binary tasks (two distinct raw labels) ids are assigned in ascending
    raw-label order and train as {-1, +1} via ``binary_targets``. Multiclass
    ids follow first-seen order. ``label_map[id]`` recovers the raw label.
    """

    samples: np.ndarray  # (n, d_padded) float64 in [-1, 1], padded tail zero
    labels: np.ndarray  # (n,) int64 class ids in 0..class_count-1
    d_raw: int
    d_padded: int
    class_count: int
    label_map: list[int]

    def binary_targets(self) -> np.ndarray:
        """Labels as {-1, +1} (binary datasets only)."""
        if self.class_count != 2:
            raise ValueError(f"dataset has {self.class_count} classes, not 2")
        return (2 * self.labels - 1).astype(np.int64)


def _map_labels(labels: Sequence[int], label_map: Sequence[int] | None) -> tuple[np.ndarray, list[int]]:
    if label_map is None:
        distinct = list(dict.fromkeys(labels))  # first-seen order
        if len(distinct) == 2:
            distinct = sorted(distinct)
        label_map = distinct
    lookup = {lab: i for i, lab in enumerate(label_map)}
    try:
        ids = np.asarray([lookup[lab] for lab in labels], dtype=np.int64)
    except KeyError as exc:
        raise DataFormatError(f"label {exc.args[0]} not present in the model's label set") from None
    return ids, list(label_map)


def build_dataset(
    samples: Sequence[SparseSample],
    labels: Sequence[int],
    d_raw: int | None = None,
    scaler: Scaler | None = None,
    label_map: Sequence[int] | None = None,
) -> tuple[Dataset, Scaler]:
    """Densify, normalize, and pad parsed samples into a :class:`Dataset`.

    Pass the training scaler and label_map to process test data under the
    training-time statistics; omit them to fit fresh ones.
    """
    if not samples:
        raise DataFormatError("no samples")
    if d_raw is None:
        d_raw = scaler.lo.shape[0] if scaler is not None else max(int(i[-1]) + 1 for i, _ in samples if len(i))
    X = densify(samples, d_raw)
    if scaler is None:
        scaler = fit_scaler(X)
    X = apply_scaler(scaler, X)
    X = pad_to_pow2(X)
    ids, label_map = _map_labels(labels, label_map)
    ds = Dataset(
        samples=X,
        labels=ids,
        d_raw=d_raw,
        d_padded=X.shape[1],
        class_count=len(label_map),
        label_map=label_map,
    )
    return ds, scaler


def load_dataset(
    path: Union[str, Path],
    scaler: Scaler | None = None,
    label_map: Sequence[int] | None = None,
) -> tuple[Dataset, Scaler]:
    """Parse a LIBSVM file and build a dataset from it."""
    samples, labels = parse_libsvm(path)
    return build_dataset(samples, labels, scaler=scaler, label_map=label_map)


def make_circles(
    n: int,
    r_inner: float = 1.0,
    r_outer: float = 2.0,
    noise: float = 0.1,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Two concentric noisy annuli in 2-D: label 0 inner, label 1 outer."""
    rng = np.random.default_rng(seed)
    n_inner = n // 2
    labels = np.zeros(n, dtype=np.int64)
    labels[n_inner:] = 1
    radii = np.where(labels == 0, r_inner, r_outer) + rng.normal(0.0, noise, size=n)
    theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
    X = np.stack([radii * np.cos(theta), radii * np.sin(theta)], axis=1)
    return X, labels


def dense_to_sparse(X: np.ndarray) -> list[SparseSample]:
    """Dense rows to sparse (indices, values) pairs, dropping exact zeros."""
    out: list[SparseSample] = []
    for row in np.atleast_2d(X):
        idx = np.nonzero(row)[0].astype(np.int64)
        out.append((idx, row[idx].astype(np.float64)))
    return out
