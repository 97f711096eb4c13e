"""Full-precision linear SVM on real-valued features.

Used in two places: trained on a subset of binary embeddings to seed the
ternary solver, and trained on cosine random features as the full-precision
accuracy/memory baseline. The solver is a deterministic-order stochastic
subgradient method (Pegasos-style) with tail averaging and seed-controlled
shuffling; there is no bias term, matching the intercept-free decision
functions used everywhere else in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .fastfood import FastfoodTransform, apply_batch


@dataclass
class LinearModel:
    """Weight vector of an intercept-free linear classifier."""

    w: np.ndarray  # (p,) float64


def svm_objective(w: np.ndarray, X: np.ndarray, y: np.ndarray, lam: float) -> float:
    """(1/n) sum hinge(y_i, w.x_i) + lam * ||w||^2."""
    margins = 1.0 - y * (X @ w)
    return float(np.mean(np.maximum(0.0, margins)) + lam * float(w @ w))


def train_linear(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    epochs: int = 20,
    seed=0,
    average_start: float = 0.5,
) -> LinearModel:
    """Minimize (1/n) sum max(0, 1 - y_i w.x_i) + lam ||w||^2 approximately.

    Single-sample subgradient steps with the 1/(2 lam t) rate, projection
    onto the ||w|| <= 1/sqrt(2 lam) ball, and uniform averaging of the
    iterates from the ``average_start`` fraction of steps onward.
    """
    X = np.atleast_2d(X)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if n < 1:
        raise ValueError("cannot train on empty data")
    if lam <= 0:
        raise ValueError("lam must be positive")
    if set(np.unique(y)) - {-1.0, 1.0}:
        raise ValueError("labels must be +-1")
    lam2 = 2.0 * lam  # our lam ||w||^2 equals the classic (lam2/2) ||w||^2
    radius = 1.0 / math.sqrt(lam2)
    rng = np.random.default_rng(seed)
    w = np.zeros(p, dtype=np.float64)
    w_sum = np.zeros(p, dtype=np.float64)
    n_avg = 0
    total = epochs * n
    start_avg = int(total * average_start)
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            margin = y[i] * float(X[i] @ w)
            w *= 1.0 - 1.0 / t
            if margin < 1.0:
                w += (y[i] / (lam2 * t)) * X[i]
            nw = float(np.linalg.norm(w))
            if nw > radius:
                w *= radius / nw
            if t > start_avg:
                w_sum += w
                n_avg += 1
    return LinearModel(w=w_sum / n_avg if n_avg else w)


def train_one_vs_all(
    X: np.ndarray,
    labels: np.ndarray,
    class_count: int,
    lam: float,
    epochs: int = 20,
    seed=0,
) -> np.ndarray:
    """One binary model per class id; returns the (class_count, p) weight matrix."""
    if class_count < 2:
        raise ValueError("need at least 2 classes")
    X = np.atleast_2d(X)
    W = np.zeros((class_count, X.shape[1]), dtype=np.float64)
    for k in range(class_count):
        yk = np.where(labels == k, 1.0, -1.0)
        W[k] = train_linear(X, yk, lam, epochs=epochs, seed=[seed, k]).w
    return W


def predict_sign(w: np.ndarray, X: np.ndarray) -> np.ndarray:
    """+-1 predictions; a score of exactly zero maps to +1."""
    scores = np.atleast_2d(X) @ w
    return np.where(scores >= 0.0, 1, -1).astype(np.int64)


def predict_argmax(W: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Class ids by highest one-vs-all score; ties go to the lowest id."""
    scores = np.atleast_2d(X) @ W.T
    return np.argmax(scores, axis=1).astype(np.int64)


def rfe_features(
    projection: Union[FastfoodTransform, np.ndarray],
    b: np.ndarray,
    X: np.ndarray,
) -> np.ndarray:
    """Random cosine features sqrt(2/p) cos(Vx + b).

    ``projection`` is either a structured transform or an explicit (d, p)
    matrix; inner products of these features estimate the Gaussian kernel.
    """
    X2 = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if isinstance(projection, FastfoodTransform):
        U = apply_batch(projection, X2)
        p = projection.p
    else:
        R = np.asarray(projection, dtype=np.float64)
        if X2.shape[1] != R.shape[0]:
            raise ValueError(f"dimension mismatch: input has {X2.shape[1]}, matrix has {R.shape[0]}")
        U = X2 @ R
        p = R.shape[1]
    feats = math.sqrt(2.0 / p) * np.cos(U + np.asarray(b, dtype=np.float64))
    return feats if np.asarray(X).ndim > 1 else feats[0]
