"""Kilobyte-scale kernel SVM.

Trains classifiers for shift-invariant (Gaussian) kernels whose inference
bundle is tens of kilobytes: a seeded structured projection replaces the
dense Gaussian matrix, samples become packed sign vectors of dithered
cosine features, and the linear model on top uses ternary coefficients
executed with XNOR/POPCOUNT word operations.
"""

from .dataio import Dataset, Scaler, load_dataset, make_circles
from .embedding import BitVector, EmbeddingParams, embed, embed_matrix, embed_signs, hamming
from .fastfood import FastfoodTransform, apply, apply_batch, memory_report, sample_transform
from .fwht import fwht, fwht_inplace
from .inference import (
    ModelBundle,
    PackedTernary,
    PrunedBinaryModel,
    cost_report,
    dot_binary,
    dot_masked,
    predict_binary,
    predict_labels,
    predict_multiclass,
    prune,
)
from .linear_svm import LinearModel, rfe_features, train_linear
from .model_store import load, save
from .ternary_trainer import (
    TernaryModel,
    TrainResult,
    TrainState,
    initialize,
    solve_alpha,
    train,
    train_binary,
    train_multiclass,
)

__version__ = "0.1.0"
