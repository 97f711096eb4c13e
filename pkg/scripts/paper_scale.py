#!/usr/bin/env python3
"""Grid-sweep accuracy/memory comparison on a LIBSVM train/test pair.

Long-running reproduction helper for full-size datasets (covtype, webspam,
mnist, ...): sweeps sigma over 2^-5..2^5 and lambda over 1e-3..1e3 for the
ternary model and the full-precision cosine-feature baseline, then prints a
summary row per method with the best test accuracy and its memory bits.

Usage:
  python3 scripts/paper_scale.py TRAIN TEST [--p 2048] [--seed 0]
          [--sigmas -1 0 1] [--lambdas -2 -1 0]   # powers of 2 / 10
"""

import argparse
import sys
import time

import numpy as np

from bitsvm.dataio import load_dataset
from bitsvm.embedding import EmbeddingParams, embed_signs
from bitsvm.inference import ModelBundle, cost_report, rfe_reference_bits
from bitsvm.linear_svm import predict_argmax, rfe_features, train_one_vs_all
from bitsvm.ternary_trainer import train_multiclass


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("train")
    ap.add_argument("test")
    ap.add_argument("--p", type=int, default=2048)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sigmas", type=int, nargs="*", default=list(range(-5, 6)), help="powers of 2")
    ap.add_argument("--lambdas", type=int, nargs="*", default=list(range(-3, 4)), help="powers of 10")
    ap.add_argument("--epochs", type=int, default=20)
    args = ap.parse_args()

    ds, scaler = load_dataset(args.train)
    ts, _ = load_dataset(args.test, scaler=scaler, label_map=ds.label_map)
    print(f"train n={ds.samples.shape[0]} test n={ts.samples.shape[0]} d={ds.d_raw} c={ds.class_count}")

    best = {"ternary": (0.0, None), "fastfood-full": (0.0, None)}
    for se in args.sigmas:
        sigma = 2.0**se
        params = EmbeddingParams.sample(ds.d_padded, args.p, sigma, args.seed)
        Ztr = embed_signs(params, ds.samples)
        Zte = embed_signs(params, ts.samples)
        Ftr = rfe_features(params.transform, params.b, ds.samples)
        Fte = rfe_features(params.transform, params.b, ts.samples)
        for le in args.lambdas:
            lam = 10.0**le
            t0 = time.perf_counter()
            results = train_multiclass(Ztr, ds.labels, ds.class_count, lam, init="svm", seed=args.seed)
            W = np.stack([r.model.w for r in results]).astype(np.float32)
            alphas = np.array([r.model.alpha for r in results])
            acc = float(np.mean(np.argmax((Zte.astype(np.float32) @ W.T) * alphas, 1) == ts.labels))
            if acc > best["ternary"][0]:
                models = [r.model for r in results]
                bundle = ModelBundle.build(scaler, params, models, ds.label_map, ds.d_raw, lam, args.seed)
                best["ternary"] = (acc, cost_report(bundle))
            print(f"ternary sigma=2^{se} lambda=1e{le}: acc={acc:.4f} ({time.perf_counter() - t0:.0f}s)")
            t0 = time.perf_counter()
            Wf = train_one_vs_all(Ftr, ds.labels, ds.class_count, lam, epochs=args.epochs, seed=args.seed)
            acc = float(np.mean(predict_argmax(Wf, Fte) == ts.labels))
            if acc > best["fastfood-full"][0]:
                best["fastfood-full"] = (acc, None)
            print(f"fastfood-full sigma=2^{se} lambda=1e{le}: acc={acc:.4f} ({time.perf_counter() - t0:.0f}s)")

    print("\nbest results:")
    acc, rep = best["ternary"]
    total = rep["transform_bits"] + rep["embedding_bits"] + rep["classifier_bits"] if rep else 0
    rfe_bits = rfe_reference_bits(ds.d_padded, args.p, ds.class_count)
    print(f"ternary: acc={acc:.4f} memory={total / 8192:.1f} KB reduction={rfe_bits / max(total, 1):.0f}x")
    acc, _ = best["fastfood-full"]
    ft_bits = 4 * 32 * args.p + args.p + 32 * ds.class_count * args.p
    print(f"fastfood-full: acc={acc:.4f} memory~{ft_bits / 8192:.1f} KB")
    return 0


if __name__ == "__main__":
    sys.exit(main())
