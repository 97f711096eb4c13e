"""Command-line frontend: train, predict, eval, bench, inspect, grid, synth.

Exit codes: 0 success, 1 usage error, 2 data/model error, 3 numeric failure.
All commands are deterministic under --seed (timings excluded). CSV outputs
carry a header row naming every column.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from .dataio import (
    DataFormatError,
    apply_scaler,
    densify,
    dense_to_sparse,
    format_libsvm,
    load_dataset,
    make_circles,
    pad_to_pow2,
    parse_libsvm,
)
from .embedding import BitVector, EmbeddingParams, embed_matrix, embed_signs
from .fastfood import apply as ff_apply
from .fastfood import sample_dense_gaussian
from .inference import (
    ModelBundle,
    _dots_masked_rows,
    cost_report,
    dot_binary,
    dot_masked,
    compact_bits,
    predict_labels,
    prune,
    rfe_reference_bits,
)
from .linear_svm import predict_argmax, predict_sign, rfe_features, train_linear, train_one_vs_all
from .model_store import ModelFormatError, load, save
from .ternary_trainer import HINGE, SQUARE, MonotonicityError, train_binary, train_multiclass

METHODS = ("ternary", "fastfood-full", "rfe-full", "bjle")


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def _load_raw(path: str, d_raw: int) -> tuple[np.ndarray, list[int]]:
    samples, labels = parse_libsvm(path)
    return densify(samples, d_raw), labels


def _accuracy(bundle: ModelBundle, X: np.ndarray, labels: list[int]) -> float:
    preds = predict_labels(bundle, X)
    return float(np.mean(preds == np.asarray(labels)))


def cmd_train(args) -> int:
    t0 = time.perf_counter()
    ds, scaler = load_dataset(args.data)
    params = EmbeddingParams.sample(ds.d_padded, args.p, args.sigma, args.seed)
    loss = SQUARE if args.loss == "square" else HINGE

    if args.method != "ternary":
        return _train_baseline(args, ds, params, scaler)

    Z = embed_signs(params, ds.samples)
    kwargs = dict(
        loss=loss,
        init=args.init,
        init_subset=args.init_subset,
        seed=args.seed,
        tol=args.tol,
        max_outer=args.max_outer,
        max_inner=args.max_inner,
    )
    if ds.class_count == 2:
        results = [train_binary(Z, ds.binary_targets(), args.lam, **kwargs)]
    else:
        results = train_multiclass(Z, ds.labels, ds.class_count, args.lam, **kwargs)
    bundle = ModelBundle.build(
        scaler, params, [r.model for r in results], ds.label_map, ds.d_raw, args.lam, args.seed
    )
    elapsed = time.perf_counter() - t0
    for r in results:
        print(
            f"class {r.model.class_id}: objective={r.state.objective:.6g} "
            f"alpha={r.model.alpha:.6g} nnz={r.model.nnz} outer={r.outer_iterations}"
        )
    print(f"train time: {elapsed:.2f} s")
    if args.model:
        nbytes = save(bundle, args.model)
        print(f"model: {args.model} ({nbytes} bytes)")
    if args.out:
        rows = [
            (r.model.class_id, it, alpha, nnz, obj)
            for r in results
            for (it, alpha, nnz, obj) in r.trace
        ]
        _write_csv(args.out, ["class_id", "iteration", "alpha", "nnz", "objective"], rows)
        print(f"trace: {args.out}")
    if args.test:
        X, labels = _load_raw(args.test, ds.d_raw)
        print(f"test accuracy: {_accuracy(bundle, X, labels):.4f}")
    return 0


def _train_baseline(args, ds, params: EmbeddingParams, scaler) -> int:
    """Full-precision reference models; reported, never serialized."""
    if args.model:
        print("error: only --method ternary writes a model file", file=sys.stderr)
        return 1
    d, p, c = ds.d_padded, args.p, ds.class_count
    X = ds.samples
    if args.method == "fastfood-full":
        feats = rfe_features(params.transform, params.b, X)
        transform_bits = 3 * 32 * d * len(params.transform.blocks) + d * len(params.transform.blocks) + 32 * p
        embed_bits = 32 * p
        make_feats = lambda Xq: rfe_features(params.transform, params.b, Xq)
    elif args.method == "rfe-full":
        R = sample_dense_gaussian(ds.d_padded, p, args.sigma, [args.seed, 3])
        b = np.random.default_rng([args.seed, 4]).uniform(0.0, 2.0 * math.pi, size=p)
        feats = rfe_features(R, b, X)
        transform_bits = d * p * 32 + 32 * p
        embed_bits = 32 * p
        make_feats = lambda Xq: rfe_features(R, b, Xq)
    else:  # bjle
        R = sample_dense_gaussian(ds.d_padded, p, 1.0, [args.seed, 5])
        feats = np.where(X @ R >= 0.0, 1.0, -1.0)
        transform_bits = d * p * 32
        embed_bits = p
        make_feats = lambda Xq: np.where(Xq @ R >= 0.0, 1.0, -1.0)
    classifier_bits = 32 * c * p

    if c == 2:
        y = ds.binary_targets()
        w = train_linear(feats, y, args.lam, epochs=args.epochs, seed=args.seed).w
        train_acc = float(np.mean(predict_sign(w, feats) == y))
        predict_fn = lambda F: np.asarray(ds.label_map)[(predict_sign(w, F) > 0).astype(int)]
    else:
        W = train_one_vs_all(feats, ds.labels, c, args.lam, epochs=args.epochs, seed=args.seed)
        train_acc = float(np.mean(predict_argmax(W, feats) == ds.labels))
        predict_fn = lambda F: np.asarray(ds.label_map)[predict_argmax(W, F)]
    print(f"method {args.method}: train accuracy {train_acc:.4f}")
    print(
        f"memory bits: transform={transform_bits} embedding={embed_bits} "
        f"classifier={classifier_bits} total={transform_bits + embed_bits + classifier_bits}"
    )
    if args.test:
        Xt, labels = _load_raw(args.test, ds.d_raw)
        Xn = pad_to_pow2(apply_scaler(scaler, Xt))
        preds = predict_fn(make_feats(Xn))
        print(f"test accuracy: {float(np.mean(preds == np.asarray(labels))):.4f}")
    return 0


def cmd_predict(args) -> int:
    bundle = load(args.model)
    X, _ = _load_raw(args.data, bundle.d_raw)
    preds = predict_labels(bundle, X)
    rows = list(enumerate(preds.tolist()))
    if args.out:
        _write_csv(args.out, ["index", "predicted_label"], rows)
    else:
        print("index,predicted_label")
        for i, lab in rows:
            print(f"{i},{lab}")
    return 0


def cmd_eval(args) -> int:
    bundle = load(args.model)
    X, labels = _load_raw(args.test, bundle.d_raw)
    unknown = set(labels) - set(bundle.label_map)
    if unknown:
        raise DataFormatError(f"test labels {sorted(unknown)} are not in the model's label set")
    acc = _accuracy(bundle, X, labels)
    rep = cost_report(bundle)
    total = rep["transform_bits"] + rep["embedding_bits"] + rep["classifier_bits"]
    rfe_bits = rfe_reference_bits(bundle.params.d, bundle.p, bundle.class_count)
    reduction = rfe_bits / total if total else float("inf")
    print(f"accuracy: {acc:.4f}")
    print(
        f"memory bits: transform={rep['transform_bits']} embedding={rep['embedding_bits']} "
        f"classifier={rep['classifier_bits']} total={total}"
    )
    print(f"bops: {rep['bops']}  flops: {rep['flops']}")
    print(f"memory reduction vs dense cosine baseline: {reduction:.1f}x")
    if args.out:
        _write_csv(
            args.out,
            [
                "accuracy",
                "transform_bits",
                "embedding_bits",
                "classifier_bits",
                "total_bits",
                "bops",
                "flops",
                "rfe_reference_bits",
                "memory_reduction",
            ],
            [
                (
                    acc,
                    rep["transform_bits"],
                    rep["embedding_bits"],
                    rep["classifier_bits"],
                    total,
                    rep["bops"],
                    rep["flops"],
                    rfe_bits,
                    reduction,
                )
            ],
        )
    return 0


def cmd_inspect(args) -> int:
    path = Path(args.model)
    bundle = load(path)
    info = {
        "file_bytes": path.stat().st_size,
        "d_raw": bundle.d_raw,
        "d_padded": bundle.params.d,
        "p": bundle.p,
        "class_count": bundle.class_count,
        "mode": "binary-pruned" if bundle.is_binary else "multiclass-planes",
        "sigma": bundle.params.transform.sigma,
        "lambda": bundle.lam,
        "seed": bundle.seed,
        "label_map": bundle.label_map,
        "models": [
            {"class_id": m.class_id, "alpha": m.alpha, "nnz": m.nnz} for m in bundle.models
        ],
        "cost_report": cost_report(bundle),
    }
    print(json.dumps(info, indent=2))
    return 0


def cmd_grid(args) -> int:
    bundle = load(args.model)
    if bundle.d_raw != 2:
        raise ValueError(f"grid requires a 2-D model, this one has {bundle.d_raw} features")
    if args.grid_bounds:
        parts = [float(v) for v in args.grid_bounds.split(",")]
        if len(parts) != 4:
            raise ValueError("grid bounds must be 'x1min,x1max,x2min,x2max'")
        x1min, x1max, x2min, x2max = parts
    else:
        span = bundle.scaler.hi - bundle.scaler.lo
        x1min, x2min = (bundle.scaler.lo - 0.1 * span).tolist()
        x1max, x2max = (bundle.scaler.hi + 0.1 * span).tolist()
    res = args.grid_res
    xs = np.linspace(x1min, x1max, res)
    ys = np.linspace(x2min, x2max, res)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    words = embed_matrix(bundle.params, bundle.prepare(pts))
    packed = bundle.packed()
    if bundle.is_binary:
        scores = _dots_masked_rows(words, packed[0]).astype(np.float64)
        ids = (scores >= 0).astype(np.int64)
    else:
        per_class = np.stack(
            [m.alpha * _dots_masked_rows(words, pt) for m, pt in zip(bundle.models, packed)]
        )
        ids = np.argmax(per_class, axis=0)
        scores = per_class[ids, np.arange(pts.shape[0])]
    labels = np.asarray(bundle.label_map)[ids]
    rows = zip(pts[:, 0].tolist(), pts[:, 1].tolist(), scores.tolist(), labels.tolist())
    header = ["x1", "x2", "score", "predicted_label"]
    if args.out:
        _write_csv(args.out, header, rows)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(str(v) for v in row))
    return 0


def _median_ms(samples: list[float]) -> float:
    return float(np.median(samples) * 1e3)


def cmd_bench(args) -> int:
    bundle = load(args.model)
    X, _ = _load_raw(args.data, bundle.d_raw)
    n = args.samples
    reps = -(-n // X.shape[0])
    Xp = bundle.prepare(np.tile(X, (reps, 1))[:n])
    d, p, c = bundle.params.d, bundle.p, bundle.class_count
    params = bundle.params
    sigma = params.transform.sigma

    # full-precision weights with the footprint of the dense baselines
    W = np.stack([m.alpha * m.w.astype(np.float64) for m in bundle.models])
    R = sample_dense_gaussian(d, p, sigma, [bundle.seed, 3]).astype(np.float64)
    b64 = params.b.astype(np.float64)
    scale = math.sqrt(2.0 / p)
    packed = bundle.packed()
    pruned = prune(bundle.models[0]) if bundle.is_binary else None

    rows = []

    def run(label, embed_fn, predict_fn):
        et, pt = [], []
        for i in range(Xp.shape[0]):
            x = Xp[i]
            t0 = time.perf_counter()
            rep = embed_fn(x)
            t1 = time.perf_counter()
            predict_fn(rep)
            t2 = time.perf_counter()
            et.append(t1 - t0)
            pt.append(t2 - t1)
        rows.append((label, _median_ms(et), _median_ms(pt)))

    def predict_float(fv):
        return float(np.argmax(W @ fv)) if c > 2 else float(W[0] @ fv)

    t64 = params.t.astype(np.float64)

    def embed_packed(x):
        # producing the classifier-ready representation is the embed stage:
        # pack the sign bits and, for a pruned binary model, skip the
        # pruned coordinates right here (they cannot be dropped from the
        # implicit transform itself)
        u = ff_apply(params.transform, x)
        z = BitVector.from_bits(np.cos(u + b64) + t64 >= 0.0)
        if pruned is not None:
            z = compact_bits(z, pruned.keep_mask)
        z.as_int()
        return z

    def predict_packed(z):
        if pruned is not None:
            return dot_binary(z, pruned.w_packed)
        return max(range(len(packed)), key=lambda k: bundle.models[k].alpha * dot_masked(z, packed[k]))

    run("rfe-full", lambda x: scale * np.cos(x @ R + b64), predict_float)
    run("fastfood-full", lambda x: scale * np.cos(ff_apply(params.transform, x) + b64), predict_float)
    run("ternary", embed_packed, predict_packed)

    header = ["method", "embed_ms_median", "predict_ms_median"]
    print(",".join(header))
    for row in rows:
        print(f"{row[0]},{row[1]:.6f},{row[2]:.6f}")
    if args.out:
        _write_csv(args.out, header, rows)
    return 0


def cmd_synth(args) -> int:
    X, labels = make_circles(args.n, args.r_inner, args.r_outer, args.noise, args.seed)
    pm = (2 * labels - 1).tolist()
    text = format_libsvm(dense_to_sparse(X), pm)
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {args.n} samples to {args.out}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="bitsvm", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common_model_opts(p_):
        p_.add_argument("--p", type=_positive_int, default=2048, help="embedding dimension")
        p_.add_argument("--sigma", type=_positive_float, default=0.5, help="Gaussian kernel bandwidth")
        p_.add_argument("--lambda", dest="lam", type=_positive_float, default=0.01, help="regularization weight")
        p_.add_argument("--seed", type=int, default=0, help="RNG seed")

    t = sub.add_parser("train", help="train a model and write it to disk")
    t.add_argument("--data", required=True, help="LIBSVM training file")
    t.add_argument("--test", help="optional LIBSVM test file for a quick accuracy readout")
    t.add_argument("--model", help="output model path (ternary only)")
    t.add_argument("--out", help="objective-trace CSV path")
    common_model_opts(t)
    t.add_argument("--method", choices=METHODS, default="ternary")
    t.add_argument("--loss", choices=("hinge", "square"), default="hinge")
    t.add_argument("--init", choices=("svm", "random", "zero"), default="svm")
    t.add_argument("--init-subset", type=_positive_int, default=10_000)
    t.add_argument("--tol", type=_positive_float, default=1e-6)
    t.add_argument("--max-outer", type=_positive_int, default=50)
    t.add_argument("--max-inner", type=_positive_int, default=20)
    t.add_argument("--epochs", type=_positive_int, default=20, help="baseline solver epochs")
    t.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", help="predict labels for a data file")
    pr.add_argument("--model", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--out", help="CSV output path (default: stdout)")
    pr.set_defaults(func=cmd_predict)

    ev = sub.add_parser("eval", help="accuracy and memory cost on labeled data")
    ev.add_argument("--model", required=True)
    ev.add_argument("--test", required=True)
    ev.add_argument("--out", help="CSV output path")
    ev.set_defaults(func=cmd_eval)

    be = sub.add_parser("bench", help="per-sample embed/predict timings")
    be.add_argument("--model", required=True)
    be.add_argument("--data", required=True)
    be.add_argument("--samples", type=_positive_int, default=1000)
    be.add_argument("--out", help="CSV output path")
    be.set_defaults(func=cmd_bench)

    ins = sub.add_parser("inspect", help="dump model header and cost report as JSON")
    ins.add_argument("--model", required=True)
    ins.set_defaults(func=cmd_inspect)

    gr = sub.add_parser("grid", help="decision scores over a 2-D grid")
    gr.add_argument("--model", required=True)
    gr.add_argument("--grid-bounds", help="x1min,x1max,x2min,x2max (default: data range +10%%)")
    gr.add_argument("--grid-res", type=_positive_int, default=200)
    gr.add_argument("--out", help="CSV output path (default: stdout)")
    gr.set_defaults(func=cmd_grid)

    sy = sub.add_parser("synth", help="generate the concentric-circles dataset")
    sy.add_argument("--n", type=_positive_int, default=2000)
    sy.add_argument("--r-inner", type=_positive_float, default=1.0)
    sy.add_argument("--r-outer", type=_positive_float, default=2.0)
    sy.add_argument("--noise", type=float, default=0.1)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--out", required=True, help="LIBSVM output path")
    sy.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return int(args.func(args) or 0)
    except (DataFormatError, ModelFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MonotonicityError, FloatingPointError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
