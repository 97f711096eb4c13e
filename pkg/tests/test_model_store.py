import numpy as np
import pytest

from bitsvm.dataio import apply_scaler, fit_scaler, make_circles, pad_to_pow2
from bitsvm.embedding import EmbeddingParams, embed_signs
from bitsvm.inference import ModelBundle, cost_report, predict_ids, predict_labels
from bitsvm.model_store import ModelFormatError, VERSION, deserialize, load, save, serialize
from bitsvm.ternary_trainer import TernaryModel, train_binary, train_multiclass


def _binary_bundle(seed=0, p=96):
    X, y = make_circles(300, noise=0.12, seed=seed)
    scaler = fit_scaler(X)
    params = EmbeddingParams.sample(2, p, 0.5, seed)
    Z = embed_signs(params, pad_to_pow2(apply_scaler(scaler, X)))
    res = train_binary(Z, (2 * y - 1).astype(np.int8), 0.01, init="svm", seed=seed)
    return ModelBundle.build(scaler, params, [res.model], [-1, 1], 2, 0.01, seed), X


def _multiclass_bundle(seed=0, p=64, c=3):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-1, 1, (c, 6))
    labels = rng.integers(0, c, 240)
    X = centers[labels] + rng.normal(0, 0.2, (240, 6))
    scaler = fit_scaler(X)
    params = EmbeddingParams.sample(8, p, 1.0, seed)
    Z = embed_signs(params, pad_to_pow2(apply_scaler(scaler, X)))
    results = train_multiclass(Z, labels, c, 0.01, init="svm", seed=seed)
    models = [r.model for r in results]
    return ModelBundle.build(scaler, params, models, [11, 22, 33], 6, 0.01, seed), X


class TestRoundTrip:
    def test_binary_identical_predictions_and_costs(self, tmp_path):
        bundle, X = _binary_bundle()
        path = tmp_path / "m.bsvm"
        nbytes = save(bundle, path)
        assert nbytes == path.stat().st_size
        loaded = load(path)
        rng = np.random.default_rng(1)
        probe = rng.uniform(-3, 3, (100, 2))
        np.testing.assert_array_equal(predict_labels(bundle, probe), predict_labels(loaded, probe))
        assert cost_report(bundle) == cost_report(loaded)
        assert loaded.label_map == bundle.label_map
        assert loaded.seed == bundle.seed

    def test_binary_ternary_coefficients_survive(self, tmp_path):
        bundle, _ = _binary_bundle(seed=3)
        loaded = deserialize(serialize(bundle))
        np.testing.assert_array_equal(loaded.models[0].w, bundle.models[0].w)
        assert loaded.models[0].alpha == bundle.models[0].alpha

    def test_multiclass_identical_predictions(self, tmp_path):
        bundle, X = _multiclass_bundle()
        loaded = deserialize(serialize(bundle))
        rng = np.random.default_rng(2)
        probe = rng.uniform(-2, 2, (100, 6))
        np.testing.assert_array_equal(predict_ids(bundle, probe), predict_ids(loaded, probe))
        for a, b in zip(bundle.models, loaded.models):
            np.testing.assert_array_equal(a.w, b.w)
            assert a.alpha == b.alpha

    def test_serialize_is_stable(self):
        bundle, _ = _binary_bundle(seed=5)
        blob = serialize(bundle)
        assert serialize(deserialize(blob)) == blob

    def test_transform_arrays_bitwise_equal(self):
        bundle, _ = _multiclass_bundle(seed=7)
        loaded = deserialize(serialize(bundle))
        for a, b in zip(bundle.params.transform.blocks, loaded.params.transform.blocks):
            np.testing.assert_array_equal(a.B, b.B)
            np.testing.assert_array_equal(a.perm, b.perm)
            np.testing.assert_array_equal(a.G, b.G)
            np.testing.assert_array_equal(a.S, b.S)
        np.testing.assert_array_equal(bundle.params.b, loaded.params.b)
        np.testing.assert_array_equal(bundle.params.t, loaded.params.t)


class TestErrors:
    def test_bad_magic(self):
        bundle, _ = _binary_bundle(seed=9, p=32)
        blob = bytearray(serialize(bundle))
        blob[0] = ord("X")
        with pytest.raises(ModelFormatError, match="magic"):
            deserialize(bytes(blob))

    def test_unknown_version(self):
        bundle, _ = _binary_bundle(seed=9, p=32)
        blob = bytearray(serialize(bundle))
        blob[4] = VERSION + 1
        with pytest.raises(ModelFormatError, match="version"):
            deserialize(bytes(blob))

    @pytest.mark.parametrize("cut", [3, 20, 100, -10])
    def test_truncation_reports_offset(self, cut):
        bundle, _ = _binary_bundle(seed=9, p=32)
        blob = serialize(bundle)
        with pytest.raises(ModelFormatError, match="offset"):
            deserialize(blob[:cut])

    def test_trailing_garbage_rejected(self):
        bundle, _ = _binary_bundle(seed=9, p=32)
        with pytest.raises(ModelFormatError, match="trailing"):
            deserialize(serialize(bundle) + b"\x00")


class TestSizeAccounting:
    def test_multiclass_payload_matches_formula_within_header(self):
        """File size minus header/scaler tracks the declared bit budget."""
        bundle, _ = _multiclass_bundle(seed=1, p=64, c=3)
        blob = serialize(bundle)
        p, d, c = 64, 8, 3
        blocks = len(bundle.params.transform.blocks)
        transform_bits = blocks * (3 * d * 32 + d) + 2 * 32 * p
        classifier_bits = 2 * c * p
        formula_bytes = (transform_bits + classifier_bits) / 8
        scaler_bytes = 2 * 6 * 4
        overhead = len(blob) - formula_bytes - scaler_bytes
        assert 0 < overhead < 1024
