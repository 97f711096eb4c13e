import math

import numpy as np
import pytest
from oracles import naive_hamming

from bitsvm.embedding import (
    BitVector,
    EmbeddingParams,
    band_check,
    embed,
    embed_matrix,
    embed_signs,
    gaussian_kernel,
    h1,
    h2,
    hamming,
    pack_bits,
    unpack_bits,
)


@pytest.mark.parametrize("n", [1, 7, 63, 64, 65, 128, 1000])
class TestPacking:
    def test_round_trip(self, n):
        rng = np.random.default_rng(n)
        bits = rng.random(n) > 0.5
        words = pack_bits(bits)
        assert words.shape == (-(-n // 64),)
        np.testing.assert_array_equal(unpack_bits(words, n), bits)

    def test_tail_bits_zero(self, n):
        bits = np.ones(n, dtype=bool)
        words = pack_bits(bits)
        r = n % 64
        if r:
            assert int(words[-1]) >> r == 0

    def test_lsb_first_layout(self, n):
        bits = np.zeros(n, dtype=bool)
        bits[0] = True
        assert int(pack_bits(bits)[0]) == 1


class TestBitVector:
    def test_sign_round_trip(self):
        signs = np.array([1, -1, -1, 1, 1], dtype=np.int8)
        v = BitVector.from_signs(signs)
        np.testing.assert_array_equal(v.to_signs(), signs)
        assert len(v) == 5

    def test_rejects_bad_signs(self):
        with pytest.raises(ValueError):
            BitVector.from_signs(np.array([1, 0, -1]))

    def test_rejects_dirty_tail(self):
        with pytest.raises(ValueError):
            BitVector(np.array([0xFF], dtype=np.uint64), 3)

    def test_as_int_matches_bits(self):
        bits = np.array([1, 0, 1, 1, 0, 0, 0, 1], dtype=bool)
        v = BitVector.from_bits(bits)
        assert v.as_int() == 0b10001101

    def test_equality(self):
        a = BitVector.from_bits(np.array([True, False]))
        b = BitVector.from_bits(np.array([True, False]))
        c = BitVector.from_bits(np.array([True, True]))
        assert a == b and a != c


class TestEmbed:
    def test_forced_thresholds(self):
        params = EmbeddingParams.sample(4, 33, 1.0, seed=0)
        x = np.random.default_rng(0).uniform(-1, 1, 4)
        params.t = np.full(33, -2.0, dtype=np.float32)  # cos(.) in [-1,1] < 2
        assert embed(params, x).as_int() == 0
        params.t = np.full(33, 2.0, dtype=np.float32)
        assert embed(params, x).as_int() == (1 << 33) - 1

    def test_deterministic(self):
        params = EmbeddingParams.sample(8, 100, 0.5, seed=9)
        x = np.random.default_rng(1).uniform(-1, 1, 8)
        np.testing.assert_array_equal(embed(params, x).words, embed(params, x).words)

    def test_same_seed_same_dithers(self):
        a = EmbeddingParams.sample(8, 50, 1.0, seed=4)
        b = EmbeddingParams.sample(8, 50, 1.0, seed=4)
        np.testing.assert_array_equal(a.b, b.b)
        np.testing.assert_array_equal(a.t, b.t)
        assert a.b.min() >= 0.0 and a.b.max() <= 2 * math.pi
        assert a.t.min() >= -1.0 and a.t.max() <= 1.0

    def test_matrix_and_signs_agree_with_single(self):
        params = EmbeddingParams.sample(8, 70, 1.0, seed=2)
        X = np.random.default_rng(3).uniform(-1, 1, (5, 8))
        words = embed_matrix(params, X)
        signs = embed_signs(params, X)
        for i in range(5):
            z = embed(params, X[i])
            np.testing.assert_array_equal(words[i], z.words)
            np.testing.assert_array_equal(signs[i], z.to_signs())

    def test_dimension_mismatch(self):
        params = EmbeddingParams.sample(8, 16, 1.0, seed=0)
        with pytest.raises(ValueError):
            embed(params, np.zeros(7))


class TestHamming:
    def test_identity_and_complement(self):
        z = BitVector.from_bits(np.random.default_rng(0).random(129) > 0.5)
        assert hamming(z, z) == 0
        assert hamming(z, z.invert()) == 129

    def test_against_naive_loop(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.random(7) > 0.5
            b = rng.random(7) > 0.5
            assert hamming(BitVector.from_bits(a), BitVector.from_bits(b)) == naive_hamming(a, b)

    def test_dot_identity(self):
        rng = np.random.default_rng(2)
        for p in (5, 64, 200):
            sa = np.where(rng.random(p) > 0.5, 1, -1)
            sb = np.where(rng.random(p) > 0.5, 1, -1)
            dh = hamming(BitVector.from_signs(sa), BitVector.from_signs(sb))
            assert int(sa @ sb) == p - 2 * dh

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            hamming(BitVector.from_bits(np.ones(3, bool)), BitVector.from_bits(np.ones(4, bool)))


class TestBandFunctions:
    def test_endpoint_values(self):
        four_pi2 = 4.0 / math.pi**2
        assert h1(1.0) == 0.0
        assert h2(1.0) == 0.0
        assert h1(0.0) == pytest.approx(four_pi2)
        assert h2(0.0) == pytest.approx(four_pi2)  # min(0.5, 4/pi^2) = 4/pi^2

    def test_lower_below_upper_on_dense_grid(self):
        u = np.linspace(0.0, 1.0, 2001)
        assert np.all(h1(u) <= h2(u) + 1e-15)

    @pytest.mark.parametrize("bad", [-0.1, 1.1])
    def test_domain_errors(self, bad):
        with pytest.raises(ValueError):
            h1(bad)
        with pytest.raises(ValueError):
            h2(bad)


class TestBandCheck:
    def test_identical_points_in_band(self):
        params = EmbeddingParams.sample(8, 64, 1.0, seed=0)
        x = np.random.default_rng(0).uniform(-1, 1, 8)
        assert band_check(np.stack([x, x]), params, delta=0.1, eps=0.05) == 0.0

    def test_delta_one_never_violates(self):
        params = EmbeddingParams.sample(8, 32, 0.3, seed=1)
        X = np.random.default_rng(1).uniform(-1, 1, (20, 8))
        assert band_check(X, params, delta=1.0, eps=0.05) == 0.0

    def test_concentration_small_scale(self):
        """Light version of the full band criterion: n=30, eps=0.1."""
        n, delta, eps = 30, 0.2, 0.1
        p = math.ceil(math.log(n * n / eps) / (2 * delta * delta))
        fractions = []
        for seed in range(3):
            rng = np.random.default_rng(seed)
            X = rng.uniform(-1, 1, (n, 8))
            params = EmbeddingParams.sample(8, p, 1.5, seed=seed)
            fractions.append(band_check(X, params, delta, eps))
        assert float(np.mean(fractions)) <= eps


class TestKernelHelper:
    def test_matches_scalar_formula(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(4, 6))
        K = gaussian_kernel(X, X, sigma=1.7)
        for i in range(4):
            for j in range(4):
                expect = math.exp(-float(np.sum((X[i] - X[j]) ** 2)) / (2 * 1.7**2))
                assert K[i, j] == pytest.approx(expect, rel=1e-12)
