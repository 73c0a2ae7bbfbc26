from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import gf2_matvec, ref_mix, ref_owf_small, splitmix64_stream, toeplitz_matrix
from robust_qpke.bits import BitString
from robust_qpke.errors import FormatError, LengthMismatch
from robust_qpke.primitives import (
    _RC, OwfParams, PrfKey, RngStream, ToeplitzHash, expand, hash_eval, hash_eval_many,
    hash_sample, mix, owf_eval, prf_eval, read_golden, write_golden,
)
from robust_qpke.stats import DistTable, binomial_sigma, chi_square_uniform, within_sigma

GOLDEN = Path(__file__).parent / "golden"


class TestRngStream:
    def test_pure_function_of_seed_and_stream(self):
        a, b = RngStream(42, 7), RngStream(42, 7)
        assert [a.word() for _ in range(600)] == [b.word() for _ in range(600)]
        assert RngStream(42, 8).word() != RngStream(42, 7).word()

    def test_split_is_deterministic_and_separated(self):
        r = RngStream(1)
        assert r.split(3).word() == RngStream(1).split(3).word()
        words = {r.split(i).word() for i in range(1000)}
        assert len(words) == 1000

    def test_bits_widths(self):
        r = RngStream(0)
        for n in (1, 5, 64, 65, 200):
            assert r.bits(n).length == n

    def test_below_is_uniform(self):
        r = RngStream(8)
        counts = DistTable.from_samples((r.below(6) for _ in range(60_000)), range(6))
        assert chi_square_uniform(counts) > 0.001

    def test_below_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            RngStream(0).below(0)


class TestOwf:
    def test_round_constants_are_splitmix(self):
        assert _RC == tuple(splitmix64_stream(0, 16))

    @given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1), st.integers(1, 8))
    @settings(max_examples=40)
    def test_mix_matches_bitlist_reference(self, state, key, rounds):
        assert mix(state, rounds, key) == ref_mix(state, rounds, key)

    def test_small_owf_matches_reference(self):
        p = OwfParams(16, 16)
        for x in range(0, 1 << 16, 257):
            assert owf_eval(p, BitString(x, 16)).value == ref_owf_small(x, 16, 16, 6)

    @pytest.mark.parametrize("name", ["owf_rxs64_i16_o16_r6.txt", "owf_rxs64_i40_o72_r6.txt"])
    def test_golden_vectors(self, name):
        params, pairs = read_golden(GOLDEN / name)
        assert len(pairs) >= 16
        for x, y in pairs:
            assert owf_eval(params, x) == y

    def test_golden_round_trip(self, tmp_path):
        p = OwfParams(12, 20, round_count=3)
        xs = [BitString(i * 37, 12) for i in range(10)]
        write_golden(tmp_path / "g.txt", p, xs)
        params, pairs = read_golden(tmp_path / "g.txt")
        assert params == p and [x for x, _ in pairs] == xs

    def test_golden_format_errors(self, tmp_path):
        (tmp_path / "bad.txt").write_text("# family=rxs64 input_bits=8 output_bits=8 rounds=6\n00\n")
        with pytest.raises(FormatError, match="line 2"):
            read_golden(tmp_path / "bad.txt")

    def test_length_checked(self):
        with pytest.raises(LengthMismatch):
            owf_eval(OwfParams(8, 8), BitString(0, 9))

    def test_collisions_match_random_function(self):
        # distinct inputs: a random function gives C(n,2)/2^16 colliding pairs in expectation
        p = OwfParams(16, 16)
        rng = np.random.default_rng(2024)
        xs = rng.choice(1 << 16, size=10_000, replace=False)
        ys = np.array([owf_eval(p, BitString(int(x), 16)).value for x in xs])
        _, counts = np.unique(ys, return_counts=True)
        pairs = int((counts * (counts - 1) // 2).sum())
        n = len(xs)
        mean = n * (n - 1) / 2 / 2**16
        sd = np.sqrt(mean * (1 - 2**-16))
        assert abs(pairs - mean) <= 3 * sd

    def test_rounds_change_output(self):
        x = BitString(1234, 16)
        assert owf_eval(OwfParams(16, 16, round_count=2), x) != owf_eval(OwfParams(16, 16), x)


class TestPrf:
    def test_deterministic(self):
        k = PrfKey(RngStream(1).bits(32))
        x = RngStream(2).bits(32)
        assert prf_eval(k, x) == prf_eval(k, x)

    def test_output_bits_balanced(self):
        k = PrfKey(RngStream(3).bits(32))
        outs = np.array([list(prf_eval(k, BitString(i, 32))) for i in range(10_000)])
        ones = outs.sum(axis=0)
        for c in ones:
            assert within_sigma(int(c), 10_000, 0.5)

    def test_two_keys_disagree(self):
        r = RngStream(4)
        same = 0
        for _ in range(1000):
            x = r.bits(32)
            same += prf_eval(PrfKey(r.bits(32)), x) == prf_eval(PrfKey(r.bits(32)), x)
        assert same <= 10

    def test_length_checked(self):
        with pytest.raises(LengthMismatch):
            prf_eval(PrfKey(BitString(0, 8)), BitString(0, 9))

    def test_expand_prefix_and_width(self):
        seed = BitString(99, 32)
        assert expand(seed, 100).length == 100
        assert expand(seed, 64) == expand(seed, 64)
        # the requested width is domain-separated: 32 bits is not a prefix of 64
        assert expand(seed, 32) != expand(seed, 64).slice(0, 32)


class TestToeplitz:
    def test_seed_length(self):
        assert hash_sample(RngStream(0), 8).diagonal_seed.length == 39
        with pytest.raises(LengthMismatch):
            ToeplitzHash(2, BitString(0, 8))

    @given(st.integers(1, 6), st.integers(0, 2**64), st.data())
    @settings(max_examples=60)
    def test_matches_reference_matrix(self, lam, seed, data):
        h = hash_sample(RngStream(seed), lam)
        m = toeplitz_matrix(list(h.diagonal_seed), lam)
        assert np.array_equal(h.matrix(), m)
        x = BitString(data.draw(st.integers(0, (1 << 4 * lam) - 1)), 4 * lam)
        assert list(hash_eval(h, x)) == gf2_matvec(m, list(x))

    def test_zero_maps_to_zero_and_linearity(self):
        r = RngStream(5)
        h = hash_sample(r, 8)
        assert hash_eval(h, BitString(0, 32)).value == 0
        for _ in range(1000):
            a, b = r.bits(32), r.bits(32)
            assert hash_eval(h, a ^ b) == hash_eval(h, a) ^ hash_eval(h, b)

    def test_text_round_trip(self):
        h = hash_sample(RngStream(6), 3)
        assert ToeplitzHash.from_text(h.to_text()) == h
        with pytest.raises(FormatError):
            ToeplitzHash.from_text("toeplitz 3 00")

    def test_vectorised_agrees(self):
        r = RngStream(7)
        lam = 4
        hs = [hash_sample(r, lam) for _ in range(200)]
        xs = [r.bits(16) for _ in range(200)]
        seeds = np.array([list(h.diagonal_seed) for h in hs])
        xa = np.array([list(x) for x in xs])
        out = hash_eval_many(seeds, xa, lam)
        for row, h, x in zip(out, hs, xs):
            assert list(row) == list(hash_eval(h, x))

    def test_collision_frequency_for_fixed_pair(self):
        lam, trials = 8, 100_000
        rng = np.random.default_rng(11)
        seeds = rng.integers(0, 2, size=(trials, 5 * lam - 1))
        x = rng.integers(0, 2, size=4 * lam)
        x2 = x.copy()
        x2[[3, 17]] ^= 1
        ha = hash_eval_many(seeds, np.tile(x, (trials, 1)), lam)
        hb = hash_eval_many(seeds, np.tile(x2, (trials, 1)), lam)
        freq = float(np.all(ha == hb, axis=1).mean())
        assert freq <= 2**-lam + 3 * binomial_sigma(trials, 2**-lam)
        same = hash_eval_many(seeds[:100], np.tile(x, (100, 1)), lam)
        assert np.array_equal(same, ha[:100])

    def test_uniform_input_gives_uniform_output(self):
        lam = 8
        r = RngStream(12)
        h = hash_sample(r, lam)
        labels = range(1 << lam)
        counts = DistTable.from_samples((hash_eval(h, r.bits(32)).value for _ in range(100_000)), labels)
        assert chi_square_uniform(counts) > 0.001

    def test_leftover_hash_with_one_bit_leakage(self):
        # source: 12 uniform bits padded to 16 (min-entropy 3 lam at lam=4); leak: its first bit
        lam, trials = 4, 1_000_000
        rng = np.random.default_rng(13)
        seeds = rng.integers(0, 2, size=(trials, 5 * lam - 1), dtype=np.uint8)
        src = np.zeros((trials, 4 * lam), dtype=np.uint8)
        src[:, :12] = rng.integers(0, 2, size=(trials, 12), dtype=np.uint8)
        leak = src[:, 0]
        out = hash_eval_many(seeds, src, lam)
        idx = out @ (1 << np.arange(lam - 1, -1, -1))
        for z in (0, 1):
            sel = idx[leak == z]
            freq = np.bincount(sel, minlength=16) / sel.size
            tv = 0.5 * np.abs(freq - 1 / 16).sum()
            noise = 0.5 * 3 * np.sqrt((1 / 16) * (15 / 16) / sel.size) * 16
            assert tv <= 2**-4 + noise
