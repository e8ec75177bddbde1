import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scanthz.core import EXACT, Block, BlockPartition, as_image, frobenius_norm_sq, make_partition, snr_db
from scanthz.errors import DimensionMismatch, InvalidBlockSize, ZeroReference

from conftest import crandn


class TestSnr:
    def test_exact_recovery_is_tagged(self):
        x = np.array([[1 + 2j, 3]])
        assert snr_db(x, x.copy()) == EXACT
        assert math.isinf(EXACT) and EXACT > 0

    def test_zero_estimate_is_zero_db(self, rng):
        x = crandn(rng, 5, 3)
        assert snr_db(x, np.zeros_like(x)) == pytest.approx(0.0, abs=1e-12)

    def test_scalar_substitution(self):
        assert snr_db([[1 + 0j]], [[0.9 + 0j]]) == pytest.approx(20.0, abs=1e-12)

    def test_errors(self):
        with pytest.raises(DimensionMismatch):
            snr_db(np.ones((2, 2)), np.ones((2, 3)))
        with pytest.raises(ZeroReference):
            snr_db(np.zeros((2, 2)), np.ones((2, 2)))

    @given(st.floats(0.1, 10), st.floats(-math.pi, math.pi), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_scale_consistency(self, mag, phase, seed):
        rng = np.random.default_rng(seed)
        x = crandn(rng, 4, 3)
        e = 0.1 * crandn(rng, 4, 3)
        c = mag * np.exp(1j * phase)
        a = snr_db(x, x + e)
        b = snr_db(c * x, c * (x + e))
        assert b == pytest.approx(a, rel=1e-10, abs=1e-10)


class TestFrobenius:
    @pytest.mark.parametrize(
        "x, expected",
        [([[0]], 0.0), ([[3 + 4j]], 25.0), (np.full((2, 2), 1 + 1j), 8.0)],
    )
    def test_examples(self, x, expected):
        assert frobenius_norm_sq(x) == expected

    def test_snr_denominator_identity(self, rng):
        x = crandn(rng, 6, 6)
        assert abs(snr_db(x, np.zeros_like(x))) < 1e-12


class TestPartition:
    def test_exact_division(self):
        p = make_partition(64, 4)
        assert len(p) == 16 and all(b.size == 4 for b in p)

    def test_remainder_block(self):
        assert make_partition(10, 4).sizes.tolist() == [4, 4, 2]

    def test_single_block(self):
        p = make_partition(8, 8)
        assert len(p) == 1 and p[0] == Block(0, 8)

    @pytest.mark.parametrize("n, b", [(8, 0), (8, 9), (1, 2)])
    def test_invalid(self, n, b):
        with pytest.raises(InvalidBlockSize):
            make_partition(n, b)

    def test_gap_rejected(self):
        with pytest.raises(InvalidBlockSize):
            BlockPartition((Block(0, 2), Block(3, 2)))

    @given(st.integers(1, 1024).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))))
    @settings(max_examples=200, deadline=None)
    def test_partition_invariants(self, nb):
        n, b = nb
        p = make_partition(n, b)
        pos = 0
        for blk in p:
            assert blk.offset == pos and blk.size >= 1
            pos += blk.size
        assert pos == n == p.total
        assert all(blk.size == b for blk in p.blocks[:-1])

    def test_rows(self):
        p = make_partition(10, 4)
        assert p.rows([2, 0]).tolist() == [8, 9, 0, 1, 2, 3]
        assert p.rows([]).size == 0


def test_as_image_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_image([[np.nan]])
    with pytest.raises(DimensionMismatch):
        as_image(np.zeros(3))
