"""Tests for support-set algebra and masking primitives."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spadsp.support import SupportSet, apply_mask, sparsify, support_union, top_s_support


def random_complex(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


class TestSupportSet:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            SupportSet((1, 1), 4)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            SupportSet((0, 4), 4)
        with pytest.raises(ValueError):
            SupportSet((-1,), 4)

    def test_from_iterable_dedups_and_sorts(self):
        s = SupportSet.from_iterable([3, 1, 3, 0], 5)
        assert s.indices == (0, 1, 3)

    def test_membership_and_len(self):
        s = SupportSet((0, 2), 4)
        assert 2 in s and 1 not in s
        assert len(s) == 2

    def test_mask(self):
        assert list(SupportSet((1, 3), 4).mask()) == [False, True, False, True]

    def test_equality_is_order_insensitive(self):
        assert SupportSet.from_iterable([2, 0], 4) == SupportSet((0, 2), 4)


class TestTopS:
    def test_two_largest_magnitudes(self):
        v = np.array([3 + 0j, 0, 0 + 4j, 1])
        assert top_s_support(v, 2).indices == (0, 2)

    def test_tie_break_toward_smaller_index(self):
        v = np.ones(4, dtype=complex)
        assert top_s_support(v, 2).indices == (0, 1)

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(0)
        v = random_complex(rng, 64)
        got = top_s_support(v, 12)
        oracle = set(np.argsort(np.abs(v))[::-1][:12])
        assert set(got.indices) == oracle

    def test_s_out_of_range(self):
        v = np.ones(4, dtype=complex)
        with pytest.raises(ValueError):
            top_s_support(v, 0)
        with pytest.raises(ValueError):
            top_s_support(v, 5)

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        v = random_complex(rng, 32)
        assert top_s_support(v, 7) == top_s_support(v.copy(), 7)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 16))
    @settings(max_examples=50, deadline=None)
    def test_selected_magnitudes_dominate_complement(self, seed, s):
        rng = np.random.default_rng(seed)
        v = random_complex(rng, 16)
        sel = top_s_support(v, s)
        comp = [i for i in range(16) if i not in sel]
        if comp:
            assert min(abs(v[i]) for i in sel) >= max(abs(v[i]) for i in comp)


class TestUnion:
    def test_basic(self):
        a = SupportSet((0, 1), 4)
        b = SupportSet((1, 2), 4)
        assert support_union(a, b).indices == (0, 1, 2)

    def test_identity_with_empty(self):
        a = SupportSet((0, 31), 64)
        assert support_union(a, SupportSet.empty(64)) == a

    def test_capacity_mismatch(self):
        with pytest.raises(ValueError):
            support_union(SupportSet((0,), 4), SupportSet((0,), 8))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_matches_bitset_oracle(self, seed):
        rng = np.random.default_rng(seed)
        a = SupportSet.from_iterable(rng.choice(64, 12, replace=False), 64)
        b = SupportSet.from_iterable(rng.choice(64, 12, replace=False), 64)
        bits = a.mask() | b.mask()
        assert support_union(a, b).indices == tuple(np.nonzero(bits)[0])


class TestMaskAndSparsify:
    def test_apply_mask_basic(self):
        x = np.array([1, 2, 3, 4], dtype=complex)
        out = apply_mask(x, SupportSet((1, 3), 4))
        assert list(out) == [0, 2, 0, 4]

    def test_full_set_is_identity(self):
        x = np.arange(5, dtype=complex)
        assert np.array_equal(apply_mask(x, SupportSet.full(5)), x)

    def test_matches_diagonal_matrix_oracle(self):
        rng = np.random.default_rng(2)
        x = random_complex(rng, 32)
        lam = SupportSet.from_iterable(rng.choice(32, 9, replace=False), 32)
        Q = np.diag(lam.mask().astype(float))
        assert np.allclose(apply_mask(x, lam), Q @ x)

    def test_capacity_mismatch(self):
        with pytest.raises(ValueError):
            apply_mask(np.ones(4, dtype=complex), SupportSet((0,), 5))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        x = random_complex(rng, 16)
        lam = SupportSet.from_iterable(rng.choice(16, 5, replace=False), 16)
        once = apply_mask(x, lam)
        assert np.array_equal(apply_mask(once, lam), once)

    def test_sparsify_basic(self):
        h = np.array([1, 2, 3], dtype=complex)
        assert list(sparsify(h, SupportSet((2,), 3))) == [0, 0, 3]

    def test_sparsify_full_set_bit_identical(self):
        rng = np.random.default_rng(3)
        h = random_complex(rng, 12)
        out = sparsify(h, SupportSet.full(12))
        assert np.array_equal(out, h)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 16))
    @settings(max_examples=50, deadline=None)
    def test_nonzero_count_bounded_by_keep(self, seed, k):
        rng = np.random.default_rng(seed)
        h = random_complex(rng, 16)
        keep = SupportSet.from_iterable(rng.choice(16, k, replace=False), 16)
        assert np.count_nonzero(sparsify(h, keep)) <= len(keep)
