import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lvtensor.errors import ArgumentError
from lvtensor.tensor import (as_tensor, flat_offset, fold, frobenius_norm, infinity_norm, mse,
                             multilinear_multiply, unfold)


def brute_unfold(t, mode):
    """Column index j = sum over the other modes (ascending) of i_n * prod of earlier extents."""
    dims = t.shape
    others = [n for n in range(t.ndim) if n != mode]
    out = np.zeros((dims[mode], t.size // dims[mode]))
    for idx in itertools.product(*map(range, dims)):
        j, stride = 0, 1
        for n in others:
            j += idx[n] * stride
            stride *= dims[n]
        out[idx[mode], j] = t[idx]
    return out


def brute_multilinear(core, factors):
    """Nested-sum definition with one factor per mode."""
    out_dims = tuple(u.shape[0] for u in factors)
    out = np.zeros(out_dims)
    for i in itertools.product(*map(range, out_dims)):
        total = 0.0
        for j in itertools.product(*map(range, core.shape)):
            term = core[j]
            for k, u in enumerate(factors):
                term *= u[i[k], j[k]]
            total += term
        out[i] = total
    return out


def small_shapes(max_order=4, max_extent=3):
    for m in range(1, max_order + 1):
        yield from itertools.product(range(1, max_extent + 1), repeat=m)


def test_flat_offset_is_row_major_bijection():
    dims = (2, 3, 4)
    offsets = [flat_offset(dims, idx) for idx in itertools.product(*map(range, dims))]
    assert offsets == list(range(24))
    t = np.arange(24.0).reshape(dims)
    for idx in itertools.product(*map(range, dims)):
        assert t[idx] == flat_offset(dims, idx)


def test_as_tensor_validates():
    t = as_tensor(range(6), (2, 3))
    assert t.shape == (2, 3) and t.dtype == np.float64
    assert not t.flags.writeable
    with pytest.raises(ArgumentError):
        as_tensor(range(5), (2, 3))
    with pytest.raises(ArgumentError):
        as_tensor([], (0,))


def test_unfold_matrix_mode1_is_identity():
    a = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(unfold(a, 0), a)


def test_unfold_2x2x2_mode2_against_index_formula():
    t = np.arange(8.0).reshape(2, 2, 2)
    np.testing.assert_array_equal(unfold(t, 1), brute_unfold(t, 1))
    # column j = i_1 + 2 * i_3 holds t[i_1, i_2, i_3]
    expected = np.array([[0.0, 4.0, 1.0, 5.0], [2.0, 6.0, 3.0, 7.0]])
    np.testing.assert_array_equal(unfold(t, 1), expected)


@pytest.mark.parametrize("mode", [0, 1, 2])
def test_unfold_zero_tensor(mode):
    dims = (3, 4, 5)
    z = unfold(np.zeros(dims), mode)
    assert z.shape == (dims[mode], 60 // dims[mode])
    assert not z.any()


def test_unfold_all_small_shapes_exact():
    rng = np.random.default_rng(0)
    for dims in small_shapes():
        t = rng.standard_normal(dims)
        for k in range(len(dims)):
            np.testing.assert_array_equal(unfold(t, k), brute_unfold(t, k))
            np.testing.assert_array_equal(fold(unfold(t, k), k, dims), t)


def test_unfold_rejects_bad_mode():
    with pytest.raises(ArgumentError):
        unfold(np.zeros((2, 2)), 2)
    with pytest.raises(ArgumentError):
        unfold(np.zeros((2, 2)), -1)


@pytest.mark.parametrize("dims,mode", [((3, 4, 5), 0), ((2, 3, 4), 2)])
def test_fold_roundtrip(dims, mode):
    t = np.random.default_rng(1).standard_normal(dims)
    np.testing.assert_array_equal(fold(unfold(t, mode), mode, dims), t)


def test_fold_matrix_case():
    a = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(fold(a, 0, (2, 3)), a)


def test_fold_shape_mismatch():
    with pytest.raises(ArgumentError):
        fold(np.zeros((2, 5)), 0, (2, 3))


@settings(max_examples=60, deadline=None)
@given(dims=st.lists(st.integers(1, 4), min_size=1, max_size=4), seed=st.integers(0, 2**32 - 1))
def test_fold_unfold_identity_property(dims, seed):
    t = np.random.default_rng(seed).standard_normal(dims)
    for k in range(len(dims)):
        np.testing.assert_array_equal(fold(unfold(t, k), k, dims), t)
        assert frobenius_norm(unfold(t, k)) == pytest.approx(frobenius_norm(t), rel=1e-14)


def test_multilinear_identity_factors():
    t = np.random.default_rng(2).standard_normal((3, 4, 2))
    out = multilinear_multiply(t, [(k, np.eye(d)) for k, d in enumerate(t.shape)])
    np.testing.assert_array_equal(out, t)


def test_multilinear_fiber_sums():
    t = np.arange(8.0).reshape(2, 2, 2)
    out = multilinear_multiply(t, {0: np.ones((1, 2))})
    expected = np.zeros((1, 2, 2))
    for j in range(2):
        for k in range(2):
            expected[0, j, k] = t[0, j, k] + t[1, j, k]
    np.testing.assert_array_equal(out, expected)


def test_multilinear_order_irrelevant():
    rng = np.random.default_rng(3)
    t = rng.standard_normal((3, 3, 3))
    a, b = rng.standard_normal((2, 3)), rng.standard_normal((4, 3))
    one = multilinear_multiply(multilinear_multiply(t, {0: a}), {1: b})
    two = multilinear_multiply(multilinear_multiply(t, {1: b}), {0: a})
    np.testing.assert_allclose(one, two, rtol=0, atol=1e-12)


def test_multilinear_matches_nested_sum_all_small_shapes():
    rng = np.random.default_rng(4)
    for dims in small_shapes(max_order=4, max_extent=3):
        core = rng.standard_normal(dims)
        factors = [rng.standard_normal((rng.integers(1, 4), d)) for d in dims]
        got = multilinear_multiply(core, list(enumerate(factors)))
        np.testing.assert_allclose(got, brute_multilinear(core, factors), rtol=0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(dims=st.lists(st.integers(1, 4), min_size=1, max_size=4), seed=st.integers(0, 2**32 - 1),
       rows=st.integers(1, 4))
def test_unfold_of_mode_product_property(dims, seed, rows):
    rng = np.random.default_rng(seed)
    t = rng.standard_normal(dims)
    for k in range(len(dims)):
        u = rng.standard_normal((rows, dims[k]))
        lhs = unfold(multilinear_multiply(t, {k: u}), k)
        np.testing.assert_allclose(lhs, u @ unfold(t, k), rtol=0, atol=1e-12)


def test_multilinear_errors():
    t = np.zeros((2, 3))
    with pytest.raises(ArgumentError):
        multilinear_multiply(t, [(0, np.eye(3))])
    with pytest.raises(ArgumentError):
        multilinear_multiply(t, [(0, np.eye(2)), (0, np.eye(2))])


def test_norms_and_mse():
    ones = np.ones((2, 2, 2))
    assert frobenius_norm(ones) == pytest.approx(np.sqrt(8))
    assert infinity_norm(ones) == 1.0
    t = np.random.default_rng(5).standard_normal((3, 4))
    assert mse(t, t) == 0.0
    assert mse(np.ones((2, 3, 4)), np.zeros((2, 3, 4))) == 1.0
    with pytest.raises(ArgumentError):
        mse(np.ones((2, 3)), np.ones((3, 2)))
