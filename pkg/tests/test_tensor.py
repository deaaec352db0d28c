import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adas.tensor import (
    SnapshotError,
    Tensor4,
    fold_mode3,
    fold_mode4,
    read_at4,
    unfold_mode3,
    unfold_mode4,
    write_at4,
)
from oracles import brute_unfold

dims4 = st.tuples(*[st.integers(1, 4)] * 4)


def random_tensor(dims, seed=0):
    return Tensor4(np.random.default_rng(seed).normal(size=dims))


def test_rejects_bad_shapes():
    with pytest.raises(ValueError):
        Tensor4(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        Tensor4(np.zeros((2, 0, 2, 2)))
    with pytest.raises(ValueError):
        Tensor4.from_flat((1, 1, 2, 2), [1.0, 2.0, 3.0])


def test_data_is_read_only():
    t = random_tensor((1, 1, 2, 2))
    with pytest.raises(ValueError):
        t.data[0, 0, 0, 0] = 5.0


def test_mode3_small_example_matches_index_map():
    # layout: d3 slow, d4 fast -> data[d3, d4] = [a, b, c, d]
    a, b, c, d = 1.0, 2.0, 3.0, 4.0
    t = Tensor4.from_flat((1, 1, 2, 2), [a, b, c, d])
    expected = brute_unfold(t.data, 3)
    np.testing.assert_array_equal(expected, [[a, c], [b, d]])
    np.testing.assert_array_equal(unfold_mode3(t), expected)


def test_mode4_small_example_is_transpose_of_mode3():
    t = Tensor4.from_flat((1, 1, 2, 2), [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(unfold_mode4(t), brute_unfold(t.data, 4))
    np.testing.assert_array_equal(unfold_mode4(t), unfold_mode3(t).T)


def test_scalar_tensor():
    t = Tensor4.from_flat((1, 1, 1, 1), [7.5])
    np.testing.assert_array_equal(unfold_mode3(t), [[7.5]])
    np.testing.assert_array_equal(unfold_mode4(t), [[7.5]])


def test_unfold_shapes_and_norms():
    t = random_tensor((2, 2, 3, 4))
    m3 = unfold_mode3(t)
    assert m3.shape == (16, 3)
    assert np.linalg.norm(m3) == pytest.approx(t.frobenius(), rel=1e-14)
    t = random_tensor((3, 3, 8, 16))
    m4 = unfold_mode4(t)
    assert m4.shape == (72, 16)
    np.testing.assert_array_equal(np.sort(m4.ravel()), np.sort(t.flat()))


@settings(max_examples=60, deadline=None)
@given(dims=dims4, seed=st.integers(0, 2**31))
def test_unfoldings_match_brute_force_and_round_trip(dims, seed):
    t = random_tensor(dims, seed)
    m3, m4 = unfold_mode3(t), unfold_mode4(t)
    np.testing.assert_array_equal(m3, brute_unfold(t.data, 3))
    np.testing.assert_array_equal(m4, brute_unfold(t.data, 4))
    np.testing.assert_array_equal(fold_mode3(m3, dims).data, t.data)
    np.testing.assert_array_equal(fold_mode4(m4, dims).data, t.data)
    norm = t.frobenius()
    assert np.linalg.norm(m3) == pytest.approx(norm, rel=1e-12, abs=1e-300)
    assert np.linalg.norm(m4) == pytest.approx(norm, rel=1e-12, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(dims=dims4, seed=st.integers(0, 2**31))
def test_singular_values_ignore_row_order(dims, seed):
    t = random_tensor(dims, seed)
    n1, n2, n3, n4 = dims
    # alternative lexicographic order (d4, d2, d1) for the mode-3 rows
    alt = t.data.transpose(3, 1, 0, 2).reshape(n4 * n2 * n1, n3)
    s_ref = np.linalg.svd(unfold_mode3(t), compute_uv=False)
    s_alt = np.linalg.svd(alt, compute_uv=False)
    np.testing.assert_allclose(s_alt, s_ref, atol=1e-10)


def test_at4_round_trip(tmp_path):
    t = random_tensor((3, 3, 4, 8), seed=3)
    path = tmp_path / "w.at4"
    write_at4(path, t)
    raw = path.read_bytes()
    assert raw[:4] == b"AT4\x00"
    assert len(raw) == 4 + 16 + 8 * 3 * 3 * 4 * 8
    back = read_at4(path)
    assert back.dims == t.dims
    np.testing.assert_array_equal(back.data, t.data)


def test_at4_rejects_corruption(tmp_path):
    t = random_tensor((1, 1, 2, 2))
    path = tmp_path / "w.at4"
    write_at4(path, t)
    raw = path.read_bytes()
    (tmp_path / "magic.at4").write_bytes(b"XX4\x00" + raw[4:])
    (tmp_path / "short.at4").write_bytes(raw[:-8])
    for name in ("magic.at4", "short.at4"):
        with pytest.raises(SnapshotError):
            read_at4(tmp_path / name)
