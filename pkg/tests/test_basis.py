import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.fft import dctn

from maskdecomp.basis import (
    BasisFormatError,
    SubspaceKind,
    load_custom_subspace,
    make_dct_subspace,
    make_hadamard_subspace,
    save_custom_subspace,
    zigzag_pairs,
)


def gram_error(S):
    return np.abs(S.basis.T @ S.basis - np.eye(S.m)).max()


def test_zigzag_prefix_matches_jpeg_order():
    assert zigzag_pairs(8)[:10] == [
        (0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2), (0, 3), (1, 2), (2, 1), (3, 0)
    ]
    pairs = zigzag_pairs(5)
    assert len(pairs) == 25 and len(set(pairs)) == 25


def test_dct_dc_atom():
    S = make_dct_subspace(8, 1)
    assert S.basis.shape == (64, 1)
    np.testing.assert_allclose(S.basis[:, 0], np.full(64, 1 / 8), atol=1e-15)


def test_dct_64_by_40_orthonormal():
    S = make_dct_subspace(64, 40)
    assert S.basis.shape == (4096, 40)
    assert S.kind is SubspaceKind.DCT_LOW_FREQ
    assert gram_error(S) < 1e-10


def test_dct_atoms_are_one_hot_under_2d_dct():
    # independent route: scipy's orthonormal 2D DCT-II of each atom image
    S = make_dct_subspace(4, 3)
    for col, (u, v) in zip(S.basis.T, [(0, 0), (0, 1), (1, 0)]):
        coef = dctn(col.reshape(4, 4), type=2, norm="ortho")
        expected = np.zeros((4, 4))
        expected[u, v] = 1.0
        np.testing.assert_allclose(coef, expected, atol=1e-12)


def test_hadamard_constant_atom():
    S = make_hadamard_subspace(2, 1)
    np.testing.assert_allclose(S.basis[:, 0], [0.5] * 4)


def test_hadamard_64_by_10_entries():
    S = make_hadamard_subspace(64, 10)
    assert S.basis.shape == (4096, 10)
    assert np.all(np.isclose(np.abs(S.basis), 1 / 64, rtol=0, atol=1e-15))
    assert gram_error(S) < 1e-12


def test_hadamard_4x4_gram():
    S = make_hadamard_subspace(4, 4)
    gram = np.array([[a @ b for b in S.basis.T] for a in S.basis.T])
    np.testing.assert_allclose(gram, np.eye(4), atol=1e-12)


def test_hadamard_rows_follow_sequency():
    S = make_hadamard_subspace(8, 64)
    pairs = zigzag_pairs(8)
    for col, (u, v) in zip(S.basis.T, pairs):
        img = np.sign(col.reshape(8, 8))
        # sign changes along a column of the image give u, along a row give v
        assert np.count_nonzero(np.diff(img[:, 0])) == u
        assert np.count_nonzero(np.diff(img[0, :])) == v


@pytest.mark.parametrize("side", [3, 6, 12])
def test_hadamard_rejects_non_power_of_two(side):
    with pytest.raises(ValueError):
        make_hadamard_subspace(side, 1)


@pytest.mark.parametrize("make", [make_dct_subspace, make_hadamard_subspace])
@pytest.mark.parametrize("m", [0, 17])
def test_m_out_of_range(make, m):
    with pytest.raises(ValueError):
        make(4, m)


@settings(max_examples=30, deadline=None)
@given(exp=st.integers(1, 4), data=st.data())
def test_generated_subspaces_properties(exp, data):
    side = 2**exp
    m = data.draw(st.integers(1, side * side - 1))
    for make in (make_dct_subspace, make_hadamard_subspace):
        S, S_next = make(side, m), make(side, m + 1)
        assert gram_error(S) < 1e-10
        np.testing.assert_array_equal(S.basis, S_next.basis[:, :m])
        alpha = data.draw(st.lists(st.floats(-10, 10), min_size=m, max_size=m))
        np.testing.assert_allclose(S.basis.T @ S.synthesize(np.array(alpha)), alpha, atol=1e-10)


def test_subspace_is_read_only():
    S = make_dct_subspace(4, 2)
    with pytest.raises(ValueError):
        S.basis[0, 0] = 1.0


def _write(path, rows, cols, side, values):
    path.write_text(f"{rows} {cols} {side}\n" + " ".join(str(v) for v in values) + "\n")


def test_load_identity(tmp_path):
    p = tmp_path / "eye.txt"
    _write(p, 4, 4, 2, np.eye(4).ravel())
    S = load_custom_subspace(p)
    np.testing.assert_array_equal(S.basis, np.eye(4))
    assert S.kind is SubspaceKind.CUSTOM and not S.normalized


def test_load_normalizes_columns(tmp_path):
    p = tmp_path / "two.txt"
    _write(p, 4, 2, 2, (2 * np.eye(4)[:, :2]).ravel())
    with pytest.warns(UserWarning):
        S = load_custom_subspace(p)
    np.testing.assert_allclose(np.linalg.norm(S.basis, axis=0), 1.0)
    assert S.normalized


def test_load_dimension_mismatch(tmp_path):
    p = tmp_path / "bad.txt"
    _write(p, 16, 3, 5, np.zeros(48) + 1)
    with pytest.raises(BasisFormatError):
        load_custom_subspace(p)


@pytest.mark.parametrize(
    "content",
    ["", "4 4\n1 0 0 0", "4 1 2\n1 2 3", "4 1 2\n1 x 0 0", "4 1 2\n0 0 0 0"],
)
def test_load_malformed(tmp_path, content):
    p = tmp_path / "m.txt"
    p.write_text(content)
    with pytest.raises(BasisFormatError):
        load_custom_subspace(p)


def test_save_load_round_trip(tmp_path):
    S = make_dct_subspace(4, 5)
    save_custom_subspace(S, tmp_path / "d.txt")
    back = load_custom_subspace(tmp_path / "d.txt", block_side=4)
    np.testing.assert_array_equal(back.basis, S.basis)
