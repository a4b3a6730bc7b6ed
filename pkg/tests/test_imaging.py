import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from maskdecomp.imaging import (
    GrayImage,
    ImageFormatError,
    load_image,
    reassemble,
    save_mask,
    tile,
    to_bytes,
)


def _save_rgb(path, rgb):
    Image.fromarray(np.asarray(rgb, dtype=np.uint8), mode="RGB").save(path)


@pytest.mark.parametrize("value,expected", [(255, 1.0), (0, 0.0)])
def test_load_gray_extremes(tmp_path, value, expected):
    p = tmp_path / "g.png"
    Image.fromarray(np.full((2, 2), value, dtype=np.uint8)).save(p)
    img = load_image(p)
    assert (img.width, img.height) == (2, 2)
    np.testing.assert_array_equal(img.pixels, expected)


def test_load_red_uses_rec601(tmp_path):
    p = tmp_path / "red.png"
    _save_rgb(p, [[[255, 0, 0]]])
    assert load_image(p).pixels[0] == pytest.approx(0.299, abs=1e-12)


def test_load_plain_pgm(tmp_path):
    p = tmp_path / "plain.pgm"
    p.write_text("P2\n3 1\n255\n0 128 255\n")
    np.testing.assert_allclose(load_image(p).pixels, [0, 128 / 255, 1])


def test_load_binary_pgm_round_trip_bit_exact(tmp_path, rng):
    raw = rng.integers(0, 256, (5, 7), dtype=np.uint8)
    src, dst = tmp_path / "a.pgm", tmp_path / "b.pgm"
    Image.fromarray(raw).save(src)
    save_mask(load_image(src), dst)
    assert src.read_bytes() == dst.read_bytes()
    np.testing.assert_array_equal(np.asarray(Image.open(dst)), raw)


def test_load_rejects_unknown_suffix(tmp_path):
    p = tmp_path / "x.bmp"
    p.write_bytes(b"BM")
    with pytest.raises(ImageFormatError):
        load_image(p)


def test_load_truncated(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(OSError):
        load_image(p)


def test_save_quantization(tmp_path):
    for values, expected in [([1.0] * 4, 255), ([0.0] * 4, 0), ([0.5] * 4, 128)]:
        p = tmp_path / "m.png"
        save_mask(GrayImage(2, 2, values), p)
        np.testing.assert_array_equal(np.asarray(Image.open(p)), expected)
    assert to_bytes(np.array([0.5]))[0] == 128


def test_gray_image_domain():
    with pytest.raises(ValueError):
        GrayImage(1, 1, [1.5])
    with pytest.raises(ValueError):
        GrayImage(2, 2, [0.0])


def test_tile_single_block():
    grid = tile(GrayImage.from_array(np.zeros((64, 64))), 64)
    assert len(grid.blocks) == 1 and grid.pad_right == grid.pad_bottom == 0


def test_tile_pads_by_replication():
    arr = np.linspace(0, 1, 64 * 65).reshape(64, 65)
    grid = tile(GrayImage.from_array(arr), 64)
    assert (grid.blocks_x, grid.blocks_y, grid.pad_right, grid.pad_bottom) == (2, 1, 63, 0)
    right = grid.blocks[1].reshape(64, 64)
    np.testing.assert_array_equal(right, np.repeat(arr[:, 64:65], 64, axis=1))


def test_tile_round_trip_checkerboard():
    board = (np.indices((128, 128)).sum(axis=0) % 2).astype(float)
    grid = tile(GrayImage.from_array(board), 64)
    assert len(grid.blocks) == 4
    np.testing.assert_array_equal(reassemble(grid, grid.blocks).as_array(), board)


@settings(max_examples=40, deadline=None)
@given(h=st.integers(1, 40), w=st.integers(1, 40), side=st.sampled_from([2, 4, 8, 16]), seed=st.integers(0, 2**16))
def test_round_trip_any_size(h, w, side, seed):
    arr = (np.random.default_rng(seed).random((h, w)) < 0.5).astype(float)
    grid = tile(GrayImage.from_array(arr), side)
    out = reassemble(grid, grid.blocks)
    assert (out.height, out.width) == (h, w)
    np.testing.assert_array_equal(out.as_array(), arr)


def test_reassemble_all_ones():
    grid = tile(GrayImage.from_array(np.zeros((8, 8))), 8)
    np.testing.assert_array_equal(reassemble(grid, [np.ones(64)]).pixels, 1.0)


def test_reassemble_length_mismatch():
    grid = tile(GrayImage.from_array(np.zeros((8, 16))), 8)
    with pytest.raises(ValueError):
        reassemble(grid, [np.ones(64)])
