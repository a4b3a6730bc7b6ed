"""Grayscale image I/O and block tiling."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
SUPPORTED_SUFFIXES = {".pgm", ".png"}


class ImageFormatError(OSError):
    pass


@dataclass(frozen=True)
class GrayImage:
    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64).ravel()
        if pixels.shape[0] != self.width * self.height:
            raise ValueError(
                f"{pixels.shape[0]} pixels for a {self.width}x{self.height} image"
            )
        if np.any(pixels < 0.0) or np.any(pixels > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "GrayImage":
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr.shape[1], arr.shape[0], arr)

    def as_array(self) -> np.ndarray:
        return self.pixels.reshape(self.height, self.width)


@dataclass(frozen=True)
class BlockGrid:
    block_side: int
    blocks_x: int
    blocks_y: int
    blocks: list[np.ndarray]
    pad_right: int
    pad_bottom: int

    @property
    def width(self) -> int:
        return self.blocks_x * self.block_side - self.pad_right

    @property
    def height(self) -> int:
        return self.blocks_y * self.block_side - self.pad_bottom


def load_image(path: str | Path) -> GrayImage:
    """Load a PGM or PNG as grayscale in [0, 1].

    RGB(A) input is reduced with Rec. 601 luma weights in floating point.
    """
    path = Path(path)
    if path.suffix.lower() not in SUPPORTED_SUFFIXES:
        raise ImageFormatError(f"{path}: unsupported image format {path.suffix!r}")
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("RGB", "RGBA", "P"):
                rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
                arr = rgb @ LUMA_WEIGHTS / 255.0
            elif im.mode in ("L", "1", "LA"):
                arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
            elif im.mode in ("I", "I;16", "I;16B"):
                raw = np.asarray(im, dtype=np.float64)
                maxval = 65535.0 if raw.max(initial=0) > 255 else 255.0
                arr = raw / maxval
            else:
                raise ImageFormatError(f"{path}: unsupported pixel mode {im.mode}")
    except (UnidentifiedImageError, SyntaxError, ValueError) as exc:
        raise ImageFormatError(f"{path}: {exc}") from exc
    return GrayImage.from_array(np.clip(arr, 0.0, 1.0))


def to_bytes(pixels: np.ndarray) -> np.ndarray:
    """Quantize [0, 1] values to 0..255 with round-half-up."""
    return np.floor(np.asarray(pixels) * 255.0 + 0.5).astype(np.uint8)


def save_image(image: GrayImage, path: str | Path) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in SUPPORTED_SUFFIXES:
        raise ImageFormatError(f"{path}: output must be .pgm or .png")
    Image.fromarray(to_bytes(image.as_array()), mode="L").save(
        path, format="PPM" if suffix == ".pgm" else "PNG"
    )


def save_mask(mask_image: GrayImage, path: str | Path) -> None:
    """Write a binary (1 -> 255) or relaxed mask as 8-bit grayscale."""
    save_image(mask_image, path)


def tile(image: GrayImage, block_side: int) -> BlockGrid:
    """Cut into row-major ``block_side`` squares, replicating the last row/column as padding."""
    if block_side < 2:
        raise ValueError("block_side must be >= 2")
    arr = image.as_array()
    pad_bottom = -image.height % block_side
    pad_right = -image.width % block_side
    arr = np.pad(arr, ((0, pad_bottom), (0, pad_right)), mode="edge")
    by, bx = arr.shape[0] // block_side, arr.shape[1] // block_side
    blocks = [
        arr[r * block_side : (r + 1) * block_side, c * block_side : (c + 1) * block_side].ravel()
        for r in range(by)
        for c in range(bx)
    ]
    return BlockGrid(block_side, bx, by, blocks, pad_right, pad_bottom)


def reassemble(grid: BlockGrid, masks) -> GrayImage:
    """Stitch per-block vectors (arrays or mask objects) and crop the padding."""
    masks = list(masks)
    if len(masks) != len(grid.blocks):
        raise ValueError(f"{len(masks)} masks for {len(grid.blocks)} blocks")
    s = grid.block_side
    full = np.empty((grid.blocks_y * s, grid.blocks_x * s))
    for i, mask in enumerate(masks):
        values = np.asarray(getattr(mask, "values", mask), dtype=np.float64)
        if values.shape != (s * s,):
            raise ValueError(f"mask {i} has length {values.shape}, expected {s * s}")
        r, c = divmod(i, grid.blocks_x)
        full[r * s : (r + 1) * s, c * s : (c + 1) * s] = values.reshape(s, s)
    return GrayImage.from_array(full[: grid.height, : grid.width])
