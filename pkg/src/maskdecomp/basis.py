"""Orthonormal subspace bases for the background and foreground components.

Background atoms are low-frequency 2D DCT-II basis images, foreground atoms
are low-sequency 2D Walsh-Hadamard basis images. Both are selected by a
JPEG-style zigzag walk over (row, column) frequency index pairs and
flattened row-major into the columns of an ``n x m`` matrix.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import hadamard


class SubspaceKind(enum.Enum):
    DCT_LOW_FREQ = "dct"
    HADAMARD_LOW_SEQ = "hadamard"
    CUSTOM = "custom"


class BasisFormatError(ValueError):
    """Raised when a custom basis file cannot be parsed."""


@dataclass(frozen=True)
class Subspace:
    """An ``n x m`` basis matrix whose columns are flattened block images.

    The array is made read-only on construction so instances can be shared
    between concurrent block solves.
    """

    basis: np.ndarray
    block_side: int
    kind: SubspaceKind
    normalized: bool = field(default=False)

    def __post_init__(self):
        basis = np.array(self.basis, dtype=np.float64)
        if basis.ndim != 2:
            raise ValueError("basis must be a 2D matrix")
        if basis.shape[0] != self.block_side**2:
            raise ValueError(
                f"basis has {basis.shape[0]} rows, expected block_side**2 = "
                f"{self.block_side**2}"
            )
        if basis.shape[1] > basis.shape[0]:
            raise ValueError("overcomplete bases (m > n) are not supported")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def m(self) -> int:
        return self.basis.shape[1]

    def synthesize(self, alpha: np.ndarray) -> np.ndarray:
        return self.basis @ alpha


def zigzag_pairs(side: int) -> list[tuple[int, int]]:
    """All ``(u, v)`` index pairs of a ``side x side`` grid in zigzag order.

    Starts ``(0,0), (0,1), (1,0), (2,0), (1,1), (0,2), ...`` as in JPEG.
    """
    pairs = []
    for d in range(2 * side - 1):
        lo, hi = max(0, d - side + 1), min(d, side - 1)
        us = range(lo, hi + 1) if d % 2 == 1 else range(hi, lo - 1, -1)
        pairs.extend((u, d - u) for u in us)
    return pairs


def dct_matrix(side: int) -> np.ndarray:
    """Orthonormal 1D DCT-II matrix; row ``k`` is the k-th cosine vector."""
    k = np.arange(side)[:, None]
    i = np.arange(side)[None, :]
    mat = np.cos(np.pi * (2 * i + 1) * k / (2 * side)) * np.sqrt(2.0 / side)
    mat[0] /= np.sqrt(2.0)
    return mat


def walsh_matrix(side: int) -> np.ndarray:
    """Hadamard matrix with rows sorted by sequency (number of sign changes).

    Entries are ``+-1/sqrt(side)`` so rows are orthonormal.
    """
    if side < 1 or side & (side - 1):
        raise ValueError(f"Hadamard block side must be a power of two, got {side}")
    h = hadamard(side).astype(np.float64)
    sequency = (np.diff(h, axis=1) != 0).sum(axis=1)
    return h[np.argsort(sequency, kind="stable")] / np.sqrt(side)


def _separable_subspace(rows_1d: np.ndarray, m: int) -> np.ndarray:
    side = rows_1d.shape[0]
    cols = [np.kron(rows_1d[u], rows_1d[v]) for u, v in zigzag_pairs(side)[:m]]
    return np.stack(cols, axis=1)


def _check_m(block_side: int, m: int) -> None:
    if block_side < 1:
        raise ValueError(f"block_side must be positive, got {block_side}")
    if not 1 <= m <= block_side**2:
        raise ValueError(f"m must lie in [1, {block_side**2}], got {m}")


def make_dct_subspace(block_side: int, m: int) -> Subspace:
    """The ``m`` lowest-frequency 2D DCT-II atoms of a square block."""
    _check_m(block_side, m)
    basis = _separable_subspace(dct_matrix(block_side), m)
    return Subspace(basis, block_side, SubspaceKind.DCT_LOW_FREQ)


def make_hadamard_subspace(block_side: int, m: int) -> Subspace:
    """The ``m`` lowest-sequency 2D Walsh-Hadamard atoms of a square block.

    Every entry equals ``+1/block_side`` or ``-1/block_side``.
    """
    _check_m(block_side, m)
    basis = _separable_subspace(walsh_matrix(block_side), m)
    return Subspace(basis, block_side, SubspaceKind.HADAMARD_LOW_SEQ)


def load_custom_subspace(path: str | Path, block_side: int | None = None) -> Subspace:
    """Read a basis matrix from a text file.

    The first line holds ``rows cols block_side``; the remaining tokens are
    ``rows * cols`` values in row-major order. Columns that are not unit
    norm are rescaled and the returned subspace has ``normalized=True``.
    Orthonormality is not enforced. If ``block_side`` is given it must agree
    with the file.
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise BasisFormatError(f"{path}: empty basis file")
    try:
        rows, cols, side = (int(tok) for tok in lines[0].split())
        values = np.array([float(tok) for tok in " ".join(lines[1:]).split()])
    except ValueError as exc:
        raise BasisFormatError(f"{path}: {exc}") from exc
    if block_side is not None and side != block_side:
        raise BasisFormatError(
            f"{path}: file declares block_side {side}, expected {block_side}"
        )
    if rows != side * side:
        raise BasisFormatError(f"{path}: {rows} rows but block_side {side}**2 = {side * side}")
    if values.size != rows * cols:
        raise BasisFormatError(f"{path}: expected {rows * cols} values, found {values.size}")
    if cols < 1 or cols > rows:
        raise BasisFormatError(f"{path}: column count {cols} out of range")
    if not np.all(np.isfinite(values)):
        raise BasisFormatError(f"{path}: non-finite values")

    basis = values.reshape(rows, cols)
    norms = np.linalg.norm(basis, axis=0)
    if np.any(norms == 0):
        raise BasisFormatError(f"{path}: zero column")
    normalized = bool(np.any(np.abs(norms - 1.0) > 1e-12))
    if normalized:
        warnings.warn(f"{path}: basis columns rescaled to unit norm", stacklevel=2)
        basis = basis / norms
    return Subspace(basis, side, SubspaceKind.CUSTOM, normalized=normalized)


def save_custom_subspace(subspace: Subspace, path: str | Path) -> None:
    rows, cols = subspace.basis.shape
    body = "\n".join(" ".join(repr(float(v)) for v in row) for row in subspace.basis)
    Path(path).write_text(f"{rows} {cols} {subspace.block_side}\n{body}\n")
