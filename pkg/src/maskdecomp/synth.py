"""Synthetic text-on-texture blocks with exact ground-truth masks.

The background is ``0.5`` plus a random combination of low-frequency DCT
atoms; the text is rendered from the built-in bitmap font at a constant
intensity and overlaid (not added) onto the background.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from maskdecomp import font
from maskdecomp.basis import dct_matrix, zigzag_pairs
from maskdecomp.solver import MaskVector


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic block.

    Texture atoms are drawn from zigzag DCT positions ``1 .. solver_m1 - 1``
    (inside the solver's background subspace) or, with ``hard=True``, from
    positions ``solver_m1 .. 2 * solver_m1 - 1``. Atoms are scaled to unit
    peak amplitude so ``texture_amplitude`` is in pixel units.
    """

    block_side: int = 64
    texture_atoms: int = 4
    texture_amplitude: float = 0.15
    glyph_text: str = "TXT"
    glyph_intensity: float = 0.1
    glyph_scale: int = 3
    seed: int = 0
    hard: bool = False
    solver_m1: int = 40

    def __post_init__(self):
        if self.block_side < 2:
            raise ValueError("block_side must be >= 2")
        if self.texture_atoms < 0:
            raise ValueError("texture_atoms must be >= 0")
        if self.texture_amplitude < 0:
            raise ValueError("texture_amplitude must be >= 0")
        if not 0.0 <= self.glyph_intensity <= 1.0:
            raise ValueError("glyph_intensity must lie in [0, 1]")
        if self.glyph_scale < 1:
            raise ValueError("glyph_scale must be >= 1")
        if not self.glyph_text:
            raise ValueError("glyph_text must be nonempty")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")
        hi = 2 * self.solver_m1 if self.hard else self.solver_m1
        lo = self.solver_m1 if self.hard else 1
        if self.texture_atoms > hi - lo or hi > self.block_side**2:
            raise ValueError("not enough DCT atoms in the requested band")


@dataclass(frozen=True)
class LabeledBlock:
    image: np.ndarray
    truth_mask: MaskVector
    background: np.ndarray
    spec: SynthSpec


def _texture(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    side = spec.block_side
    lo = spec.solver_m1 if spec.hard else 1
    hi = 2 * spec.solver_m1 if spec.hard else spec.solver_m1
    positions = rng.choice(np.arange(lo, hi), size=spec.texture_atoms, replace=False)
    coefs = rng.uniform(-spec.texture_amplitude, spec.texture_amplitude, spec.texture_atoms)
    rows = dct_matrix(side)
    rows = rows / np.abs(rows).max(axis=1, keepdims=True)
    pairs = zigzag_pairs(side)
    bg = np.full(side * side, 0.5)
    for pos, c in zip(sorted(positions), coefs):
        u, v = pairs[pos]
        bg += c * np.kron(rows[u], rows[v])
    return np.clip(bg, 0.0, 1.0)


def generate(spec: SynthSpec) -> LabeledBlock:
    """Render one block; raises ``ValueError`` if the text does not fit or is blank."""
    side = spec.block_side
    try:
        glyphs = font.render(spec.glyph_text, spec.glyph_scale)
    except KeyError as exc:
        raise ValueError(str(exc)) from exc
    gh, gw = glyphs.shape
    if gh > side or gw > side:
        raise ValueError(f"text {spec.glyph_text!r} at scale {spec.glyph_scale} does not fit a {side}px block")
    coverage = glyphs.sum() / side**2
    if not 0.0 < coverage <= 0.5:
        raise ValueError(f"glyph coverage {coverage:.3f} outside (0, 0.5]")

    rng = np.random.Generator(np.random.PCG64(spec.seed))
    top = int(rng.integers(0, side - gh + 1))
    left = int(rng.integers(0, side - gw + 1))
    truth = np.zeros((side, side))
    truth[top : top + gh, left : left + gw] = glyphs
    truth = truth.ravel()

    background = _texture(spec, rng)
    image = (1.0 - truth) * background + truth * spec.glyph_intensity
    return LabeledBlock(image, MaskVector(truth, binary=True), background, spec)


def derive_seeds(seed: int, count: int) -> list[int]:
    return [
        int(child.generate_state(1, dtype=np.uint32)[0])
        for child in np.random.SeedSequence(seed).spawn(count)
    ]


def generate_corpus(spec_template: SynthSpec, count: int, seed: int) -> list[LabeledBlock]:
    if count < 1:
        raise ValueError("count must be >= 1")
    return [generate(replace(spec_template, seed=s)) for s in derive_seeds(seed, count)]


def write_corpus(blocks: list[LabeledBlock], out_dir: str | Path) -> list[Path]:
    """Write ``block_%04d.pgm`` / ``block_%04d_gt.pgm`` pairs and ``manifest.txt``."""
    from maskdecomp.imaging import GrayImage, save_mask

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    manifest = []
    for i, block in enumerate(blocks):
        side = block.spec.block_side
        name = f"block_{i:04d}"
        img_path, gt_path = out / f"{name}.pgm", out / f"{name}_gt.pgm"
        save_mask(GrayImage(side, side, block.image), img_path)
        save_mask(GrayImage(side, side, block.truth_mask.values), gt_path)
        written += [img_path, gt_path]
        manifest.append(f"{name} {json.dumps(asdict(block.spec), sort_keys=True)}")
    manifest_path = out / "manifest.txt"
    manifest_path.write_text("\n".join(manifest) + "\n")
    written.append(manifest_path)
    return written
