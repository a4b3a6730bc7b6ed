"""Whole-image extraction: tile, solve every block, stitch the masks."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache

import numpy as np

from maskdecomp.basis import Subspace, make_dct_subspace, make_hadamard_subspace
from maskdecomp.imaging import GrayImage, reassemble, tile
from maskdecomp.linalg import NumericalError
from maskdecomp.solver import BinarizeStrategy, SolverConfig, solve_block

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    solver: SolverConfig = field(default_factory=SolverConfig)
    block_side: int = 64
    m1: int = 40
    m2: int = 10
    emit_relaxed: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.block_side < 2:
            raise ValueError("block_side must be >= 2")
        if self.block_side & (self.block_side - 1):
            raise ValueError("block_side must be a power of two for the Hadamard basis")
        n = self.block_side**2
        if not 1 <= self.m1 <= n or not 1 <= self.m2 <= n:
            raise ValueError(f"m1 and m2 must lie in [1, {n}]")
        if self.solver.k1 > self.m1 or self.solver.k2 > self.m2:
            raise ValueError("k1/k2 may not exceed m1/m2")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def to_dict(self) -> dict:
        solver = asdict(self.solver)
        solver["binarize_strategy"] = self.solver.binarize_strategy.value
        out = {k: v for k, v in asdict(self).items() if k != "solver"}
        out["solver"] = solver
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        solver_keys = {f.name for f in fields(SolverConfig)}
        solver = dict(data.pop("solver", {}) or {})
        for key in list(data):
            if key in solver_keys:
                solver[key] = data.pop(key)
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "binarize_strategy" in solver:
            solver["binarize_strategy"] = BinarizeStrategy(solver["binarize_strategy"])
        return cls(solver=SolverConfig(**solver), **data)

    def with_solver(self, **changes) -> "RunConfig":
        return replace(self, solver=replace(self.solver, **changes))


@lru_cache(maxsize=8)
def bases(block_side: int, m1: int, m2: int) -> tuple[Subspace, Subspace]:
    return make_dct_subspace(block_side, m1), make_hadamard_subspace(block_side, m2)


@dataclass
class ExtractResult:
    mask: GrayImage
    relaxed: GrayImage
    traces: list[list[float]]
    failed_blocks: list[int]

    @property
    def n_blocks(self) -> int:
        return len(self.traces)


def extract(image: GrayImage, config: RunConfig) -> ExtractResult:
    """Segment ``image`` block by block.

    A block whose normal equations cannot be factorized is marked
    all-background and listed in ``failed_blocks``.
    """
    grid = tile(image, config.block_side)
    P1, P2 = bases(config.block_side, config.m1, config.m2)
    n = config.block_side**2

    def run(block: np.ndarray):
        try:
            return solve_block(block, P1, P2, config.solver)
        except NumericalError as exc:
            log.warning("block solve failed: %s", exc)
            return None

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(run, grid.blocks))
    else:
        results = [run(b) for b in grid.blocks]

    masks, relaxed, traces, failed = [], [], [], []
    for i, res in enumerate(results):
        if res is None:
            failed.append(i)
            masks.append(np.zeros(n))
            relaxed.append(np.zeros(n))
            traces.append([])
        else:
            masks.append(res.mask.values)
            relaxed.append(res.relaxed_mask.values)
            traces.append(res.objective_trace)
    return ExtractResult(reassemble(grid, masks), reassemble(grid, relaxed), traces, failed)
