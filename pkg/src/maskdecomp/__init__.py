"""Masked signal decomposition for text extraction from textured backgrounds."""

from maskdecomp.basis import (
    Subspace,
    SubspaceKind,
    load_custom_subspace,
    make_dct_subspace,
    make_hadamard_subspace,
)
from maskdecomp.evaluate import ConfusionCounts, Metrics, aggregate, confusion, metrics
from maskdecomp.linalg import NumericalError, masked_gram, solve_spd
from maskdecomp.solver import (
    BinarizeStrategy,
    Coefficients,
    MaskVector,
    SolveResult,
    SolverConfig,
    binarize,
    objective,
    soft_threshold,
    solve_block,
    update_alpha,
    update_mask,
)

__all__ = [
    "BinarizeStrategy",
    "Coefficients",
    "ConfusionCounts",
    "MaskVector",
    "Metrics",
    "NumericalError",
    "SolveResult",
    "SolverConfig",
    "Subspace",
    "SubspaceKind",
    "aggregate",
    "binarize",
    "confusion",
    "load_custom_subspace",
    "make_dct_subspace",
    "make_hadamard_subspace",
    "masked_gram",
    "metrics",
    "objective",
    "soft_threshold",
    "solve_block",
    "solve_spd",
    "update_alpha",
    "update_mask",
]

__version__ = "0.1.0"
