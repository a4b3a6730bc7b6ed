"""Dense kernels for the masked normal equations."""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve, lapack


class NumericalError(ArithmeticError):
    """A factorization failed; ``pivot`` is the 1-based failing column."""

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message)
        self.pivot = pivot


def masked_gram(P, weights: np.ndarray) -> np.ndarray:
    """Return ``P^T D^2 P`` with ``D = diag(weights)`` without forming ``D``.

    ``P`` may be a :class:`~maskdecomp.basis.Subspace` or a plain array.
    """
    P = np.asarray(getattr(P, "basis", P))
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1 or weights.shape[0] != P.shape[0]:
        raise ValueError(f"weights length {weights.shape} does not match {P.shape[0]} rows")
    if not np.all(np.isfinite(weights)):
        raise ValueError("weights must be finite")
    wp = weights[:, None] * P
    gram = wp.T @ wp
    # Symmetric bit-for-bit, not just to rounding.
    return np.triu(gram) + np.triu(gram, 1).T


def default_ridge(A: np.ndarray) -> float:
    """``1e-8 * trace(A) / m``, or 1.0 when the trace vanishes.

    A zero-trace PSD matrix is the zero matrix; any positive ridge then
    yields the minimum-norm solution ``x = b / ridge``.
    """
    m = A.shape[0]
    tr = float(np.trace(A))
    return 1e-8 * tr / m if tr > 0 else 1.0


def solve_spd(A: np.ndarray, b: np.ndarray, ridge: float | None = 0.0) -> np.ndarray:
    """Solve ``(A + ridge * I) x = b`` by Cholesky factorization.

    ``ridge=None`` selects :func:`default_ridge`. Raises
    :class:`NumericalError` carrying the pivot index when the shifted
    matrix is not positive definite.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if b.shape != (A.shape[0],):
        raise ValueError(f"b has shape {b.shape}, expected ({A.shape[0]},)")
    if ridge is None:
        ridge = default_ridge(A)
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    shifted = A + ridge * np.eye(A.shape[0])
    c, info = lapack.dpotrf(shifted, lower=False, clean=True)
    if info > 0:
        raise NumericalError(
            f"matrix not positive definite (leading minor {info})", pivot=int(info)
        )
    if info < 0:
        raise ValueError(f"illegal argument {-info} to dpotrf")
    return cho_solve((c, False), b)
