"""Exhaustive solver for the binary-mask, l0-penalized problem on tiny blocks.

With a binary mask the data term splits into a background fit on the
zero-support and a foreground fit on the one-support, so each mask is
scored by two independent sparse least-squares problems.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from maskdecomp.basis import Subspace
from maskdecomp.solver import MaskVector

MAX_PIXELS = 16
MAX_EXHAUSTIVE_SUPPORTS = 100


class OracleSizeError(ValueError):
    """Refusal to enumerate ``2**n`` masks for large ``n``."""


@dataclass(frozen=True)
class OracleResult:
    best_mask: MaskVector
    best_objective: float
    evaluated: int
    exact: bool
    alpha1: np.ndarray
    alpha2: np.ndarray


def _lsq_residual(A: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    if A.shape[0] == 0:
        return 0.0, np.zeros(A.shape[1])
    x = np.linalg.lstsq(A, y, rcond=None)[0]
    r = y - A @ x
    return float(r @ r), x


def sparse_fit(A: np.ndarray, y: np.ndarray, k: int) -> tuple[float, np.ndarray, bool]:
    """Minimize ``||y - A x||^2`` over ``||x||_0 <= k``.

    Exhaustive over size-``k`` supports when there are at most
    ``MAX_EXHAUSTIVE_SUPPORTS`` of them, greedy orthogonal matching pursuit
    otherwise. Returns ``(residual, x, exact)``.
    """
    m = A.shape[1]
    k = min(k, m)
    x_full = np.zeros(m)
    if comb(m, k) <= MAX_EXHAUSTIVE_SUPPORTS:
        best = (np.inf, None)
        for support in combinations(range(m), k):
            res, x = _lsq_residual(A[:, support], y)
            if res < best[0]:
                best = (res, (support, x))
        support, x = best[1]
        x_full[list(support)] = x
        return best[0], x_full, True

    support: list[int] = []
    resid = y.copy()
    res = float(y @ y)
    for _ in range(k):
        scores = np.abs(A.T @ resid)
        scores[support] = -np.inf
        support.append(int(np.argmax(scores)))
        res, x = _lsq_residual(A[:, support], y)
        resid = y - A[:, support] @ x
    if support:
        x_full[support] = x
    return res, x_full, False


def mask_objective(f, P1: Subspace, P2: Subspace, mask, k1: int, k2: int, lam: float):
    """Best objective attainable with a fixed binary mask (l0 penalty on the mask).

    Returns ``(objective, alpha1, alpha2, exact)``.
    """
    f = np.asarray(f, dtype=np.float64)
    on = np.asarray(getattr(mask, "values", mask)) > 0.5
    r1, a1, e1 = sparse_fit(P1.basis[~on], f[~on], k1)
    r2, a2, e2 = sparse_fit(P2.basis[on], f[on], k2)
    return 0.5 * (r1 + r2) + lam * int(on.sum()), a1, a2, e1 and e2


def exhaustive_solve(f, P1: Subspace, P2: Subspace, k1: int, k2: int, lam: float) -> OracleResult:
    f = np.asarray(f, dtype=np.float64)
    n = f.shape[0]
    if n > MAX_PIXELS:
        raise OracleSizeError(f"refusing to enumerate 2**{n} masks (limit n <= {MAX_PIXELS})")
    if not (n == P1.n == P2.n):
        raise ValueError("dimension mismatch between f and bases")

    bits = 1 << np.arange(n)
    best_obj, best_code, best_alphas, exact = np.inf, 0, None, True
    for code in range(1 << n):
        mask = (code & bits) != 0
        obj, a1, a2, ex = mask_objective(f, P1, P2, mask, k1, k2, lam)
        exact &= ex
        if obj < best_obj:
            best_obj, best_code, best_alphas = obj, code, (a1, a2)

    best_mask = ((best_code & bits) != 0).astype(np.float64)
    return OracleResult(
        best_mask=MaskVector(best_mask, binary=True),
        best_objective=float(best_obj),
        evaluated=1 << n,
        exact=exact,
        alpha1=best_alphas[0],
        alpha2=best_alphas[1],
    )
