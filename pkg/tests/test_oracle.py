import numpy as np
import pytest

from maskdecomp.basis import Subspace, SubspaceKind, make_dct_subspace, make_hadamard_subspace
from maskdecomp.oracle import OracleSizeError, exhaustive_solve, mask_objective, sparse_fit
from maskdecomp.solver import SolverConfig, solve_block


def test_pure_background_is_global_optimum():
    P1, P2 = make_dct_subspace(3, 2), make_dct_subspace(3, 3)
    f = P1.basis[:, 0]
    res = exhaustive_solve(f, P1, P2, 1, 1, 0.5)
    assert res.best_objective == pytest.approx(0.0, abs=1e-24)
    np.testing.assert_array_equal(res.best_mask.values, 0)
    assert res.evaluated == 2**9 and res.exact


def test_two_by_two_manual_enumeration():
    # one atom per component; fit on a pixel subset S has residual
    # ||y_S||^2 - (a_S . y_S)^2 / ||a_S||^2
    P1 = make_hadamard_subspace(2, 1)                       # constant 1/2
    P2 = Subspace(np.array([[1.0], [0], [0], [0]]), 2, SubspaceKind.CUSTOM)
    f = np.array([0.9, 0.4, 0.4, 0.4])
    lam = 0.01
    expected = {}
    for code in range(16):
        on = [(code >> i) & 1 for i in range(4)]
        cost = lam * sum(on)
        for atom, sel in ((P1.basis[:, 0], [i for i in range(4) if not on[i]]),
                          (P2.basis[:, 0], [i for i in range(4) if on[i]])):
            y = f[sel]
            a = atom[sel]
            fit = (a @ y) ** 2 / (a @ a) if a @ a > 0 else 0.0
            cost += 0.5 * (y @ y - fit)
        expected[code] = cost
    best_code = min(expected, key=lambda c: (expected[c], c))
    assert best_code == 1                                   # pixel 0 is foreground
    res = exhaustive_solve(f, P1, P2, 1, 1, lam)
    np.testing.assert_array_equal(res.best_mask.values, [1, 0, 0, 0])
    assert res.best_objective == pytest.approx(expected[best_code], abs=1e-12)
    assert res.best_objective == pytest.approx(0.01, abs=1e-12)


def test_oracle_lower_bounds_relaxed_solver(make_random_subspace, rng):
    P1, P2 = make_random_subspace(3, 2), make_random_subspace(3, 2)
    f = rng.random(9)
    res = exhaustive_solve(f, P1, P2, 2, 2, 0.1)
    sol = solve_block(f, P1, P2, SolverConfig(lam=0.1, k1=2, k2=2, intensity_scale=1.0))
    assert res.best_objective <= mask_objective(f, P1, P2, sol.mask, 2, 2, 0.1)[0] + 1e-12
    # and no mask beats the reported optimum
    for code in range(0, 512, 37):
        mask = (code >> np.arange(9)) & 1
        assert mask_objective(f, P1, P2, mask, 2, 2, 0.1)[0] >= res.best_objective - 1e-12


def test_monotone_in_lambda(make_random_subspace, rng):
    P1, P2 = make_random_subspace(3, 2), make_random_subspace(3, 1)
    f = rng.random(9)
    objs = [exhaustive_solve(f, P1, P2, 1, 1, lam).best_objective for lam in (0.0, 0.01, 0.1, 1.0)]
    assert objs == sorted(objs)


def test_zero_lambda_exact_fit(make_random_subspace, rng):
    P1, P2 = make_random_subspace(2, 2), make_random_subspace(2, 2)
    w = np.array([1.0, 0, 0, 1])
    f = (1 - w) * P1.synthesize(rng.standard_normal(2)) + w * P2.synthesize(rng.standard_normal(2))
    assert exhaustive_solve(f, P1, P2, 2, 2, 0.0).best_objective == pytest.approx(0.0, abs=1e-20)


def test_refuses_large_blocks():
    P = make_dct_subspace(5, 2)
    with pytest.raises(OracleSizeError):
        exhaustive_solve(np.zeros(25), P, P, 1, 1, 0.1)


def test_sparse_fit_exhaustive_vs_greedy(rng):
    A = rng.standard_normal((12, 4))
    y = A[:, [1, 3]] @ np.array([2.0, -1.0])
    res, x, exact = sparse_fit(A, y, 2)
    assert exact and res == pytest.approx(0.0, abs=1e-20)
    np.testing.assert_allclose(x, [0, 2, 0, -1], atol=1e-12)
    B = rng.standard_normal((12, 12))
    _, xg, exact = sparse_fit(B, B[:, [0, 5, 7]] @ np.ones(3), 3)     # C(12,3) = 220 > 100
    assert not exact and np.count_nonzero(xg) <= 3
