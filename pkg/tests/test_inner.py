import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize, minimize_scalar

from scpseudo.enumerator.alphabet import check_enumerator
from scpseudo.enumerator.inner import inner_entropy_max, kkt_residual, marginals_feasible


def objective(rho, A):
    rho = np.clip(rho, 0, None)
    nz = rho > 0
    return float(-(rho[nz] * np.log2(rho[nz])).sum() + (rho[nz] * np.log2(A[nz])).sum())


def grid_oracle_2x2(A, r, c):
    # rho = [[t, r0 - t], [c0 - t, c1 - r0 + t]]
    lo = max(0.0, r[0] - c[1])
    hi = min(r[0], c[0])

    def f(t):
        return -objective(np.array([t, r[0] - t, c[0] - t, c[1] - r[0] + t]), A.ravel())

    grid = np.linspace(lo, hi, 2001)
    k = int(np.argmin([f(t) for t in grid]))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-13})
    return -min(res.fun, f(grid[k]))


def grid_oracle_2x3(A, r, c):
    def rho_of(x):
        a, b = x
        return np.array([a, b, r[0] - a - b, c[0] - a, c[1] - b, c[2] - r[0] + a + b])

    def f(x):
        rho = rho_of(x)
        if (rho < -1e-15).any():
            return 1e3 + float(-rho[rho < 0].sum())
        return -objective(rho, A.ravel())

    best = None
    for a in np.linspace(0, min(r[0], c[0]), 81):
        for b in np.linspace(0, min(r[0], c[1]), 81):
            val = f((a, b))
            if best is None or val < best[0]:
                best = (val, (a, b))
    res = minimize(f, best[1], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000})
    return -min(res.fun, best[0])


def random_case(rng, shape):
    A = rng.uniform(0.2, 5.0, size=shape)
    p = rng.dirichlet(np.ones(shape[0]))
    q = rng.dirichlet(np.ones(shape[1]))
    return A, p, q


@pytest.mark.parametrize("seed", range(12))
def test_ipf_matches_grid_oracle_2x2(seed):
    A, r, c = random_case(np.random.default_rng(seed), (2, 2))
    sol = inner_entropy_max(A, [r, c])
    assert sol.feasible and sol.converged
    assert abs(sol.value - grid_oracle_2x2(A, r, c)) < 1e-6
    assert kkt_residual(A, sol.rho) < 1e-6


@pytest.mark.parametrize("seed", range(10))
def test_ipf_matches_grid_oracle_2x3(seed):
    A, r, c = random_case(np.random.default_rng(100 + seed), (2, 3))
    sol = inner_entropy_max(A, [r, c])
    assert sol.feasible
    assert abs(sol.value - grid_oracle_2x3(A, r, c)) < 1e-6
    assert kkt_residual(A, sol.rho) < 1e-6


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_single_parity_check_m1(a, b, c):
    # the even-weight support of a degree-3 check pins rho down completely
    A = check_enumerator(3, 1).table.astype(float)
    s = a + b + c
    if not (s <= 2 and a <= b + c and b <= a + c and c <= a + b):
        sol = inner_entropy_max(A, [[1 - a, a], [1 - b, b], [1 - c, c]])
        assert not sol.feasible and sol.value is None
        return
    rho = {(0, 0, 0): 1 - s / 2, (0, 1, 1): (b + c - a) / 2, (1, 0, 1): (a + c - b) / 2, (1, 1, 0): (a + b - c) / 2}
    p = np.array([v for v in rho.values() if v > 0])
    expected = float(-(p * np.log2(p)).sum())
    sol = inner_entropy_max(A, [[1 - a, a], [1 - b, b], [1 - c, c]])
    assert sol.feasible
    assert abs(sol.value - expected) < 1e-6


def test_marginals_respected():
    rng = np.random.default_rng(3)
    A = rng.uniform(0.5, 2.0, size=(3, 3, 3))
    margs = [rng.dirichlet(np.ones(3)) for _ in range(3)]
    sol = inner_entropy_max(A, margs)
    for e in range(3):
        axes = tuple(i for i in range(3) if i != e)
        np.testing.assert_allclose(sol.rho.sum(axis=axes), margs[e], atol=1e-9)
    assert kkt_residual(A, sol.rho) < 1e-6


def test_all_ones_is_sum_of_entropies():
    t = [np.array([0.2, 0.8]), np.array([0.5, 0.3, 0.2])]
    sol = inner_entropy_max(np.ones((2, 3)), t)
    expected = sum(-(p * np.log2(p)).sum() for p in t)
    assert abs(sol.value - expected) < 1e-9


def test_infeasible_marginals():
    sol = inner_entropy_max(np.eye(2), [[0.3, 0.7], [0.6, 0.4]])
    assert not sol.feasible and sol.value is None and sol.rho is None
    assert marginals_feasible(np.eye(2), [[0.3, 0.7], [0.3, 0.7]])
    assert not marginals_feasible(np.eye(2), [[0.3, 0.7], [0.6, 0.4]])


def test_bad_marginals_rejected():
    with pytest.raises(ValueError):
        inner_entropy_max(np.ones((2, 2)), [[0.5, 0.5]])
    with pytest.raises(ValueError):
        inner_entropy_max(np.ones((2, 2)), [[0.5, 0.6], [0.5, 0.5]])
