import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from scpseudo.enumerator.alphabet import check_factor
from scpseudo.enumerator.inner import inner_entropy_max, ipf_batch, marginals_feasible
from scpseudo.enumerator.kernel import check_kernel
from scpseudo.enumerator.objective import TypeAssignment, entropy_bits, objective_F, protograph_model
from scpseudo.protograph import EdgeSpreading, tailbiting_base

C36 = EdgeSpreading(([[1, 2]], [[2, 1]]))
MODES = ("pseudocodeword", "codeword")


@pytest.mark.parametrize("counting", MODES)
@pytest.mark.parametrize("m", [1, 2, 3])
def test_kernel_dense_equals_factor(m, counting):
    K = check_kernel(m, counting)
    for d in range(1, 7):
        np.testing.assert_array_equal(K.dense(d), check_factor(d, m, counting))


@pytest.mark.parametrize("counting", MODES)
@pytest.mark.parametrize("m, d", [(1, 4), (2, 3), (2, 5), (3, 4)])
def test_kernel_leave_one_out_and_partition(m, d, counting):
    rng = np.random.default_rng(m * 10 + d)
    logphi = rng.normal(size=(3, d, m + 1))
    K = check_kernel(m, counting)
    out, logZ = K.leave_one_out(logphi)
    f = check_factor(d, m, counting)
    for s in range(3):
        w = f.copy()
        for e in range(d):
            shape = [1] * d
            shape[e] = m + 1
            w = w * np.exp(logphi[s, e]).reshape(shape)
        np.testing.assert_allclose(logZ[s], np.log(w.sum()), rtol=1e-12)
        for e in range(d):
            axes = tuple(i for i in range(d) if i != e)
            marg = w.sum(axis=axes) / np.exp(logphi[s, e])
            np.testing.assert_allclose(out[s, e], np.log(marg), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("counting", MODES)
def test_kernel_ipf_matches_dense(counting):
    m, d = 2, 4
    rng = np.random.default_rng(5)
    taus = rng.dirichlet(np.ones(m + 1), size=(4, d))
    K = check_kernel(m, counting)
    vals, _, residual, _ = K.ipf(taus, tol=1e-12, max_iter=5000)
    f = check_factor(d, m, counting)
    for s in range(4):
        sol = inner_entropy_max(f, list(taus[s]), tol=1e-12, max_iter=5000)
        assert sol.feasible == marginals_feasible(f, list(taus[s]))
        if sol.feasible:
            assert abs(vals[s] - sol.value) < 1e-8
        else:
            assert not residual[s] < 1e-12


def test_dense_ipf_batch_agrees_with_single():
    f = check_factor(3, 2, "codeword")
    rng = np.random.default_rng(9)
    taus = [rng.dirichlet([4.0, 1.0, 1.0], size=8) for _ in range(3)]
    vals, _, _, residual, _, _ = ipf_batch(f, taus, tol=1e-12, max_iter=5000)
    checked = 0
    for s in range(8):
        sol = inner_entropy_max(f, [t[s] for t in taus], tol=1e-12, max_iter=5000)
        if sol.feasible:
            checked += 1
            assert abs(vals[s] - sol.value) < 1e-9
        else:
            assert not marginals_feasible(f, [t[s] for t in taus])
    assert checked >= 3


def test_type_assignment_validation():
    with pytest.raises(ValueError):
        TypeAssignment([[0.5, 0.6, 0.0]])
    with pytest.raises(ValueError):
        TypeAssignment([[1.2, -0.2]])
    z = TypeAssignment.zero(3, 2)
    assert z.m == 2 and z.delta == 0.0


def test_zero_type_has_zero_exponent():
    B = tailbiting_base(C36, 3)
    for m in (1, 2, 3):
        val = objective_F(B, m, TypeAssignment.zero(B.b_v, m))
        assert val.feasible and abs(val.value) < 1e-12


def test_m1_block_matches_classical_formula():
    # [3 3] at m=1: closed form of the regular (3,6) weight enumerator exponent
    B = [[3, 3]]
    for a in (0.05, 0.2, 0.4):
        tau = np.array([[1 - a, a], [1 - a, a]])
        val = objective_F(B, 1, tau)
        A = check_factor(6, 1, "codeword")
        sol = inner_entropy_max(A, [tau[0]] * 6, tol=1e-13)
        expected = sol.value + 2 * (1 - 3) * entropy_bits(tau[0])
        assert abs(val.value - expected) < 1e-8


def _interior_points(rng, b_v, K, n):
    return rng.dirichlet(np.full(K, 2.0), size=(n, b_v)) * 0.9 + 0.1 / K


def test_gradient_matches_finite_differences():
    B = tailbiting_base(C36, 4)
    model = protograph_model(B, 2)
    rng = np.random.default_rng(2024)
    h = 1e-5
    for tau in _interior_points(rng, model.b_v, model.K, 20):
        res = objective_F(B, 2, tau, tol=1e-13)
        v = rng.normal(size=tau.shape)
        v -= v.mean(axis=1, keepdims=True)
        plus = objective_F(B, 2, tau + h * v, tol=1e-13)
        minus = objective_F(B, 2, tau - h * v, tol=1e-13)
        if not (res.feasible and plus.feasible and minus.feasible):
            continue
        fd = (plus.value - minus.value) / (2 * h)
        an = float((res.gradient * v).sum())
        assert abs(an - fd) <= 1e-5 * max(1.0, abs(fd))


@given(st.integers(0, 10_000))
def test_feasibility_agrees_with_lp(seed):
    rng = np.random.default_rng(seed)
    B = np.array([[1, 2], [2, 1]])
    tau = rng.dirichlet(np.ones(3), size=2)
    val = objective_F(B, 2, tau)
    expected = all(
        marginals_feasible(check_factor(int(row.sum()), 2), [tau[y] for y in range(2) for _ in range(row[y])])
        for row in B
    )
    assert val.feasible == expected
    if val.feasible:
        assert np.isfinite(val.value)


def test_infeasible_type_reported():
    # a single degree-1 check forces the attached variable to weight 0
    val = objective_F([[1, 1], [1, 0]], 1, [[0.5, 0.5], [0.5, 0.5]])
    assert not val.feasible and val.value is None


def test_batch_evaluate_matches_single():
    B = tailbiting_base(C36, 2)
    model = protograph_model(B, 3)
    rng = np.random.default_rng(1)
    taus = rng.dirichlet(np.ones(4), size=(5, model.b_v))
    vals, feas, _ = model.evaluate(taus, tol=1e-12)
    for s in range(5):
        assert abs(vals[s] - objective_F(B, 3, taus[s], tol=1e-12).value) < 1e-8


def test_repetition_cloud_is_zero():
    # B = [2], m = 1: every even pair sequence is a codeword, so the exponent vanishes
    val = objective_F([[2]], 1, [[0.5, 0.5]])
    assert abs(val.value) < 1e-9
