"""Maximum-entropy joint types with fixed marginals (multi-marginal IPF).

For a nonnegative tensor ``A`` and socket marginals ``tau_1..tau_d`` the
check-cloud exponent is

    a = max_rho  H(rho) + sum_w rho(w) log2 A(w)

over distributions ``rho`` supported on ``A > 0`` with the given marginals.
The maximiser has the form ``rho(w) ∝ A(w) prod_i phi_i(w_i)``; iterative
proportional fitting finds the scalings ``phi_i`` by rescaling one axis at a
time.  All values are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

__all__ = ["InnerSolution", "inner_entropy_max", "ipf_batch", "kkt_residual", "marginals_feasible"]

LN2 = np.log(2.0)
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class InnerSolution:
    """Result of one inner solve; ``value`` is ``None`` exactly when infeasible."""

    feasible: bool
    value: float | None
    rho: np.ndarray | None
    scalings: tuple[np.ndarray, ...] | None
    residual: float
    iterations: int
    converged: bool


def _other_axes(d: int, e: int) -> tuple[int, ...]:
    return tuple(1 + i for i in range(d) if i != e)


def _expand(vec: np.ndarray, d: int, e: int) -> np.ndarray:
    shape = [vec.shape[0]] + [1] * d
    shape[1 + e] = vec.shape[1]
    return vec.reshape(shape)


def marginals_feasible(A: np.ndarray, marginals) -> bool:
    """Exact feasibility test by linear programming on the support of ``A``."""
    A = np.asarray(A)
    d = A.ndim
    supp = np.argwhere(A > 0)
    if supp.size == 0:
        return False
    rows, rhs = [], []
    for e in range(d):
        for w in range(A.shape[e]):
            rows.append((supp[:, e] == w).astype(float))
            rhs.append(float(marginals[e][w]))
    res = linprog(
        np.zeros(len(supp)),
        A_eq=np.array(rows),
        b_eq=np.array(rhs),
        bounds=(0, None),
        method="highs",
    )
    return res.status == 0


def ipf_batch(f, taus, log_scalings=None, tol: float = DEFAULT_TOL, max_iter: int = 20000):
    """Batched IPF for one shared tensor ``f`` and ``n`` marginal sets.

    Parameters
    ----------
    f : ndarray, shape (K_1, ..., K_d)
        Nonnegative factor.
    taus : sequence of d arrays, each (n, K_e)
        Target marginals per socket.
    log_scalings : optional sequence of d arrays (n, K_e)
        Warm start (natural log of ``phi``).

    Returns
    -------
    values, thetas, rho, residual, iterations, structurally_ok
        ``values`` (n,) are in bits and computed in the dual form
        ``log2 Z - sum_e <tau_e, log2 phi_e>``; ``thetas`` are natural-log scalings.
    """
    f = np.asarray(f, dtype=float)
    d = f.ndim
    taus = [np.asarray(t, dtype=float) for t in taus]
    n = taus[0].shape[0]
    reach = [f.sum(axis=tuple(i for i in range(d) if i != e)) > 0 for e in range(d)]
    structurally_ok = np.ones(n, dtype=bool)
    for e in range(d):
        structurally_ok &= ~((taus[e] > 0) & ~reach[e][None, :]).any(axis=1)

    thetas = []
    for e in range(d):
        th = np.zeros_like(taus[e]) if log_scalings is None else np.array(log_scalings[e], dtype=float)
        th = np.where(taus[e] > 0, th, -np.inf)
        th = th - np.max(np.where(np.isfinite(th), th, -np.inf), axis=1, keepdims=True)
        thetas.append(th)

    def build():
        rho = np.broadcast_to(f, (n,) + f.shape).copy()
        for e in range(d):
            rho *= _expand(np.exp(thetas[e]), d, e)
        return rho

    rho = build()
    residual = np.full(n, np.inf)
    it = 0
    active = structurally_ok.copy()
    dead = np.zeros(n, dtype=bool)
    for it in range(1, max_iter + 1):
        res = np.zeros(n)
        for e in range(d):
            tot = rho.sum(axis=tuple(range(1, d + 1)))
            marg = rho.sum(axis=_other_axes(d, e))
            with np.errstate(divide="ignore", invalid="ignore"):
                marg = marg / tot[:, None]
                res = np.maximum(res, 0.5 * np.abs(marg - taus[e]).sum(axis=1))
                step = np.where(taus[e] > 0, np.log(taus[e]) - np.log(marg), 0.0)
            step = np.where(np.isfinite(step), step, 0.0)
            step[~active] = 0.0
            thetas[e] = thetas[e] + step
            shift = np.max(np.where(np.isfinite(thetas[e]), thetas[e], -np.inf), axis=1, keepdims=True)
            shift = np.where(np.isfinite(shift), shift, 0.0)
            thetas[e] = thetas[e] - shift
            rho *= _expand(np.exp(step - shift), d, e)
        # a row whose scalings underflowed to an all-zero tensor cannot recover
        dead |= np.isnan(res)
        residual = np.where(structurally_ok & ~dead, res, np.inf)
        active = structurally_ok & ~dead & (residual >= tol)
        if not active.any():
            break
        if it % 50 == 0:
            rho = build()
    rho = build()
    values = _dual_values(f, thetas, taus)
    return values, thetas, rho, residual, it, structurally_ok


def _dual_values(f, thetas, taus) -> np.ndarray:
    d = f.ndim
    n = taus[0].shape[0]
    shifts = [np.max(np.where(np.isfinite(t), t, -np.inf), axis=1) for t in thetas]
    shifts = [np.where(np.isfinite(s), s, 0.0) for s in shifts]
    rho = np.broadcast_to(f, (n,) + f.shape).copy()
    for e in range(d):
        rho *= _expand(np.exp(thetas[e] - shifts[e][:, None]), d, e)
    Z = rho.sum(axis=tuple(range(1, d + 1)))
    with np.errstate(divide="ignore"):
        logZ = np.log(Z) + sum(shifts)
    lin = np.zeros(n)
    for e in range(d):
        lin += np.where(taus[e] > 0, taus[e] * np.where(np.isfinite(thetas[e]), thetas[e], 0.0), 0.0).sum(axis=1)
    return (logZ - lin) / LN2


def kkt_residual(A, rho) -> float:
    """Max deviation of ``log(rho / A)`` from an additively separable function on the support.

    Zero exactly when ``rho ∝ A prod_i phi_i(w_i)``; computed by least squares,
    independently of the scalings the solver used.
    """
    A = np.asarray(A, dtype=float)
    rho = np.asarray(rho, dtype=float)
    supp = np.argwhere((A > 0) & (rho > 0))
    target = np.log(rho[tuple(supp.T)] / A[tuple(supp.T)])
    cols = [np.ones(len(supp))]
    for e in range(A.ndim):
        for w in range(1, A.shape[e]):
            cols.append((supp[:, e] == w).astype(float))
    X = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(X, target, rcond=None)
    return float(np.abs(X @ coef - target).max())


def inner_entropy_max(A, marginals, tol: float = DEFAULT_TOL, max_iter: int = 200000) -> InnerSolution:
    """Maximum of ``H(rho) + <rho, log2 A>`` over ``rho`` with the given marginals.

    Infeasible marginals (no tensor on the support of ``A`` has them) give
    ``feasible=False`` and ``value=None``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != len(marginals):
        raise ValueError(f"tensor has {A.ndim} axes but {len(marginals)} marginals were given")
    taus = []
    for e, t in enumerate(marginals):
        t = np.asarray(t, dtype=float)
        if t.shape != (A.shape[e],):
            raise ValueError(f"marginal {e} has shape {t.shape}, expected ({A.shape[e]},)")
        if (t < 0).any() or abs(t.sum() - 1.0) > 1e-9:
            raise ValueError(f"marginal {e} is not a probability vector")
        taus.append(t[None, :])
    values, thetas, rho, residual, it, ok = ipf_batch(A, taus, tol=tol, max_iter=max_iter)
    converged = bool(residual[0] < tol)
    if not ok[0] or (not converged and not marginals_feasible(A, marginals)):
        return InnerSolution(False, None, None, None, float(residual[0]), it, False)
    rho = rho[0] / rho[0].sum()
    scalings = tuple(np.exp(th[0]) for th in thetas)
    return InnerSolution(True, float(values[0]), rho, scalings, float(residual[0]), it, converged)
