"""Method-of-types exponent F(tau) of a protograph ensemble in a degree-m cover.

With per-variable weight types ``tau_v`` over ``{0..m}``,

    F(tau) = sum_c a_c + sum_v (1 - q_v) [H(tau_v) + <tau_v, log2 mult>]

where ``a_c`` is the check-cloud exponent returned by the inner solver and
``q_v`` is the degree of variable ``v``.  The number of configurations whose
types are close to ``tau`` grows like ``2^(N F(tau))`` in the lift size N.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..protograph import BaseMatrix, TannerGraph, _as_base
from .alphabet import check_factor, variable_log_multiplicity
from .inner import DEFAULT_TOL, LN2, marginals_feasible
from .kernel import CheckKernel, check_kernel

__all__ = ["CheckGroup", "ObjectiveValue", "ProtographModel", "TypeAssignment", "objective_F", "protograph_model"]

SIMPLEX_TOL = 1e-12
DENSE_LP_MAX_DEGREE = 8


def entropy_bits(p: np.ndarray, axis: int = -1) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=axis)


@dataclass(frozen=True)
class TypeAssignment:
    """One weight distribution per protograph variable node; ``tau`` has shape (b_v, m+1)."""

    tau: np.ndarray

    def __post_init__(self):
        tau = np.array(self.tau, dtype=float)
        if tau.ndim != 2 or tau.shape[1] < 2:
            raise ValueError(f"tau must have shape (b_v, m+1), got {tau.shape}")
        if (tau < -SIMPLEX_TOL).any():
            raise ValueError("tau has negative entries")
        if np.abs(tau.sum(axis=1) - 1.0).max() > SIMPLEX_TOL * tau.shape[1] * 10:
            raise ValueError("rows of tau must sum to one")
        tau = np.clip(tau, 0.0, None)
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)

    @property
    def m(self) -> int:
        return self.tau.shape[1] - 1

    @property
    def delta(self) -> float:
        return float(np.mean(1.0 - self.tau[:, 0]))

    @classmethod
    def zero(cls, b_v: int, m: int) -> "TypeAssignment":
        tau = np.zeros((b_v, m + 1))
        tau[:, 0] = 1.0
        return cls(tau)


@dataclass(frozen=True)
class CheckGroup:
    """All checks of one degree; ``sockets[i, s]`` is the edge id in socket s of check ``checks[i]``."""

    degree: int
    checks: np.ndarray
    sockets: np.ndarray
    kernel: CheckKernel


@dataclass(frozen=True)
class ObjectiveValue:
    feasible: bool
    value: float | None
    gradient: np.ndarray | None


class ProtographModel:
    """Index structures shared by the objective and the message-passing solver."""

    def __init__(self, B, m: int, counting: str = "pseudocodeword"):
        self.base: BaseMatrix = _as_base(B)
        self.m = m
        self.K = m + 1
        self.counting = counting
        G = TannerGraph.from_base(self.base)
        edges = np.array(G.edges, dtype=np.int64).reshape(-1, 2)
        self.edge_check = edges[:, 0]
        self.edge_var = edges[:, 1]
        self.n_edges = len(edges)
        self.b_v = self.base.b_v
        self.q = self.base.var_degrees.astype(float)
        self.log_mult = variable_log_multiplicity(m, counting)  # bits

        by_check: dict[int, list[int]] = {}
        for e, c in enumerate(self.edge_check):
            by_check.setdefault(int(c), []).append(e)
        by_degree: dict[int, list[tuple[int, list[int]]]] = {}
        for c, socks in sorted(by_check.items()):
            by_degree.setdefault(len(socks), []).append((c, socks))
        self.groups: list[CheckGroup] = []
        for d, items in sorted(by_degree.items()):
            self.groups.append(
                CheckGroup(
                    degree=d,
                    checks=np.array([c for c, _ in items]),
                    sockets=np.array([s for _, s in items], dtype=np.int64),
                    kernel=check_kernel(m, counting),
                )
            )
        self.incidence = np.zeros((self.b_v, self.n_edges))
        self.incidence[self.edge_var, np.arange(self.n_edges)] = 1.0

    def check_values(self, tau: np.ndarray, warm=None, tol: float = DEFAULT_TOL, max_iter: int = 5000,
                     decide_unconverged: bool = True):
        """Solve all check clouds for a batch of type assignments.

        ``tau`` has shape (S, b_v, K).  ``warm`` optionally maps group index to
        natural-log scalings of shape (S, n, d, K).  Returns per-start check
        totals in bits, per-group scalings, feasibility and worst residual.
        """
        S = tau.shape[0]
        total = np.zeros(S)
        feasible = np.ones(S, dtype=bool)
        scalings = []
        worst = 0.0
        for g_idx, g in enumerate(self.groups):
            n, d = g.sockets.shape
            taus = tau[:, self.edge_var[g.sockets], :].reshape(S * n, d, self.K)
            init = None
            if warm is not None and warm.get(g_idx) is not None:
                init = warm[g_idx].reshape(S * n, d, self.K)
            values, thetas, residual, _ = g.kernel.ipf(taus, init, tol=tol, max_iter=max_iter)
            ok = residual < tol
            for i in np.flatnonzero(~ok) if decide_unconverged else ():
                # slow convergence happens on faces of the simplex; decide exactly
                if d <= DENSE_LP_MAX_DEGREE:
                    ok[i] = marginals_feasible(check_factor(d, self.m, self.counting), taus[i])
            feasible &= ok.reshape(S, n).all(axis=1)
            total += np.where(ok, values, 0.0).reshape(S, n).sum(axis=1)
            scalings.append(thetas.reshape(S, n, d, self.K))
            if ok.any():
                worst = max(worst, float(residual[ok].max()))
        return total, scalings, feasible, worst

    def variable_terms(self, tau: np.ndarray) -> np.ndarray:
        lin = (tau * self.log_mult).sum(axis=-1)
        return ((1.0 - self.q) * (entropy_bits(tau) + lin)).sum(axis=-1)

    def evaluate(self, tau: np.ndarray, warm=None, gradient: bool = False, tol: float = DEFAULT_TOL,
                 max_iter: int = 5000, decide_unconverged: bool = True):
        """Batched F values (bits); optionally the tangent-projected gradient.

        With ``decide_unconverged=False`` a check whose IPF has not converged
        within ``max_iter`` sweeps marks its start infeasible instead of being
        settled by linear programming (used for cheap intermediate checks).
        """
        tau = np.asarray(tau, dtype=float)
        checks, scalings, feasible, _ = self.check_values(tau, warm, tol, max_iter, decide_unconverged)
        values = checks + self.variable_terms(tau)
        if not gradient:
            return values, feasible, scalings
        S = tau.shape[0]
        grad = np.zeros_like(tau)
        for g, th in zip(self.groups, scalings):
            th = np.where(np.isfinite(th), th, 0.0)
            flat = th.reshape(S, -1, self.K)
            edges = g.sockets.reshape(-1)
            np.add.at(grad, (slice(None), self.edge_var[edges]), -flat / LN2)
        with np.errstate(divide="ignore", invalid="ignore"):
            dH = -np.log2(tau) - 1.0 / LN2
            grad += (1.0 - self.q)[None, :, None] * (dH + self.log_mult)
            grad -= grad.mean(axis=-1, keepdims=True)
        return values, feasible, scalings, grad


@lru_cache(maxsize=64)
def _cached_model(key, m: int, counting: str) -> ProtographModel:
    return ProtographModel(BaseMatrix(np.array(key[1], dtype=np.int64).reshape(key[0])), m, counting)


def protograph_model(B, m: int, counting: str = "pseudocodeword") -> ProtographModel:
    base = _as_base(B)
    return _cached_model(base.key(), m, counting)


def objective_F(B, m: int, tau, counting: str = "pseudocodeword", tol: float = DEFAULT_TOL) -> ObjectiveValue:
    """F(tau) in bits per lift copy, with its gradient on the product of simplices.

    The gradient comes from the envelope theorem on each check exponent (the
    IPF scalings are its dual variables) and is defined at interior points.
    Infeasible marginals give ``ObjectiveValue(False, None, None)``.
    """
    model = protograph_model(B, m, counting)
    if not isinstance(tau, TypeAssignment):
        tau = TypeAssignment(tau)
    if tau.tau.shape != (model.b_v, model.K):
        raise ValueError(f"tau has shape {tau.tau.shape}, expected {(model.b_v, model.K)}")
    values, feasible, _, grad = model.evaluate(tau.tau[None], gradient=True, tol=tol)
    if not feasible[0]:
        return ObjectiveValue(False, None, None)
    g = grad[0]
    if (tau.tau <= 0).any():
        g = np.where(tau.tau > 0, g, np.nan)
    return ObjectiveValue(True, float(values[0]), g)
