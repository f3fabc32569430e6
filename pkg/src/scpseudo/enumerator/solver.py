"""Outer maximisation of F over type assignments with a fixed pseudoweight fraction.

r(delta) = max { F(tau) : mean_v (1 - tau_v(0)) = delta } / b_v.

Stationary points of F restricted to the delta-hyperplane are fixed points of
sum-product message passing on the protograph with variable potentials
``mult(w)^(1 - q_v) x^[w != 0]``; the tilt ``x`` is re-solved at every
iteration so that each iterate satisfies the constraint exactly.  Each start
ends with an exact evaluation of F (IPF on every check, warm-started from the
messages), so the reported value never relies on message-passing convergence.
Projected gradient ascent is available as an independent second method.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from .inner import DEFAULT_TOL, LN2
from .objective import ProtographModel, protograph_model

__all__ = ["DEFAULT_SEED", "GrowthOptions", "GrowthPoint", "growth_rate_at_delta", "project_to_slice"]

DEFAULT_SEED = 20120701
TINY = 1e-300
TILT_BRACKET = 2000.0


@dataclass(frozen=True)
class GrowthOptions:
    starts: int = 32
    seed: int = DEFAULT_SEED
    method: str = "bp"
    counting: str = "pseudocodeword"
    damping: float = 0.5
    max_iter: int = 2000
    check_every: int = 20
    bp_tol: float = 1e-9
    value_tol: float = 1e-7
    probe_ipf_iter: int = 200
    ipf_tol: float = DEFAULT_TOL
    concentration: float = 0.5
    pgd_max_iter: int = 400

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.method not in ("bp", "pgd"):
            raise ValueError(f"method must be 'bp' or 'pgd', got {self.method!r}")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        for name in ("bp_tol", "ipf_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class GrowthPoint:
    """r(delta) in bits per code symbol; ``r`` is None exactly when infeasible."""

    delta: float
    feasible: bool
    r: float | None
    starts_used: int
    best_start: int | None = None
    tau: np.ndarray | None = field(default=None, repr=False)
    messages: np.ndarray | None = field(default=None, repr=False)


def _solve_tilt(a: np.ndarray, delta: float, lx: np.ndarray) -> np.ndarray:
    """Solve mean_v expit(lx + a_v) = delta for each row (safeguarded Newton)."""
    lo = np.full(a.shape[0], -TILT_BRACKET)
    hi = np.full(a.shape[0], TILT_BRACKET)
    x = np.clip(lx, lo, hi)
    for _ in range(200):
        p = expit(x[:, None] + a)
        g = p.mean(axis=1) - delta
        if np.abs(g).max() < 1e-15:
            break
        lo = np.where(g < 0, x, lo)
        hi = np.where(g > 0, x, hi)
        dg = (p * (1 - p)).mean(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            nx = x - g / dg
        bad = ~np.isfinite(nx) | (nx <= lo) | (nx >= hi)
        x = np.where(bad, 0.5 * (lo + hi), nx)
        if (hi - lo).max() < 1e-13:
            break
    return x


# scipy.special.logsumexp is ~3x slower on these small batched arrays
def _logsumexp(x: np.ndarray, axis: int = -1, keepdims: bool = False) -> np.ndarray:
    top = x.max(axis=axis, keepdims=True)
    out = top + np.log(np.exp(x - top).sum(axis=axis, keepdims=True))
    return out if keepdims else np.squeeze(out, axis=axis)


def _initial_messages(model: ProtographModel, opts: GrowthOptions, n: int) -> np.ndarray:
    out = np.empty((n, model.n_edges, model.K))
    for k in range(n):
        rng = np.random.default_rng([opts.seed, k])
        out[k] = rng.dirichlet(np.full(model.K, opts.concentration), size=model.n_edges)
    return out


def _beliefs(model, logmu, delta, lx):
    logpsi = ((1.0 - model.q)[:, None] * model.log_mult[None, :]) * LN2
    base = logpsi[None] + np.matmul(model.incidence, logmu)
    a = _logsumexp(base[..., 1:], axis=-1) - base[..., 0]
    lx = _solve_tilt(a, delta, lx)
    logtilt = np.zeros((logmu.shape[0], model.K))
    logtilt[:, 1:] = lx[:, None]
    full = base + logtilt[:, None, :]
    tau = np.exp(full - _logsumexp(full, axis=-1, keepdims=True))
    return full, tau, lx


def _bp_step(model: ProtographModel, mu, logmu, lx, delta: float, damping: float):
    S = mu.shape[0]
    full, _, lx = _beliefs(model, logmu, delta, lx)
    logphi = full[:, model.edge_var] - logmu
    new = np.empty_like(logmu)
    for g in model.groups:
        n, d = g.sockets.shape
        out, _ = g.kernel.leave_one_out(logphi[:, g.sockets].reshape(S * n, d, model.K))
        new[:, g.sockets] = out.reshape(S, n, d, model.K)
    new = np.exp(new - _logsumexp(new, axis=-1, keepdims=True))
    diff = np.abs(new - mu).max(axis=(1, 2))
    mu = damping * mu + (1.0 - damping) * new
    return mu, np.log(np.maximum(mu, TINY)), lx, diff


def _message_passing(model: ProtographModel, delta: float, mu0: np.ndarray, opts: GrowthOptions):
    """Run all starts; every ``check_every`` iterations evaluate F exactly.

    A start stops when its messages converge or its exact value stalls
    (changes by less than ``value_tol``); slow drift along nearly flat
    directions of F is common on tail-biting graphs.  The best exactly
    evaluated point of each start is returned.
    """
    S = mu0.shape[0]
    mu = mu0 / mu0.sum(axis=-1, keepdims=True)
    logmu = np.log(np.maximum(mu, TINY))
    lx = np.zeros(S)
    best_val = np.full(S, -np.inf)
    best_tau = np.zeros((S, model.b_v, model.K))
    best_mu = mu.copy()
    prev = np.full(S, np.inf)
    active = np.arange(S)
    it = 0
    while active.size and it < opts.max_iter:
        m_a, lm_a, lx_a = mu[active], logmu[active], lx[active]
        for _ in range(opts.check_every):
            m_a, lm_a, lx_a, diff = _bp_step(model, m_a, lm_a, lx_a, delta, opts.damping)
            it += 1
        full, tau_a, lx_a = _beliefs(model, lm_a, delta, lx_a)
        logphi = full[:, model.edge_var] - lm_a
        warm = {i: logphi[:, g.sockets] for i, g in enumerate(model.groups)}
        vals, feas, _ = model.evaluate(tau_a, warm=warm, tol=opts.ipf_tol, max_iter=opts.probe_ipf_iter,
                                       decide_unconverged=False)
        improved = feas & (vals > best_val[active])
        idx = active[improved]
        best_val[idx] = vals[improved]
        best_tau[idx] = tau_a[improved]
        best_mu[idx] = m_a[improved]
        stalled = feas & (np.abs(vals - prev[active]) < opts.value_tol * model.b_v)
        prev[active] = np.where(feas, vals, np.inf)
        mu[active], logmu[active], lx[active] = m_a, lm_a, lx_a
        active = active[~((diff < opts.bp_tol) | stalled)]
    never = np.flatnonzero(~np.isfinite(best_val))
    if never.size:
        # no cheap evaluation converged: settle the final iterate exactly
        full, tau_n, _ = _beliefs(model, logmu[never], delta, lx[never])
        logphi = full[:, model.edge_var] - logmu[never]
        warm = {i: logphi[:, g.sockets] for i, g in enumerate(model.groups)}
        vals, feas, _ = model.evaluate(tau_n, warm=warm, tol=opts.ipf_tol)
        best_val[never] = np.where(feas, vals, -np.inf)
        best_tau[never] = tau_n
        best_mu[never] = mu[never]
    return best_tau, best_val, np.isfinite(best_val), best_mu


def _project_simplex_rows(y: np.ndarray) -> np.ndarray:
    u = -np.sort(-y, axis=-1)
    css = np.cumsum(u, axis=-1) - 1.0
    k = np.arange(1, y.shape[-1] + 1)
    cond = u - css / k > 0
    r = cond.shape[-1] - 1 - np.argmax(cond[..., ::-1], axis=-1)
    theta = np.take_along_axis(css, r[..., None], axis=-1) / (r[..., None] + 1)
    return np.maximum(y - theta, 0.0)


def project_to_slice(y: np.ndarray, delta: float, floor: float = 0.0) -> np.ndarray:
    """Euclidean projection of (S, b_v, K) rows onto simplices with mean(1 - tau(0)) = delta.

    The multiplier of the affine constraint is found by bisection; the
    projected mass at symbol 0 is monotone in it.  ``floor`` keeps entries
    at least that large (the simplex is shrunk accordingly); the slice is
    empty unless ``(K - 1) * floor <= delta <= 1 - floor``.
    """
    y = np.asarray(y, dtype=float)
    K = y.shape[-1]
    scale = 1.0 - K * floor
    target = (1.0 - delta) * y.shape[-2]
    t0 = (target - y.shape[-2] * floor) / scale
    lo = np.full(y.shape[0], -1e3)
    hi = np.full(y.shape[0], 1e3)
    e0 = np.zeros(K)
    e0[0] = 1.0

    def proj(nu):
        return _project_simplex_rows((y - floor) / scale + nu[:, None, None] * e0)

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        s = proj(mid)[..., 0].sum(axis=-1)
        lo = np.where(s < t0, mid, lo)
        hi = np.where(s >= t0, mid, hi)
    return floor + scale * proj(0.5 * (lo + hi))


def _pgd(model: ProtographModel, delta: float, S: int, opts: GrowthOptions):
    inits = np.stack([
        np.random.default_rng([opts.seed, k]).dirichlet(np.full(model.K, opts.concentration), size=model.b_v)
        for k in range(S)
    ])
    tau = project_to_slice(inits, delta, floor=1e-9)
    values, feasible, warm_list, grad = model.evaluate(tau, gradient=True, tol=opts.ipf_tol)
    warm = dict(enumerate(warm_list))
    step = np.full(S, 0.05)
    for _ in range(opts.pgd_max_iter):
        cand = project_to_slice(tau + step[:, None, None] * np.nan_to_num(grad), delta, floor=1e-9)
        cv, cf, cw, cg = model.evaluate(cand, warm=warm, gradient=True, tol=opts.ipf_tol)
        better = cf & (cv > values - 1e-15)
        moved = np.abs(cand - tau).max(axis=(1, 2))
        tau = np.where(better[:, None, None], cand, tau)
        values = np.where(better, cv, values)
        feasible = np.where(better, cf, feasible)
        grad = np.where(better[:, None, None], cg, grad)
        for i, th in enumerate(cw):
            warm[i] = np.where(better[:, None, None, None], th, warm[i])
        step = np.where(better, step * 1.5, step * 0.5)
        if ((moved < 1e-12) | (step < 1e-12)).all():
            break
    return tau, values, feasible


def growth_rate_at_delta(B, m: int, delta: float, opts: GrowthOptions | None = None,
                         warm_messages: np.ndarray | None = None) -> GrowthPoint:
    """r(delta) for the ensemble of base matrix ``B`` in degree-``m`` covers.

    ``warm_messages`` (from a neighbouring delta) is run as one extra start
    after the seeded ones.
    """
    opts = opts or GrowthOptions()
    model = protograph_model(B, m, opts.counting)
    if not 0.0 <= delta <= 1.0:
        return GrowthPoint(delta, False, None, 0)
    if delta == 0.0:
        tau = np.zeros((model.b_v, model.K))
        tau[:, 0] = 1.0
        return GrowthPoint(0.0, True, 0.0, 1, 0, tau)
    if opts.method == "pgd":
        tau, values, feasible = _pgd(model, delta, opts.starts, opts)
        mu = None
    else:
        mu0 = _initial_messages(model, opts, opts.starts)
        if warm_messages is not None:
            mu0 = np.concatenate([mu0, np.asarray(warm_messages)[None]], axis=0)
        tau, values, feasible, mu = _message_passing(model, delta, mu0, opts)
    if not feasible.any():
        return GrowthPoint(delta, False, None, len(values))
    masked = np.where(feasible, values, -np.inf)
    best = int(np.argmax(masked))
    return GrowthPoint(
        delta,
        True,
        float(masked[best]) / model.b_v,
        len(values),
        best,
        tau[best],
        None if mu is None else mu[best],
    )


def with_starts(opts: GrowthOptions, starts: int) -> GrowthOptions:
    return replace(opts, starts=starts)
