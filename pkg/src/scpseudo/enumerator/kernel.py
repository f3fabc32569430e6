"""Check clouds as weighted automata over the running XOR.

Reading the socket weights of a check one at a time, the set of m-bit vectors
reachable as the XOR so far is invariant under coordinate permutations, so a
small state suffices:

* ``"codeword"``: the state is the weight of the running XOR and transitions
  carry the number of vectors producing it, so the accepted mass is ``A(w)``;
* ``"pseudocodeword"``: the state is the set of achievable XOR weights
  (deterministic subset construction), accepting when 0 is achievable, so the
  accepted mass is ``1[A(w) > 0]``.

Forward/backward products give leave-one-out socket sums and the partition
function in ``O(d * states^2)`` per check instead of ``O((m+1)^d)``.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from math import comb

import numpy as np

from .alphabet import COUNTING_MODES
from .inner import DEFAULT_TOL, LN2

__all__ = ["CheckKernel", "check_kernel"]


def _xor_weights(r: int, w: int, m: int):
    """(weight of a xor b, number of b) for fixed |a| = r over all |b| = w."""
    for t in range(max(0, r + w - m), min(r, w) + 1):
        yield r + w - 2 * t, comb(r, t) * comb(m - r, w - t)


class CheckKernel:
    """Transfer matrices ``T[w]`` with start and accept vectors."""

    def __init__(self, m: int, counting: str = "pseudocodeword"):
        if counting not in COUNTING_MODES:
            raise ValueError(f"counting must be one of {COUNTING_MODES}, got {counting!r}")
        self.m = m
        self.K = m + 1
        self.counting = counting
        if counting == "codeword":
            n = m + 1
            T = np.zeros((self.K, n, n))
            for w in range(self.K):
                for r in range(n):
                    for r2, cnt in _xor_weights(r, w, m):
                        T[w, r, r2] += cnt
            start = np.eye(n)[0]
            accept = np.eye(n)[0]
        else:
            states = [frozenset({0})]
            index = {states[0]: 0}
            trans = {}
            i = 0
            while i < len(states):
                s = states[i]
                for w in range(self.K):
                    nxt = frozenset(r2 for r in s for r2, _ in _xor_weights(r, w, m))
                    if nxt not in index:
                        index[nxt] = len(states)
                        states.append(nxt)
                    trans[i, w] = index[nxt]
                i += 1
            n = len(states)
            T = np.zeros((self.K, n, n))
            for (s, w), s2 in trans.items():
                T[w, s, s2] = 1.0
            start = np.eye(n)[0]
            accept = np.array([1.0 if 0 in s else 0.0 for s in states])
            self.states = tuple(states)
        self.n_states = T.shape[1]
        T_wide = np.ascontiguousarray(T.transpose(1, 0, 2).reshape(T.shape[1], -1))
        for arr in (T, T_wide, start, accept):
            arr.setflags(write=False)
        self.T, self.start, self.accept = T, start, accept
        self._T_wide = T_wide

    def dense(self, d: int) -> np.ndarray:
        """Accepted mass of every weight tuple (equals the dense check factor)."""
        out = np.zeros((self.K,) * d)
        for w in product(range(self.K), repeat=d):
            v = self.start
            for wi in w:
                v = v @ self.T[wi]
            out[w] = v @ self.accept
        return out

    def _socket_matrices(self, phi):
        n = self.n_states
        return (phi @ self.T.reshape(self.K, n * n)).reshape(phi.shape[:-1] + (n, n))

    def _through(self, alpha):
        """``alpha @ T[w]`` for every symbol w, shape (M, K, states)."""
        n = self.n_states
        return (alpha @ self._T_wide).reshape(alpha.shape[0], self.K, n)

    def _backward(self, Ms):
        M, d = Ms.shape[:2]
        beta = np.empty((d + 1, M, self.n_states))
        logb = np.zeros((d + 1, M))
        beta[d] = self.accept
        for i in range(d - 1, -1, -1):
            b = np.matmul(Ms[:, i], beta[i + 1][..., None])[..., 0]
            s = b.sum(axis=1)
            beta[i] = b / s[:, None]
            logb[i] = logb[i + 1] + np.log(s)
        return beta, logb

    @staticmethod
    def _scale(logphi):
        shift = logphi.max(axis=-1)
        return np.exp(logphi - shift[..., None]), shift

    def leave_one_out(self, logphi: np.ndarray):
        """Natural-log socket sums ``log sum_{w: w_e = k} f(w) prod_{i != e} phi_i(w_i)``
        (shape (M, d, K)) and ``log Z`` (shape (M,)) for incoming log-potentials ``logphi``."""
        phi, shift = self._scale(logphi)
        M, d, _ = phi.shape
        Ms = self._socket_matrices(phi)
        beta, logb = self._backward(Ms)
        out = np.empty((M, d, self.K))
        alpha = np.broadcast_to(self.start, (M, self.n_states))
        loga = np.zeros(M)
        total_shift = shift.sum(axis=1)
        for e in range(d):
            o = (self._through(alpha) * beta[e + 1][:, None, :]).sum(axis=-1)
            with np.errstate(divide="ignore"):
                out[:, e] = np.log(o) + (loga + logb[e + 1] + total_shift - shift[:, e])[:, None]
            a = np.matmul(alpha[:, None, :], Ms[:, e])[:, 0]
            s = a.sum(axis=1)
            alpha = a / s[:, None]
            loga = loga + np.log(s)
        logZ = np.log(alpha @ self.accept) + loga + total_shift
        return out, logZ

    def log_partition(self, logphi: np.ndarray) -> np.ndarray:
        phi, shift = self._scale(logphi)
        Ms = self._socket_matrices(phi)
        alpha = np.broadcast_to(self.start, (phi.shape[0], self.n_states))
        loga = np.zeros(phi.shape[0])
        for e in range(phi.shape[1]):
            a = np.matmul(alpha[:, None, :], Ms[:, e])[:, 0]
            s = a.sum(axis=1)
            alpha = a / s[:, None]
            loga = loga + np.log(s)
        with np.errstate(divide="ignore"):
            return np.log(alpha @ self.accept) + loga + shift.sum(axis=1)

    def ipf(self, taus: np.ndarray, log_scalings=None, tol: float = DEFAULT_TOL, max_iter: int = 20000):
        """IPF on the implicit tensor; same contract as ``inner.ipf_batch``.

        ``taus`` has shape (M, d, K).  Returns values in bits, natural-log
        scalings (M, d, K), TV residual (M,) and iteration count.
        """
        taus = np.asarray(taus, dtype=float)
        M, d, K = taus.shape
        theta = np.zeros_like(taus) if log_scalings is None else np.array(log_scalings, dtype=float)
        pos = taus > 0
        theta = np.where(pos, theta, -np.inf)
        log_tau = np.log(np.where(pos, taus, 1.0))
        residual = np.full(M, np.inf)
        it = 0
        for it in range(1, max_iter + 1):
            phi, _ = self._scale(theta)
            Ms = self._socket_matrices(phi)
            beta, _ = self._backward(Ms)
            alpha = np.broadcast_to(self.start, (M, self.n_states))
            res = np.zeros(M)
            for e in range(d):
                through = self._through(alpha)
                o = (through * beta[e + 1][:, None, :]).sum(axis=-1)
                marg = phi[:, e] * o
                with np.errstate(invalid="ignore"):
                    marg = marg / marg.sum(axis=1, keepdims=True)
                res = np.maximum(res, 0.5 * np.abs(marg - taus[:, e]).sum(axis=1))
                with np.errstate(divide="ignore", invalid="ignore"):
                    step = np.where(pos[:, e], log_tau[:, e] - np.log(marg), 0.0)
                step = np.where(np.isfinite(step), step, 0.0)
                th = theta[:, e] + step
                theta[:, e] = th - th.max(axis=1, keepdims=True)
                pe = np.exp(theta[:, e])
                a = (through * pe[:, :, None]).sum(axis=1)
                alpha = a / a.sum(axis=1, keepdims=True)
            dead = np.isnan(res)
            residual = np.where(dead, np.inf, res)
            if ((residual < tol) | dead).all():
                break
        logZ = self.log_partition(theta)
        lin = np.where(pos, taus * np.where(np.isfinite(theta), theta, 0.0), 0.0).sum(axis=(1, 2))
        return (logZ - lin) / LN2, theta, residual, it


@lru_cache(maxsize=None)
def check_kernel(m: int, counting: str = "pseudocodeword") -> CheckKernel:
    return CheckKernel(m, counting)
