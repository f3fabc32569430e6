"""Exact finite-N ensemble averages, by formula and by brute force.

For lift size N and per-variable weight-type counts ``counts[v, w]`` (how many
of the N copies of v carry weight w) the ensemble average is

    E = prod_v S_v * prod_c Sat_c / prod_{e in c} S_{v(e)}

with ``S_v = multinomial(N; counts_v) prod_w mult(w)^counts_v[w]`` and
``Sat_c`` the sum over sequences of N weight tuples, one per check copy, whose
per-socket weight multisets match the counts, of ``prod f(tuple)``.  In
``"codeword"`` mode this is the average number of cover codewords whose
projection has these types (f = A, mult = C(m, w)); in ``"pseudocodeword"``
mode it is the average number of distinct pseudocodewords obtainable from
some degree-m cover of a lift (f = 1[A > 0], mult = 1).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, prod

import numpy as np

from ..gf2 import enumerate_codewords
from ..protograph import TannerGraph, _as_base, enumerate_all_covers
from .alphabet import COUNTING_MODES, EnumeratorBudgetError, check_enumerator

__all__ = ["brute_force_average_count", "exact_average_count", "projection_type_counts"]

MAX_LIFT = 4
MAX_BRUTE_FORCE_GRAPHS = 2_000_000


def _multinomial(parts) -> int:
    out = factorial(sum(parts))
    for p in parts:
        out //= factorial(p)
    return out


def _validate(B, m, N, counts, counting):
    base = _as_base(B)
    if counting not in COUNTING_MODES:
        raise ValueError(f"counting must be one of {COUNTING_MODES}, got {counting!r}")
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != (base.b_v, m + 1):
        raise ValueError(f"type counts must have shape {(base.b_v, m + 1)}, got {counts.shape}")
    if (counts < 0).any() or (counts.sum(axis=1) != N).any():
        raise ValueError("each row of type counts must be a composition of N")
    return base, counts


def _check_satisfactions(f: np.ndarray, socket_counts: tuple[tuple[int, ...], ...], N: int) -> int:
    d = len(socket_counts)
    tuples = [w for w in np.ndindex(*f.shape) if f[w] != 0]
    weights = {w: int(f[w]) for w in tuples}

    @lru_cache(maxsize=None)
    def go(remaining: tuple[tuple[int, ...], ...]) -> int:
        if all(sum(r) == 0 for r in remaining):
            return 1
        total = 0
        for w in tuples:
            if all(remaining[i][w[i]] > 0 for i in range(d)):
                nxt = tuple(
                    tuple(r - (1 if k == w[i] else 0) for k, r in enumerate(remaining[i])) for i in range(d)
                )
                total += weights[w] * go(nxt)
        return total

    return go(socket_counts)


def exact_average_count(B, m: int, N: int, tau_counts, counting: str = "codeword") -> Fraction:
    """Exact ensemble-average count (a Fraction) for the given weight-type counts."""
    base, counts = _validate(B, m, N, tau_counts, counting)
    if N > MAX_LIFT:
        raise EnumeratorBudgetError(f"exact count supports N <= {MAX_LIFT}, got {N}")
    if counting == "codeword":
        mult = [comb(m, w) for w in range(m + 1)]
    else:
        mult = [1] * (m + 1)
    S = [_multinomial(row) * prod(mult[w] ** int(c) for w, c in enumerate(row)) for row in counts.tolist()]
    result = Fraction(prod(S))
    for x in range(base.b_c):
        socket_vars = [y for y in range(base.b_v) for _ in range(int(base.entries[x, y]))]
        d = len(socket_vars)
        if d == 0:
            continue
        table = check_enumerator(d, m).table
        f = table if counting == "codeword" else (table > 0).astype(np.int64)
        sat = _check_satisfactions(f, tuple(tuple(counts[v].tolist()) for v in socket_vars), N)
        result *= Fraction(sat, prod(S[v] for v in socket_vars))
    return result


def projection_type_counts(w: np.ndarray, b_v: int, N: int, m: int) -> np.ndarray:
    """Per-protograph-variable histogram of pseudocodeword entries (lift layout y*N + j)."""
    w = np.asarray(w).reshape(b_v, N)
    return np.stack([np.bincount(row, minlength=m + 1) for row in w])


def brute_force_average_count(B, m: int, N: int, tau_counts, counting: str = "codeword") -> Fraction:
    """Average over every lift and every degree-m cover, by enumeration.

    ``"codeword"``: mean over (lift, cover) pairs of the number of cover
    codewords whose projection has the given types.  ``"pseudocodeword"``:
    mean over lifts of the number of distinct projections with those types
    arising from any cover of the lift.
    """
    base, counts = _validate(B, m, N, tau_counts, counting)
    n_lifts = factorial(N) ** base.n_edges
    n_covers = factorial(m) ** (base.n_edges * N)
    if n_lifts * n_covers > MAX_BRUTE_FORCE_GRAPHS:
        raise EnumeratorBudgetError(f"{n_lifts * n_covers} (lift, cover) pairs exceed the brute-force budget")
    proto = TannerGraph.from_base(base)
    total = Fraction(0)
    for lifted in enumerate_all_covers(proto, N):
        seen: set[tuple[int, ...]] = set()
        codewords = 0
        for cov in enumerate_all_covers(lifted, m):
            for c in enumerate_codewords(cov.parity_matrix):
                w = c.reshape(-1, m).sum(axis=1)
                if np.array_equal(projection_type_counts(w, base.b_v, N, m), counts):
                    codewords += 1
                    seen.add(tuple(w.tolist()))
        total += Fraction(codewords, n_covers) if counting == "codeword" else len(seen)
    return total / n_lifts
