"""Exact GF(2) machinery for desk-scale pseudocodeword checks.

Rows and codewords are packed into Python integers (bit ``i`` is coordinate
``i``), which keeps elimination and Gray-code traversal cheap for the lengths
an exhaustive oracle can afford anyway.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from .protograph import (
    DEFAULT_COVER_CAP,
    EdgeSpreading,
    RandomPeriodicPerms,
    TannerGraph,
    cover,
    enumerate_all_covers,
    make_rng,
    periodic_sc_graph,
)

__all__ = [
    "Budget",
    "DimensionCapError",
    "Pseudocodeword",
    "PseudoweightReport",
    "WrapTally",
    "bec_pseudoweight",
    "enumerate_codewords",
    "example1_graphs",
    "extend_terminated_codeword",
    "extend_terminated_pseudocodeword",
    "gf2_rank",
    "in_code",
    "min_pseudoweight",
    "minimum_distance",
    "nullspace_basis",
    "project_pseudocodeword",
    "sample_wrap_checks",
    "wrap_codeword",
    "wrap_pseudocodeword",
]

DEFAULT_DIMENSION_CAP = 24


class DimensionCapError(RuntimeError):
    """Raised when exhaustive codeword enumeration would exceed its cap."""

    def __init__(self, dimension: int, cap: int):
        super().__init__(f"code dimension {dimension} exceeds enumeration cap {cap}")
        self.dimension = dimension
        self.cap = cap


def _pack_rows(H) -> tuple[list[int], int]:
    H = np.asarray(H, dtype=np.int64) & 1
    if H.ndim != 2:
        raise ValueError("parity matrix must be 2-D")
    rows = []
    for r in H:
        val = 0
        for i in np.flatnonzero(r):
            val |= 1 << int(i)
        rows.append(val)
    return rows, H.shape[1]


def _unpack(val: int, n: int) -> np.ndarray:
    return np.array([(val >> i) & 1 for i in range(n)], dtype=np.uint8)


def _pack(bits) -> int:
    val = 0
    for i, b in enumerate(np.asarray(bits).ravel()):
        if int(b) & 1:
            val |= 1 << i
    return val


def _rref(rows: list[int], n: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form; returns (pivot rows, pivot columns)."""
    rows = [r for r in rows if r]
    piv_rows: list[int] = []
    piv_cols: list[int] = []
    for col in range(n):
        bit = 1 << col
        hit = next((i for i, r in enumerate(rows) if r & bit), None)
        if hit is None:
            continue
        pr = rows.pop(hit)
        rows = [r ^ pr if r & bit else r for r in rows]
        piv_rows = [r ^ pr if r & bit else r for r in piv_rows]
        piv_rows.append(pr)
        piv_cols.append(col)
        rows = [r for r in rows if r]
        if not rows:
            break
    return piv_rows, piv_cols


def gf2_rank(H) -> int:
    rows, n = _pack_rows(H)
    return len(_rref(rows, n)[1])


def _nullspace_ints(H) -> tuple[list[int], int]:
    rows, n = _pack_rows(H)
    piv_rows, piv_cols = _rref(rows, n)
    pivset = set(piv_cols)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        vec = 1 << f
        fbit = 1 << f
        for pr, pc in zip(piv_rows, piv_cols):
            if pr & fbit:
                vec |= 1 << pc
        basis.append(vec)
    return basis, n


def nullspace_basis(H) -> list[np.ndarray]:
    """GF(2) basis of the right nullspace of ``H``; ``n - rank(H)`` vectors."""
    basis, n = _nullspace_ints(H)
    return [_unpack(b, n) for b in basis]


def in_code(H, word) -> bool:
    H = np.asarray(H, dtype=np.int64) & 1
    return not ((H @ (np.asarray(word, dtype=np.int64) & 1)) % 2).any()


def _gray_ints(basis: Sequence[int]) -> Iterator[int]:
    word = 0
    yield word
    for i in range(1, 1 << len(basis)):
        word ^= basis[(i & -i).bit_length() - 1]
        yield word


def enumerate_codewords(H, dimension_cap: int = DEFAULT_DIMENSION_CAP) -> Iterator[np.ndarray]:
    """All ``2**dim`` codewords of ``ker H`` in Gray-code order, starting with zero."""
    basis, n = _nullspace_ints(H)
    if len(basis) > dimension_cap:
        raise DimensionCapError(len(basis), dimension_cap)
    for w in _gray_ints(basis):
        yield _unpack(w, n)


@dataclass(frozen=True)
class Pseudocodeword:
    values: np.ndarray
    cover_degree: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int64)
        if vals.size and (vals.min() < 0 or vals.max() > self.cover_degree):
            raise ValueError("pseudocodeword entries must lie in 0..m")
        object.__setattr__(self, "values", vals)

    def tolist(self) -> list[int]:
        return self.values.tolist()


def project_pseudocodeword(c, m: int) -> Pseudocodeword:
    """``w_i = sum_k c_{i,k}`` with cover copies stored contiguously per variable."""
    c = np.asarray(c, dtype=np.int64)
    if m < 1 or c.size % m:
        raise ValueError(f"codeword length {c.size} is not a multiple of m={m}")
    return Pseudocodeword(c.reshape(-1, m).sum(axis=1), m)


def bec_pseudoweight(w) -> int:
    """Support size of a pseudocodeword."""
    vals = w.values if isinstance(w, Pseudocodeword) else np.asarray(w)
    return int(np.count_nonzero(vals))


@dataclass(frozen=True)
class Budget:
    """Limits for ``min_pseudoweight``; ``samples`` covers are drawn when
    exhaustive search does not fit."""

    cover_cap: int = DEFAULT_COVER_CAP
    dimension_cap: int = DEFAULT_DIMENSION_CAP
    samples: int = 64
    seed: int = 0


@dataclass(frozen=True)
class PseudoweightReport:
    w_min: int | None
    witness: Pseudocodeword | None
    exhaustive: bool
    covers_searched: int

    def to_dict(self) -> dict:
        return {
            "w_min": self.w_min,
            "witness": None if self.witness is None else self.witness.tolist(),
            "exhaustive": self.exhaustive,
            "covers_searched": self.covers_searched,
        }


def _support_mask(n: int, m: int) -> int:
    return sum(1 << (i * m) for i in range(n))


def _support_of(word: int, n: int, m: int, mask: int) -> int:
    """Bit ``i*m`` of the result is set iff some copy of variable ``i`` is set."""
    acc = 0
    for k in range(m):
        acc |= word >> k
    return acc & mask


def _projection(word: int, n: int, m: int) -> tuple[int, ...]:
    block = (1 << m) - 1
    return tuple(bin((word >> (i * m)) & block).count("1") for i in range(n))


def _best_in_cover(Hc, n: int, m: int, dimension_cap: int):
    """(weight, projection) of the lexicographically smallest minimum nonzero projection."""
    basis, _ = _nullspace_ints(Hc)
    if len(basis) > dimension_cap:
        raise DimensionCapError(len(basis), dimension_cap)
    mask = _support_mask(n, m)
    best_w = None
    best: list[int] = []
    for word in _gray_ints(basis):
        if not word:
            continue
        wt = bin(_support_of(word, n, m, mask)).count("1")
        if best_w is None or wt < best_w:
            best_w, best = wt, [word]
        elif wt == best_w:
            best.append(word)
    if best_w is None:
        return None, None
    return best_w, min(_projection(w, n, m) for w in best)


def min_pseudoweight(G: TannerGraph, m: int, budget: Budget | None = None) -> PseudoweightReport:
    """Minimum BEC pseudoweight over nonzero pseudocodewords of degree-``m`` covers of ``G``.

    Exhaustive over every cover when the cover count fits ``budget.cover_cap``;
    otherwise ``budget.samples`` seeded random covers are searched.  Codewords of
    each cover are always enumerated exhaustively.
    """
    budget = budget or Budget()
    n = G.n_vars
    n_covers = math.factorial(m) ** G.n_edges
    exhaustive = n_covers <= budget.cover_cap
    if exhaustive:
        covers = enumerate_all_covers(G, m, budget.cover_cap)
    else:
        covers = (cover(G, m, budget.seed + s) for s in range(budget.samples))
    best_w, best_wit, searched = None, None, 0
    for Gm in covers:
        searched += 1
        wt, wit = _best_in_cover(Gm.parity_matrix, n, m, budget.dimension_cap)
        if wt is None:
            continue
        if best_w is None or (wt, wit) < (best_w, best_wit):
            best_w, best_wit = wt, wit
    witness = None if best_wit is None else Pseudocodeword(np.array(best_wit), m)
    return PseudoweightReport(best_w, witness, exhaustive, searched)


def minimum_distance(H, dimension_cap: int = DEFAULT_DIMENSION_CAP) -> int | None:
    """Minimum Hamming weight of a nonzero codeword, by enumeration."""
    basis, _ = _nullspace_ints(H)
    if len(basis) > dimension_cap:
        raise DimensionCapError(len(basis), dimension_cap)
    weights = [bin(w).count("1") for w in _gray_ints(basis) if w]
    return min(weights) if weights else None


def wrap_codeword(c, lam: int, N: int, b_v: int, m: int) -> np.ndarray:
    """Fold a window cover codeword modulo ``lam * N * b_v`` variables (XOR of blocks)."""
    c = np.asarray(c, dtype=np.uint8)
    period = lam * N * b_v * m
    if period <= 0 or c.size == 0 or c.size % period:
        raise ValueError(f"codeword length {c.size} is not a positive multiple of {period}")
    return np.bitwise_xor.reduce(c.reshape(-1, period), axis=0)


def wrap_pseudocodeword(c, lam: int, N: int, b_v: int, m: int) -> Pseudocodeword:
    return project_pseudocodeword(wrap_codeword(c, lam, N, b_v, m), m)


def extend_terminated_pseudocodeword(w_t, target_length: int) -> Pseudocodeword:
    """Zero-pad a terminated-code pseudocodeword to a longer window."""
    vals = w_t.values if isinstance(w_t, Pseudocodeword) else np.asarray(w_t, dtype=np.int64)
    m = w_t.cover_degree if isinstance(w_t, Pseudocodeword) else max(int(vals.max(initial=0)), 1)
    if target_length < vals.size:
        raise ValueError("target window is shorter than the terminated pseudocodeword")
    out = np.zeros(target_length, dtype=np.int64)
    out[: vals.size] = vals
    return Pseudocodeword(out, m)


def extend_terminated_codeword(c, target_length: int) -> np.ndarray:
    c = np.asarray(c, dtype=np.uint8)
    if target_length < c.size:
        raise ValueError("target window is shorter than the codeword")
    out = np.zeros(target_length, dtype=np.uint8)
    out[: c.size] = c
    return out


@dataclass
class WrapTally:
    """Pass/fail counts of the wrapping property over sampled instances."""

    samples: int = 0
    parity_passes: int = 0
    weight_passes: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.samples == self.parity_passes == self.weight_passes

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "parity_passes": self.parity_passes,
            "weight_passes": self.weight_passes,
            "ok": self.ok,
        }


def sample_wrap_checks(
    spreading: EdgeSpreading,
    lam: int,
    periods: int,
    N: int,
    m: int,
    samples: int,
    seed: int,
    graphs: int = 8,
) -> WrapTally:
    """Sample (window, cover, codeword) triples and test the wrapping property.

    For each of ``graphs`` seeded periodic permutation tables (period ``lam``) a
    terminated window of ``periods * lam`` time instants and the matching
    tail-biting graph are built.  Window codewords (drawn uniformly from the
    code, nonzero) are wrapped; the wrapped word must satisfy every tail-biting
    check and its projection must have no larger support.
    """
    rng = make_rng(seed)
    tally = WrapTally()
    per_graph = [samples // graphs + (g < samples % graphs) for g in range(graphs)]
    for g, count in enumerate(per_graph):
        if not count:
            continue
        perms = RandomPeriodicPerms(spreading, lam, N, m, seed * 1000003 + g)
        window = periodic_sc_graph(spreading, "terminated", periods * lam, N, m, perms)
        tb = periodic_sc_graph(spreading, "tailbiting", lam, N, m, perms)
        Hw, Ht = window.parity_matrix, tb.parity_matrix
        basis, n = _nullspace_ints(Hw)
        if not basis:
            continue
        for _ in range(count):
            word = 0
            while not word:
                coeffs = rng.integers(0, 2, size=len(basis))
                for b, on in zip(basis, coeffs):
                    if on:
                        word ^= b
            c = _unpack(word, n)
            c_hat = wrap_codeword(c, lam, N, spreading.b_v, m)
            w = project_pseudocodeword(c, m)
            w_hat = project_pseudocodeword(c_hat, m)
            tally.samples += 1
            parity_ok = in_code(Ht, c_hat)
            weight_ok = bec_pseudoweight(w_hat) <= bec_pseudoweight(w)
            tally.parity_passes += parity_ok
            tally.weight_passes += weight_ok
            if not (parity_ok and weight_ok):
                tally.failures.append(c)
    return tally


def example1_graphs(periods: int = 3):
    """Window and tail-biting degree-2 covers of the worked Example-1 ensemble.

    Component base matrices ``B_0 = B_1 = [1 1]``, trivial lift (N = 1), and the
    time-invariant cover with identity permutations everywhere except the
    ``B_1`` edge of the second variable, which is swapped.
    """
    spreading = EdgeSpreading(([[1, 1]], [[1, 1]]))

    def perms(pe):
        swap = pe.component == 1 and pe.y == 1
        return [0], [[1, 0] if swap else [0, 1]]

    window = periodic_sc_graph(spreading, "terminated", periods * 2, 1, 2, perms)
    tb = periodic_sc_graph(spreading, "tailbiting", 2, 1, 2, perms)
    return spreading, window, tb

