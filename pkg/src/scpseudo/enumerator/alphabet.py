"""Weight alphabet of degree-m covers and the local enumerator of a check cloud."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

__all__ = [
    "COUNTING_MODES",
    "CheckEnumeratorTable",
    "EnumeratorBudgetError",
    "WeightAlphabet",
    "brute_force_check_enumerator",
    "check_enumerator",
    "check_factor",
    "krawtchouk",
    "variable_log_multiplicity",
]

COUNTING_MODES = ("pseudocodeword", "codeword")
MAX_TABLE_ENTRIES = 4**12
BRUTE_FORCE_BITS = 20


class EnumeratorBudgetError(RuntimeError):
    """The requested table does not fit the memory budget."""


@dataclass(frozen=True)
class WeightAlphabet:
    """Symbols ``0..m``; symbol ``w`` stands for the ``C(m, w)`` m-bit vectors of weight ``w``."""

    m: int

    @property
    def symbols(self) -> range:
        return range(self.m + 1)

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([comb(self.m, w) for w in self.symbols], dtype=np.int64)


def krawtchouk(w: int, j: int, m: int) -> int:
    """``K_w(j; m) = sum_t (-1)^t C(j, t) C(m - j, w - t)``."""
    if not (0 <= w <= m and 0 <= j <= m):
        raise ValueError(f"krawtchouk needs 0 <= w, j <= m, got w={w}, j={j}, m={m}")
    return sum((-1) ** t * comb(j, t) * comb(m - j, w - t) for t in range(0, min(j, w) + 1))


@dataclass(frozen=True)
class CheckEnumeratorTable:
    """``table[w_1, ..., w_d]`` counts d-tuples of m-bit vectors with those
    weights whose coordinatewise XOR is zero."""

    d: int
    m: int
    table: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return self.table > 0


def _table_from_krawtchouk(d: int, m: int) -> np.ndarray:
    K = np.array([[krawtchouk(w, j, m) for j in range(m + 1)] for w in range(m + 1)], dtype=np.int64)
    total = np.zeros((m + 1,) * d, dtype=np.int64)
    for j in range(m + 1):
        term = np.array(comb(m, j), dtype=np.int64)
        for _ in range(d):
            term = np.multiply.outer(term, K[:, j])
        total += term
    if (total % (2**m)).any():
        raise AssertionError("Krawtchouk sum is not divisible by 2^m")
    return total // (2**m)


def brute_force_check_enumerator(d: int, m: int) -> np.ndarray:
    """Direct count over all ``2**(m d)`` tuples (independent of the Krawtchouk route)."""
    if m * d > 24:
        raise EnumeratorBudgetError(f"brute force over 2**{m * d} tuples refused")
    idx = np.arange(1 << (m * d), dtype=np.int64)
    mask = (1 << m) - 1
    xor = np.zeros_like(idx)
    weights = np.zeros(idx.shape, dtype=np.int64)
    popcount = np.array([bin(v).count("1") for v in range(1 << m)], dtype=np.int64)
    for i in range(d):
        part = (idx >> (m * i)) & mask
        xor ^= part
        weights = weights * (m + 1) + popcount[part]
    hits = weights[xor == 0]
    counts = np.bincount(hits, minlength=(m + 1) ** d)
    # weights were accumulated with socket 0 most significant
    return counts.reshape((m + 1,) * d)


@lru_cache(maxsize=None)
def _cached_table(d: int, m: int) -> np.ndarray:
    table = _table_from_krawtchouk(d, m)
    if m * d <= BRUTE_FORCE_BITS:
        brute = brute_force_check_enumerator(d, m)
        if not np.array_equal(table, brute):
            raise AssertionError(f"Krawtchouk table disagrees with brute force at d={d}, m={m}")
    table.setflags(write=False)
    return table


def check_enumerator(d: int, m: int, max_entries: int = MAX_TABLE_ENTRIES) -> CheckEnumeratorTable:
    """Local enumerator of a degree-``d`` check in a degree-``m`` cover.

    Built from ``A(w) = 2^-m sum_j C(m, j) prod_i K_{w_i}(j; m)`` and checked
    against brute-force enumeration when ``2**(m d) <= 2**20``.
    """
    if d < 1 or m < 1:
        raise ValueError("check degree and cover degree must be positive")
    if (m + 1) ** d > max_entries:
        raise EnumeratorBudgetError(
            f"(m+1)^d = {(m + 1) ** d} entries exceeds budget {max_entries}"
        )
    return CheckEnumeratorTable(d, m, _cached_table(d, m))


@lru_cache(maxsize=None)
def check_factor(d: int, m: int, counting: str = "pseudocodeword") -> np.ndarray:
    """Float factor used by the growth-rate engine.

    ``"codeword"`` counts cover codewords (factor ``A``); ``"pseudocodeword"``
    counts distinct pseudocodewords from all degree-m covers, for which a check
    only asks that its local weight vector be realisable (factor ``1[A > 0]``).
    """
    table = check_enumerator(d, m).table
    if counting == "codeword":
        out = table.astype(float)
    elif counting == "pseudocodeword":
        out = (table > 0).astype(float)
    else:
        raise ValueError(f"counting must be one of {COUNTING_MODES}, got {counting!r}")
    out.setflags(write=False)
    return out


def variable_log_multiplicity(m: int, counting: str = "pseudocodeword") -> np.ndarray:
    """log2 of the number of cover bit patterns represented by each symbol."""
    if counting == "codeword":
        return np.log2(WeightAlphabet(m).multiplicities.astype(float))
    if counting == "pseudocodeword":
        return np.zeros(m + 1)
    raise ValueError(f"counting must be one of {COUNTING_MODES}, got {counting!r}")
