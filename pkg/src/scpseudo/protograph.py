"""Protograph and base-matrix algebra for block and spatially coupled LDPC ensembles.

Conventions
-----------
* Base matrices hold edge multiplicities.  Parallel edges are kept as explicit
  edge multisets everywhere, because graph covers permute every edge
  independently and a GF(2) matrix cannot tell two parallel edges from none.
* Node copies are laid out contiguously: copy ``j`` of protograph variable
  ``y`` in an ``N``-lift is variable ``y * N + j``; copy ``k`` of variable
  ``i`` in an ``m``-fold cover is variable ``i * m + k``.  Terminated and
  tail-biting base matrices are column-major in time, so a lifted window is
  time-major with ``N * b_v`` variables per time instant.
* Random permutations come from ``numpy.random.PCG64`` seeded with a 64-bit
  integer and are drawn with an explicit Fisher-Yates shuffle, so a seed fixes
  every graph on every platform.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations, product
from pathlib import Path

import numpy as np

__all__ = [
    "BaseMatrix",
    "EdgeSpreading",
    "EnsembleParams",
    "ProtoEdge",
    "TannerGraph",
    "CoverBudgetError",
    "cover",
    "cover_with_permutations",
    "design_rate",
    "enumerate_all_covers",
    "fisher_yates",
    "lift",
    "make_rng",
    "periodic_sc_graph",
    "sc_edges",
    "tailbiting_base",
    "terminated_base",
    "validate_spreading",
]

DEFAULT_COVER_CAP = 10**7


class CoverBudgetError(RuntimeError):
    """Raised when an exhaustive cover enumeration would exceed its cap."""

    def __init__(self, required: int, cap: int):
        super().__init__(
            f"exhaustive cover enumeration needs {required} covers, cap is {cap}"
        )
        self.required = required
        self.cap = cap


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


def fisher_yates(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform random permutation of ``range(n)`` by Fisher-Yates shuffling."""
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


@dataclass(frozen=True)
class BaseMatrix:
    """Nonnegative integer biadjacency matrix of a protograph."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.int64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"base matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("base matrix needs at least one row and one column")
        if (arr < 0).any():
            raise ValueError("base matrix entries must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def b_c(self) -> int:
        return self.entries.shape[0]

    @property
    def b_v(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def var_degrees(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    @property
    def check_degrees(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    @property
    def n_edges(self) -> int:
        return int(self.entries.sum())

    def key(self) -> tuple:
        """Hashable identity used for memoization."""
        return (self.shape, tuple(self.entries.ravel().tolist()))

    def tolist(self) -> list[list[int]]:
        return self.entries.tolist()

    def __eq__(self, other):
        return isinstance(other, BaseMatrix) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"BaseMatrix({self.tolist()})"


def _as_base(B) -> BaseMatrix:
    return B if isinstance(B, BaseMatrix) else BaseMatrix(np.asarray(B))


@dataclass(frozen=True)
class EdgeSpreading:
    """Component matrices ``B_0 .. B_{m_s}`` of a convolutional protograph."""

    components: tuple[BaseMatrix, ...]

    def __post_init__(self):
        comps = tuple(_as_base(c) for c in self.components)
        if not comps:
            raise ValueError("an edge spreading needs at least one component")
        shapes = {c.shape for c in comps}
        if len(shapes) != 1:
            raise ValueError(f"component shapes differ: {sorted(shapes)}")
        object.__setattr__(self, "components", comps)

    @property
    def m_s(self) -> int:
        return len(self.components) - 1

    @property
    def b_c(self) -> int:
        return self.components[0].b_c

    @property
    def b_v(self) -> int:
        return self.components[0].b_v

    @property
    def block(self) -> BaseMatrix:
        return BaseMatrix(sum(c.entries for c in self.components))

    @classmethod
    def from_dict(cls, doc: dict) -> "EdgeSpreading":
        for name in ("b_c", "b_v", "m_s", "components"):
            if name not in doc:
                raise ValueError(f"spreading document is missing field '{name}'")
        comps = doc["components"]
        if not isinstance(comps, list) or len(comps) != int(doc["m_s"]) + 1:
            raise ValueError("field 'components' must list m_s + 1 matrices")
        spreading = cls(tuple(BaseMatrix(np.asarray(c)) for c in comps))
        if spreading.b_c != int(doc["b_c"]) or spreading.b_v != int(doc["b_v"]):
            raise ValueError("fields 'b_c'/'b_v' disagree with the component shapes")
        return spreading

    @classmethod
    def from_json(cls, path: str | Path) -> "EdgeSpreading":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "b_c": self.b_c,
            "b_v": self.b_v,
            "m_s": self.m_s,
            "components": [c.tolist() for c in self.components],
        }


@dataclass(frozen=True)
class TannerGraph:
    """Bipartite multigraph; ``edges`` lists ``(check, variable)`` with repetition."""

    n_checks: int
    n_vars: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple((int(c), int(v)) for c, v in self.edges)
        for c, v in edges:
            if not (0 <= c < self.n_checks and 0 <= v < self.n_vars):
                raise ValueError(f"edge ({c}, {v}) out of range")
        object.__setattr__(self, "edges", edges)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def var_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vars, dtype=np.int64)
        for _, v in self.edges:
            deg[v] += 1
        return deg

    @property
    def check_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_checks, dtype=np.int64)
        for c, _ in self.edges:
            deg[c] += 1
        return deg

    @property
    def multiplicity_matrix(self) -> np.ndarray:
        M = np.zeros((self.n_checks, self.n_vars), dtype=np.int64)
        for c, v in self.edges:
            M[c, v] += 1
        return M

    @property
    def parity_matrix(self) -> np.ndarray:
        """GF(2) parity-check matrix; parallel edge pairs cancel."""
        return (self.multiplicity_matrix % 2).astype(np.uint8)

    def neighbourhood(self, var: int) -> list[int]:
        return sorted(c for c, v in self.edges if v == var)

    def to_edge_list(self) -> str:
        lines = [f"p tanner {self.n_checks} {self.n_vars} {self.n_edges}"]
        lines += [f"{c} {v}" for c, v in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str) -> "TannerGraph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        head = rows[0]
        if len(head) != 5 or head[:2] != ["p", "tanner"]:
            raise ValueError("edge list must start with 'p tanner <n_checks> <n_vars> <n_edges>'")
        n_checks, n_vars, n_edges = map(int, head[2:])
        edges = tuple((int(c), int(v)) for c, v in rows[1:])
        if len(edges) != n_edges:
            raise ValueError(f"header announces {n_edges} edges, found {len(edges)}")
        return cls(n_checks, n_vars, edges)

    @classmethod
    def from_base(cls, B) -> "TannerGraph":
        """The protograph itself (the trivial 1-lift, edges in row-major order)."""
        B = _as_base(B)
        edges = [
            (x, y)
            for x in range(B.b_c)
            for y in range(B.b_v)
            for _ in range(int(B.entries[x, y]))
        ]
        return cls(B.b_c, B.b_v, tuple(edges))


@dataclass(frozen=True)
class EnsembleParams:
    """Parameters of a (lifted, covered) SC-LDPC ensemble."""

    spreading: EdgeSpreading
    N: int
    T: int
    m: int
    kind: str = "unterminated"

    @property
    def nu_s(self) -> int:
        """Decoding constraint length ``N (m_s + 1) b_v``."""
        return self.N * (self.spreading.m_s + 1) * self.spreading.b_v

    @property
    def R(self) -> Fraction:
        return design_rate(self.spreading, self.kind, self.T)


def validate_spreading(B, spreading: EdgeSpreading) -> bool:
    """True iff the components of ``spreading`` sum to ``B``.

    Raises ``ValueError`` when the shapes disagree, which is not the same as
    a spreading that fails to sum to ``B``.
    """
    B = _as_base(B)
    if spreading.components[0].shape != B.shape:
        raise ValueError(
            f"spreading components have shape {spreading.components[0].shape}, "
            f"base matrix has shape {B.shape}"
        )
    return bool(np.array_equal(spreading.block.entries, B.entries))


def terminated_base(spreading: EdgeSpreading, L: int) -> BaseMatrix:
    """Block-banded ``(L + m_s) b_c x L b_v`` base matrix ``B_[0, L-1]``."""
    if L < 1:
        raise ValueError(f"termination factor must be >= 1, got {L}")
    bc, bv, ms = spreading.b_c, spreading.b_v, spreading.m_s
    out = np.zeros(((L + ms) * bc, L * bv), dtype=np.int64)
    for t in range(L):
        for i, comp in enumerate(spreading.components):
            out[(t + i) * bc:(t + i + 1) * bc, t * bv:(t + 1) * bv] += comp.entries
    return BaseMatrix(out)


def tailbiting_base(spreading: EdgeSpreading, lam: int) -> BaseMatrix:
    """Tail-biting base matrix: the last ``b_c m_s`` rows of ``B_[0, lam-1]``
    are removed and added onto the first ``b_c m_s`` rows."""
    ms, bc = spreading.m_s, spreading.b_c
    if lam < max(ms, 1):
        raise ValueError(f"tail-biting factor must be >= max(m_s, 1) = {max(ms, 1)}, got {lam}")
    full = terminated_base(spreading, lam).entries.copy()
    if ms:
        full[: bc * ms] += full[lam * bc:]
    return BaseMatrix(full[: lam * bc])


def design_rate(spreading: EdgeSpreading, kind: str, factor: int | None = None) -> Fraction:
    """Design rate as an exact fraction.

    ``kind`` is ``"unterminated"``, ``"tailbiting"`` or ``"terminated"``;
    ``factor`` is the termination factor L (only used when terminated).
    """
    base = Fraction(spreading.b_c, spreading.b_v)
    if kind in ("unterminated", "tailbiting", "block"):
        if kind == "tailbiting" and factor is not None and factor < max(spreading.m_s, 1):
            raise ValueError("tail-biting factor must be >= m_s")
        return 1 - base
    if kind == "terminated":
        if factor is None or factor < 1:
            raise ValueError("terminated rate needs a termination factor L >= 1")
        return 1 - Fraction(factor + spreading.m_s, factor) * base
    raise ValueError(f"unknown ensemble kind {kind!r}")


def lift(B, N: int, seed: int) -> TannerGraph:
    """Random ``N``-lift of a protograph: one uniform permutation per protograph edge.

    Check copy ``j`` of row ``x`` is joined to variable copy ``perm[j]`` of column ``y``.
    """
    if N < 1:
        raise ValueError(f"lift size must be >= 1, got {N}")
    B = _as_base(B)
    rng = make_rng(seed)
    edges = []
    for x in range(B.b_c):
        for y in range(B.b_v):
            for _ in range(int(B.entries[x, y])):
                perm = fisher_yates(N, rng)
                edges.extend((x * N + j, y * N + int(perm[j])) for j in range(N))
    return TannerGraph(B.b_c * N, B.b_v * N, tuple(edges))


def cover_with_permutations(G: TannerGraph, m: int, perms: Sequence[Sequence[int]]) -> TannerGraph:
    """Degree-``m`` cover with a given permutation per edge of ``G``.

    Check copy ``k`` of edge ``(c, v)`` is joined to variable copy ``perms[e][k]``.
    """
    if len(perms) != G.n_edges:
        raise ValueError(f"need {G.n_edges} permutations, got {len(perms)}")
    edges = []
    for (c, v), perm in zip(G.edges, perms):
        if sorted(int(p) for p in perm) != list(range(m)):
            raise ValueError(f"{list(perm)} is not a permutation of range({m})")
        edges.extend((c * m + k, v * m + int(perm[k])) for k in range(m))
    return TannerGraph(G.n_checks * m, G.n_vars * m, tuple(edges))


def cover(G: TannerGraph, m: int, seed: int) -> TannerGraph:
    """Random degree-``m`` graph cover with an independent uniform permutation per edge."""
    if m < 1:
        raise ValueError(f"cover degree must be >= 1, got {m}")
    rng = make_rng(seed)
    perms = [fisher_yates(m, rng) for _ in range(G.n_edges)]
    return cover_with_permutations(G, m, perms)


def enumerate_all_covers(G: TannerGraph, m: int, cap: int = DEFAULT_COVER_CAP) -> Iterator[TannerGraph]:
    """Every degree-``m`` cover of ``G`` once, permutation tuples in lexicographic order."""
    required = math.factorial(m) ** G.n_edges
    if required > cap:
        raise CoverBudgetError(required, cap)
    perms = list(permutations(range(m)))
    for choice in product(perms, repeat=G.n_edges):
        yield cover_with_permutations(G, m, choice)


@dataclass(frozen=True)
class ProtoEdge:
    """One protograph edge of a terminated or tail-biting SC base matrix."""

    check: int
    var: int
    component: int
    time: int
    x: int
    y: int
    copy: int


def sc_edges(spreading: EdgeSpreading, kind: str, factor: int) -> list[ProtoEdge]:
    """Edges of ``B_[0, factor-1]`` or ``B_tb^(factor)`` with their provenance.

    The edge order matches ``TannerGraph.from_base`` of the corresponding base
    matrix only up to a permutation; callers that need provenance use this list.
    """
    bc, bv, ms = spreading.b_c, spreading.b_v, spreading.m_s
    if kind == "terminated":
        terminated_base(spreading, factor)  # argument validation
        n_rows = (factor + ms) * bc
    elif kind == "tailbiting":
        tailbiting_base(spreading, factor)
        n_rows = factor * bc
    else:
        raise ValueError(f"unknown kind {kind!r}")
    out = []
    for t in range(factor):
        for i, comp in enumerate(spreading.components):
            for x in range(bc):
                row = (t + i) * bc + x
                if kind == "tailbiting":
                    row %= n_rows
                for y in range(bv):
                    for k in range(int(comp.entries[x, y])):
                        out.append(ProtoEdge(row, t * bv + y, i, t, x, y, k))
    return out


PermSource = Callable[[ProtoEdge], tuple[Sequence[int], Sequence[Sequence[int]]]]


def periodic_sc_graph(
    spreading: EdgeSpreading,
    kind: str,
    factor: int,
    N: int,
    m: int,
    perm_source: PermSource,
) -> TannerGraph:
    """Lift by ``N`` and cover by ``m`` a terminated / tail-biting SC protograph.

    ``perm_source(edge)`` returns ``(lift_perm, cover_perms)`` for a protograph
    edge: a permutation of ``range(N)`` and ``N`` permutations of ``range(m)``.
    Feeding the same periodic source to a long terminated window and to a
    tail-biting graph produces the code pair used by the wrapping argument.
    The combined node index of lift copy ``j`` and cover copy ``k`` of
    protograph node ``u`` is ``(u * N + j) * m + k``.
    """
    rows = (factor + spreading.m_s) * spreading.b_c if kind == "terminated" else factor * spreading.b_c
    edges = []
    for pe in sc_edges(spreading, kind, factor):
        lp, cps = perm_source(pe)
        for j in range(N):
            cj = pe.check * N + j
            vj = pe.var * N + int(lp[j])
            for k in range(m):
                edges.append((cj * m + k, vj * m + int(cps[j][k])))
    return TannerGraph(rows * N * m, factor * spreading.b_v * N * m, tuple(edges))


@dataclass
class RandomPeriodicPerms:
    """Seeded permutation source with period ``period`` in time.

    Permutations are keyed by ``(time mod period, component, x, y, copy)`` and
    drawn lazily in a canonical order, so the same object always serves the
    same permutations regardless of which graph asks first.
    """

    spreading: EdgeSpreading
    period: int
    N: int
    m: int
    seed: int
    _table: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        rng = make_rng(self.seed)
        for t in range(self.period):
            for i, comp in enumerate(self.spreading.components):
                for x in range(self.spreading.b_c):
                    for y in range(self.spreading.b_v):
                        for k in range(int(comp.entries[x, y])):
                            lp = fisher_yates(self.N, rng)
                            cps = [fisher_yates(self.m, rng) for _ in range(self.N)]
                            self._table[(t, i, x, y, k)] = (lp, cps)

    def __call__(self, pe: ProtoEdge):
        return self._table[(pe.time % self.period, pe.component, pe.x, pe.y, pe.copy)]
