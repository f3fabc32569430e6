"""Free pseudodistance growth-rate bounds from tail-biting and terminated sweeps.

A tail-biting ensemble with factor lambda gives the lower bound
``delta_tb(lambda) * lambda / (m_s + 1)`` and a terminated ensemble with
factor L the upper bound ``delta_t(L) * L / (m_s + 1)``; both are normalised
by the decoding constraint length ``N (m_s + 1) b_v``.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .enumerator.crossing import DEFAULT_BISECT_TOL, DEFAULT_GRID_STEP, zero_crossing
from .enumerator.solver import GrowthOptions
from .protograph import EdgeSpreading, tailbiting_base, terminated_base

__all__ = [
    "DEFAULT_COINCIDENCE_TOL",
    "FreeGrowthRateReport",
    "SWEEP_COLUMNS",
    "SweepCache",
    "SweepPoint",
    "free_growth_rate_bounds",
    "tailbiting_growth_rate",
    "terminated_growth_rate",
]

DEFAULT_COINCIDENCE_TOL = 2e-3
SWEEP_COLUMNS = ("kind", "factor", "m", "delta_min", "bound")
LOWER_BOUND_SCALING = "factor/(m_s+1)"


class SweepCache:
    """Memo of crossings keyed by (base matrix, m, solver settings); optionally persisted as JSON."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._data: dict[str, float | None] = {}
        if self.path and self.path.exists():
            self._data = json.loads(self.path.read_text())

    @staticmethod
    def key(B, m: int, opts: GrowthOptions, grid_step: float, bisect_tol: float) -> str:
        return json.dumps([B.key()[0], B.key()[1], m, asdict(opts), grid_step, bisect_tol])

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def __getitem__(self, key: str):
        return self._data[key]

    def __setitem__(self, key: str, value):
        self._data[key] = value
        if self.path:
            self.path.write_text(json.dumps(self._data))


def _crossing(B, m, opts, grid_step, bisect_tol, cache):
    opts = opts or GrowthOptions()
    if cache is None:
        return zero_crossing(B, m, opts, grid_step, bisect_tol).r_plus
    key = SweepCache.key(B, m, opts, grid_step, bisect_tol)
    if key not in cache:
        cache[key] = zero_crossing(B, m, opts, grid_step, bisect_tol).r_plus
    return cache[key]


def tailbiting_growth_rate(spreading: EdgeSpreading, lam: int, m: int, opts: GrowthOptions | None = None,
                           grid_step: float = DEFAULT_GRID_STEP, bisect_tol: float = DEFAULT_BISECT_TOL,
                           cache: SweepCache | None = None) -> float | None:
    return _crossing(tailbiting_base(spreading, lam), m, opts, grid_step, bisect_tol, cache)


def terminated_growth_rate(spreading: EdgeSpreading, L: int, m: int, opts: GrowthOptions | None = None,
                           grid_step: float = DEFAULT_GRID_STEP, bisect_tol: float = DEFAULT_BISECT_TOL,
                           cache: SweepCache | None = None) -> float | None:
    return _crossing(terminated_base(spreading, L), m, opts, grid_step, bisect_tol, cache)


def _solve_point(args):
    kind, spreading, f, m, opts, grid_step, bisect_tol = args
    B = tailbiting_base(spreading, f) if kind == "tailbiting" else terminated_base(spreading, f)
    return zero_crossing(B, m, opts, grid_step, bisect_tol).r_plus


def _prefill(spreading, m, factors, kinds, opts, grid_step, bisect_tol, cache, workers):
    jobs = {}
    for kind in kinds:
        for f in factors:
            try:
                B = tailbiting_base(spreading, f) if kind == "tailbiting" else terminated_base(spreading, f)
            except ValueError:
                continue  # reported by the serial pass
            key = SweepCache.key(B, m, opts, grid_step, bisect_tol)
            if key not in cache and key not in jobs:
                jobs[key] = (kind, spreading, f, m, opts, grid_step, bisect_tol)
    if not jobs:
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for key, r_plus in zip(jobs, pool.map(_solve_point, jobs.values())):
            cache[key] = r_plus


@dataclass(frozen=True)
class SweepPoint:
    kind: str
    factor: int
    m: int
    delta_min: float | None
    bound: float | None
    error: str | None = None


@dataclass
class FreeGrowthRateReport:
    m: int
    best_lower: float | None
    best_upper: float | None
    coincide_at: int | None
    delta_free: float | None
    tol: float
    points: list[SweepPoint] = field(default_factory=list)
    ordering_violations: list[int] = field(default_factory=list)
    lower_bound_scaling: str = LOWER_BOUND_SCALING
    seed: int | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("points")
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def sweep_csv(points) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for p in points:
        w.writerow([
            p.kind,
            p.factor,
            p.m,
            "" if p.delta_min is None else f"{p.delta_min:.10g}",
            "" if p.bound is None else f"{p.bound:.10g}",
        ])
    return buf.getvalue()


def free_growth_rate_bounds(
    spreading: EdgeSpreading,
    m: int,
    factors,
    tol: float = DEFAULT_COINCIDENCE_TOL,
    opts: GrowthOptions | None = None,
    grid_step: float = DEFAULT_GRID_STEP,
    bisect_tol: float = DEFAULT_BISECT_TOL,
    cache: SweepCache | None = None,
    kinds=("tailbiting", "terminated"),
    progress=None,
    workers: int = 1,
) -> FreeGrowthRateReport:
    """Sweep both kinds over ``factors`` and combine the bounds.

    ``coincide_at`` is the smallest factor whose two bounds differ by less
    than ``tol``; ``delta_free`` is then the midpoint of the tightest bounds.
    A point that fails is recorded with its error and the sweep continues.
    With ``workers > 1`` the missing crossings are solved in a process pool
    first; results are identical to the serial sweep.
    """
    factors = sorted(set(int(f) for f in factors))
    if not factors:
        raise ValueError("factor range is empty")
    opts = opts or GrowthOptions()
    scale = spreading.m_s + 1
    points: list[SweepPoint] = []
    solvers = {"tailbiting": tailbiting_growth_rate, "terminated": terminated_growth_rate}
    if workers > 1:
        cache = cache if cache is not None else SweepCache()
        _prefill(spreading, m, factors, kinds, opts, grid_step, bisect_tol, cache, workers)
    for kind in kinds:
        for f in factors:
            try:
                delta = solvers[kind](spreading, f, m, opts, grid_step, bisect_tol, cache)
                bound = None if delta is None else delta * f / scale
                point = SweepPoint(kind, f, m, delta, bound)
            except (ValueError, RuntimeError) as exc:
                point = SweepPoint(kind, f, m, None, None, str(exc))
            points.append(point)
            if progress:
                progress(point)

    lower = {p.factor: p.bound for p in points if p.kind == "tailbiting" and p.bound is not None}
    upper = {p.factor: p.bound for p in points if p.kind == "terminated" and p.bound is not None}
    best_lower = max(lower.values()) if lower else None
    best_upper = min(upper.values()) if upper else None
    common = sorted(set(lower) & set(upper))
    violations = [f for f in common if lower[f] > upper[f] + tol]
    coincide_at = next((f for f in common if abs(upper[f] - lower[f]) < tol), None)
    delta_free = None
    if coincide_at is not None and best_lower is not None and best_upper is not None:
        delta_free = 0.5 * (best_lower + best_upper)
    return FreeGrowthRateReport(
        m=m,
        best_lower=best_lower,
        best_upper=best_upper,
        coincide_at=coincide_at,
        delta_free=delta_free,
        tol=tol,
        points=points,
        ordering_violations=violations,
        seed=opts.seed,
    )
