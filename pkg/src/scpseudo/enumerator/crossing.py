"""First positive zero crossing of r(delta): grid scan, then bisection."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .solver import GrowthOptions, GrowthPoint, growth_rate_at_delta

__all__ = ["CURVE_COLUMNS", "GrowthCurve", "zero_crossing"]

CURVE_COLUMNS = ("delta", "r", "feasible", "starts_used")
DEFAULT_GRID_STEP = 5e-4
DEFAULT_BISECT_TOL = 1e-4


@dataclass
class GrowthCurve:
    """Sampled r(delta) with the crossing ``r_plus``.

    ``r_plus`` is 0.0 when r is already nonnegative at the first grid point
    and ``None`` when no sign change was found up to ``delta_max``.
    """

    points: list[GrowthPoint] = field(default_factory=list)
    r_plus: float | None = None
    grid_step: float = DEFAULT_GRID_STEP
    bisect_tol: float = DEFAULT_BISECT_TOL
    bracket: tuple[float, float] | None = None

    def sorted_points(self) -> list[GrowthPoint]:
        return sorted(self.points, key=lambda p: p.delta)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for p in self.sorted_points():
            w.writerow([
                f"{p.delta:.10g}",
                "" if p.r is None else f"{p.r:.12g}",
                "true" if p.feasible else "false",
                p.starts_used,
            ])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"r_plus": self.r_plus, "grid_step": self.grid_step, "bisect_tol": self.bisect_tol}

    def to_json(self) -> str:
        return json.dumps(self.summary())


def zero_crossing(
    B,
    m: int,
    opts: GrowthOptions | None = None,
    grid_step: float = DEFAULT_GRID_STEP,
    bisect_tol: float = DEFAULT_BISECT_TOL,
    delta_max: float = 1.0,
) -> GrowthCurve:
    """Scan delta = k * grid_step upward until r first becomes nonnegative, then bisect.

    Each solve is warm-started (as one extra start) from the best messages of
    the previous grid point.  Bisection stops once the bracket is narrower
    than ``bisect_tol``; the midpoint is reported.
    """
    if grid_step <= 0 or bisect_tol <= 0:
        raise ValueError("grid_step and bisect_tol must be positive")
    opts = opts or GrowthOptions()
    curve = GrowthCurve(grid_step=grid_step, bisect_tol=bisect_tol)
    curve.points.append(growth_rate_at_delta(B, m, 0.0, opts))

    def solve(delta, warm):
        p = growth_rate_at_delta(B, m, delta, opts, warm_messages=warm)
        curve.points.append(p)
        return p

    warm = None
    lo = 0.0
    k = 1
    hi_point = None
    while k * grid_step <= delta_max + 1e-12:
        delta = round(k * grid_step, 12)
        p = solve(delta, warm)
        if p.feasible and p.r >= 0.0:
            hi_point = p
            break
        if p.feasible:
            warm = p.messages
            lo = delta
        k += 1
    if hi_point is None:
        return curve
    if lo == 0.0:
        curve.r_plus = 0.0
        curve.bracket = (0.0, hi_point.delta)
        return curve
    hi = hi_point.delta
    while hi - lo >= bisect_tol:
        mid = 0.5 * (lo + hi)
        p = solve(mid, warm)
        if p.feasible and p.r >= 0.0:
            hi = mid
        else:
            lo = mid
            if p.feasible:
                warm = p.messages
    curve.r_plus = 0.5 * (lo + hi)
    curve.bracket = (lo, hi)
    return curve
