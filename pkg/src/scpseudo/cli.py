"""Command-line front end: ``scpseudo {construct,growth,sweep,oracle}``.

Exit codes: 0 success, 2 usage, 3 budget refusal, 4 property violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bounds import DEFAULT_COINCIDENCE_TOL, SweepCache, free_growth_rate_bounds, sweep_csv
from .enumerator.alphabet import EnumeratorBudgetError
from .enumerator.crossing import DEFAULT_BISECT_TOL, DEFAULT_GRID_STEP, zero_crossing
from .enumerator.solver import DEFAULT_SEED, GrowthOptions
from .gf2 import (
    Budget,
    DimensionCapError,
    bec_pseudoweight,
    example1_graphs,
    extend_terminated_codeword,
    in_code,
    min_pseudoweight,
    minimum_distance,
    project_pseudocodeword,
    sample_wrap_checks,
    wrap_codeword,
    wrap_pseudocodeword,
)
from .protograph import (
    BaseMatrix,
    CoverBudgetError,
    EdgeSpreading,
    TannerGraph,
    design_rate,
    lift,
    tailbiting_base,
    terminated_base,
)

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_PROPERTY = 0, 2, 3, 4
KINDS = ("terminated", "tailbiting", "block")


class UsageError(Exception):
    pass


def _positive_float(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not val > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return val


def _positive_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return val


def _seed(text: str) -> int:
    val = int(text, 0)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return val


def parse_range(text: str) -> list[int]:
    """``"2..20"`` -> [2, ..., 20]; also accepts a single integer or a comma list."""
    text = text.strip()
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            out = list(range(int(a), int(b) + 1))
        else:
            out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad factor range {text!r}; use a..b") from None
    if not out:
        raise argparse.ArgumentTypeError(f"factor range {text!r} is empty")
    return out


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("values must be >= 1")
    return vals


def load_input(path: str | None):
    """A spreading document, or a document with a plain ``"base"`` matrix (as written by construct)."""
    if path is None:
        raise UsageError("--base is required")
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None
    if isinstance(doc, dict) and "base" in doc and "components" not in doc:
        try:
            return BaseMatrix(doc["base"])
        except (TypeError, ValueError) as exc:
            raise UsageError(f"field 'base': {exc}") from None
    try:
        return EdgeSpreading.from_dict(doc)
    except (TypeError, ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None


def resolve_base(obj, kind: str | None, factor: int | None) -> BaseMatrix:
    if isinstance(obj, BaseMatrix):
        if kind not in (None, "block"):
            raise UsageError("a plain base matrix only supports --kind block")
        return obj
    kind = kind or "block"
    if kind == "block":
        return obj.block
    if factor is None:
        raise UsageError(f"--factor is required for --kind {kind}")
    try:
        return terminated_base(obj, factor) if kind == "terminated" else tailbiting_base(obj, factor)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _options(args) -> GrowthOptions:
    return GrowthOptions(starts=args.starts, seed=args.seed, counting=args.counting)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _companion(out: str, suffix: str) -> Path:
    p = Path(out)
    return p.with_suffix(suffix) if p.suffix != suffix else p.with_name(p.stem + ".extra" + suffix)


def cmd_construct(args) -> int:
    obj = load_input(args.base)
    if isinstance(obj, BaseMatrix):
        raise UsageError("construct needs an edge-spreading document")
    if args.kind is None:
        raise UsageError("--kind is required")
    B = resolve_base(obj, args.kind, args.factor)
    rate_kind = "unterminated" if args.kind == "block" else args.kind
    rate = design_rate(obj, rate_kind, args.factor)
    doc = {
        "kind": args.kind,
        "factor": args.factor,
        "b_c": B.b_c,
        "b_v": B.b_v,
        "base": B.tolist(),
        "design_rate": str(rate),
    }
    _emit(json.dumps(doc), args.out)
    print(f"design rate {rate}", file=sys.stderr)
    return EXIT_OK


def cmd_growth(args) -> int:
    B = resolve_base(load_input(args.base), args.kind, args.factor)
    curve = zero_crossing(B, args.m, _options(args), args.grid_step, args.bisect_tol)
    summary = curve.summary()
    summary.update({"m": args.m, "seed": args.seed, "starts": args.starts, "counting": args.counting})
    summary_text = json.dumps(summary)
    if args.format == "json":
        _emit(summary_text, args.out)
        if args.out:
            _companion(args.out, ".csv").write_text(curve.to_csv())
    else:
        _emit(curve.to_csv(), args.out)
        if args.out:
            _companion(args.out, ".json").write_text(summary_text)
        else:
            print(summary_text, file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    obj = load_input(args.base)
    if isinstance(obj, BaseMatrix):
        raise UsageError("sweep needs an edge-spreading document")
    factors = args.factors or ([args.factor] if args.factor else None)
    if not factors:
        raise UsageError("--factors (or --factor) is required")
    cache = SweepCache(args.cache) if args.cache else SweepCache()
    kinds = ("tailbiting", "terminated") if args.kind in (None, "block") else (args.kind,)
    reports, points = [], []
    for m in args.m_values:
        rep = free_growth_rate_bounds(
            obj, m, factors, tol=args.coincidence_tol, opts=_options(args), grid_step=args.grid_step,
            bisect_tol=args.bisect_tol, cache=cache, kinds=kinds, workers=args.threads,
        )
        reports.append(rep.to_dict())
        points.extend(rep.points)
    report_text = json.dumps(reports if len(reports) > 1 else reports[0], indent=2)
    csv_text = sweep_csv(points)
    if args.format == "json":
        _emit(report_text, args.out)
        if args.out:
            _companion(args.out, ".csv").write_text(csv_text)
    else:
        _emit(csv_text, args.out)
        if args.out:
            _companion(args.out, ".json").write_text(report_text)
        else:
            print(report_text, file=sys.stderr)
    return EXIT_OK


def _example1_doc() -> dict:
    spreading, window, tb = example1_graphs()
    pairs = [[1, 0], [1, 0], [1, 1], [0, 0], [0, 1], [1, 0], [0, 1], [0, 1], [0, 1], [1, 0]]
    c = [b for pair in pairs for b in pair]
    c += [0] * (window.n_vars - len(c))
    w = project_pseudocodeword(c, 2)
    c_hat = wrap_codeword(c, 2, 1, 2, 2)
    w_hat = wrap_pseudocodeword(c, 2, 1, 2, 2)
    return {
        "window_codeword": bool(in_code(window.parity_matrix, c)),
        "w": w.tolist(),
        "c_hat": c_hat.tolist(),
        "w_hat": w_hat.tolist(),
        "tailbiting_codeword": bool(in_code(tb.parity_matrix, c_hat)),
        "p_w": bec_pseudoweight(w),
        "p_w_hat": bec_pseudoweight(w_hat),
    }


def cmd_oracle(args) -> int:
    budget = Budget(samples=args.cover_samples, seed=args.seed)
    doc: dict = {"seed": args.seed}
    violation = False
    if args.example1:
        ex = _example1_doc()
        doc["example1"] = ex
        violation |= not (ex["window_codeword"] and ex["tailbiting_codeword"] and ex["p_w_hat"] <= ex["p_w"])
        spreading = EdgeSpreading(([[1, 1]], [[1, 1]]))
        report = min_pseudoweight(TannerGraph.from_base(tailbiting_base(spreading, 2)), 2, budget)
        doc.update(report.to_dict())
        lam = 2
    else:
        obj = load_input(args.base)
        B = resolve_base(obj, args.kind, args.factor)
        G = lift(B, args.lift, args.seed) if args.lift > 1 else TannerGraph.from_base(B)
        report = min_pseudoweight(G, args.m, budget)
        doc.update(report.to_dict())
        if args.m == 1:
            d = minimum_distance(G.parity_matrix)
            doc["minimum_distance"] = d
            violation |= d != report.w_min
        spreading = obj if isinstance(obj, EdgeSpreading) else None
        lam = args.factor if args.kind == "tailbiting" else None
    if spreading is not None and lam is not None and args.samples > 0:
        tally = sample_wrap_checks(spreading, lam, args.periods, args.lift, args.m if not args.example1 else 2,
                                   args.samples, args.seed)
        doc["wrap"] = tally.to_dict()
        violation |= not tally.ok
    if args.example1 or args.kind == "terminated":
        doc["extension"] = _extension_check(args)
        violation |= not doc["extension"]["ok"]
    _emit(json.dumps(doc), args.out)
    return EXIT_PROPERTY if violation else EXIT_OK


def _extension_check(args) -> dict:
    """Zero-padded terminated cover codewords must satisfy a longer window's checks."""
    from .protograph import RandomPeriodicPerms, periodic_sc_graph
    from .gf2 import nullspace_basis

    spreading = EdgeSpreading(([[1, 1]], [[1, 1]])) if args.example1 else load_input(args.base)
    L = 2 if args.example1 else args.factor
    m = 2 if args.example1 else args.m
    perms = RandomPeriodicPerms(spreading, 2 * L, args.lift, m, args.seed)
    short = periodic_sc_graph(spreading, "terminated", L, args.lift, m, perms)
    long = periodic_sc_graph(spreading, "terminated", 2 * L, args.lift, m, perms)
    checked = passed = 0
    for c in nullspace_basis(short.parity_matrix):
        checked += 1
        passed += in_code(long.parity_matrix, extend_terminated_codeword(c, long.n_vars))
    return {"checked": checked, "passed": passed, "ok": checked == passed}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--base", help="edge-spreading JSON (or a construct output with a 'base' matrix)")
    common.add_argument("--kind", choices=KINDS)
    common.add_argument("--factor", type=_positive_int)
    common.add_argument("--factors", type=parse_range, help="factor range a..b")
    common.add_argument("--m", dest="m_values", type=_int_list, default=[2], help="cover degree(s), e.g. 2 or 2,3")
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    common.add_argument("--starts", type=_positive_int, default=GrowthOptions.starts)
    common.add_argument("--grid-step", type=_positive_float, default=DEFAULT_GRID_STEP)
    common.add_argument("--bisect-tol", type=_positive_float, default=DEFAULT_BISECT_TOL)
    common.add_argument("--coincidence-tol", type=_positive_float, default=DEFAULT_COINCIDENCE_TOL)
    common.add_argument("--counting", choices=("pseudocodeword", "codeword"), default="pseudocodeword")
    common.add_argument("--threads", type=_positive_int, default=1)
    common.add_argument("--out")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="scpseudo", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("construct", parents=[common], help="write a terminated/tail-biting base matrix")
    sub.add_parser("growth", parents=[common], help="growth-rate curve and its zero crossing")
    sw = sub.add_parser("sweep", parents=[common], help="bounds sweep over termination factors")
    sw.add_argument("--cache", help="JSON file memoising crossings across runs")
    o = sub.add_parser("oracle", parents=[common], help="exhaustive pseudoweight and wrapping checks")
    o.add_argument("--example1", action="store_true", help="run the worked two-component example")
    o.add_argument("--lift", type=_positive_int, default=1)
    o.add_argument("--samples", type=int, default=1000, help="wrap-check samples")
    o.add_argument("--periods", type=_positive_int, default=3)
    o.add_argument("--cover-samples", type=_positive_int, default=64)
    return p


COMMANDS = {"construct": cmd_construct, "growth": cmd_growth, "sweep": cmd_sweep, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.m = args.m_values[0]
    if args.command != "sweep" and len(args.m_values) > 1:
        parser.error("only sweep accepts several --m values")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"scpseudo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CoverBudgetError, DimensionCapError, EnumeratorBudgetError) as exc:
        print(f"scpseudo: budget exceeded: {exc}; reduce the instance or raise the cap", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
