"""``seriesforge`` command line.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 engine error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .analysis import SparseSupportPlan, center_of_distances, natural_density_prefix, restrict, sparse_conditional_support
from .errors import (
    EmptyInput,
    InvalidQuotientMap,
    ModeError,
    NonMonotoneSelector,
    SeriesForgeError,
    StageBudgetExceeded,
)
from .hypernumber import analytical_sum, parse_quotient_map, quotient_series, subnumber_extract
from .indexsets import IndexSet
from .rearrange import constrained_rearrange, parse_target, rearrange_pcc, riemann_rearrange
from .series import Empirical, Mode, classify_pcc, format_scalar, parse_scalar, parse_series, topological_sum
from .verify import load_run, run_to_dict, verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ENGINE = 0, 1, 2, 3

_USAGE_ERRORS = (ModeError, InvalidQuotientMap, NonMonotoneSelector, EmptyInput)


class _Usage(Exception):
    pass


def _mode(args) -> Mode:
    return Mode.EXACT if args.mode == "exact" else Mode.FLOAT


def _index_set(text: str) -> IndexSet:
    text = text.strip()
    if text == "all":
        return IndexSet.all()
    if not text.startswith("{"):
        text = Path(text).read_text()
    return IndexSet.from_json(text)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _emit_run(args, result, meta) -> None:
    if args.format == "csv":
        report = verify(result, meta["_source"], meta["_A"])
        _emit(args, report.to_csv().rstrip("\n"))
        return
    clean = {k: v for k, v in meta.items() if not k.startswith("_")}
    text = json.dumps(run_to_dict(result, clean), indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"{result.stages} stages, k_last={result.checkpoints[-1] if result.checkpoints else 0}, "
              f"written to {args.out}")
    else:
        print(text)


def _engine_meta(args, source, A=None) -> dict:
    return {
        "series": args.series,
        "set": A.to_json() if A is not None else None,
        "target": args.target,
        "mode": args.mode,
        "stages": args.stages,
        "_source": source,
        "_A": A,
    }


def _run_engine(args, fn, meta) -> int:
    try:
        result = fn()
    except StageBudgetExceeded as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        if exc.partial is not None and args.out and args.format == "json":
            clean = {k: v for k, v in meta.items() if not k.startswith("_")}
            clean["partial"] = True
            Path(args.out).write_text(json.dumps(run_to_dict(exc.partial, clean), indent=1) + "\n")
            print(f"partial result ({exc.partial.stages} stages) written to {args.out}", file=sys.stderr)
        return EXIT_ENGINE
    _emit_run(args, result, meta)
    return EXIT_OK


# subcommands ---------------------------------------------------------------


def cmd_classify(args) -> int:
    source = parse_series(args.series, _mode(args))
    if args.set:
        source = restrict(source, _index_set(args.set))
    policy = Empirical(horizon=args.horizon) if args.empirical else "analytic"
    _emit(args, json.dumps(classify_pcc(source, policy).to_dict(), indent=1))
    return EXIT_OK


def cmd_riemann(args) -> int:
    mode = _mode(args)
    source = parse_series(args.series, mode)
    target = parse_target(args.target, mode)
    meta = _engine_meta(args, source)
    meta["engine"] = "riemann"
    return _run_engine(args, lambda: riemann_rearrange(
        source, target, args.stages, assume_pcc=args.assume_pcc, budget=args.budget, slack=args.slack), meta)


def cmd_constrain(args) -> int:
    mode = _mode(args)
    source = parse_series(args.series, mode)
    A = _index_set(args.set)
    target = parse_target(args.target, mode)
    meta = _engine_meta(args, source, A)
    meta["engine"] = "constrained"
    meta["policy"] = args.policy
    return _run_engine(args, lambda: constrained_rearrange(
        source, A, target, args.stages, policy=args.policy, assume_cc=args.assume_cc,
        budget=args.budget, slack=args.slack), meta)


def cmd_pcc(args) -> int:
    mode = _mode(args)
    source = parse_series(args.series, mode)
    target = parse_target(args.target, mode)
    meta = _engine_meta(args, source, IndexSet.all())
    meta["engine"] = "pcc"
    return _run_engine(args, lambda: rearrange_pcc(
        source, target, args.stages, assume_pcc=args.assume_pcc, budget=args.budget, slack=args.slack), meta)


def cmd_sparse(args) -> int:
    source = parse_series(args.series, _mode(args))
    plan = SparseSupportPlan(separation=args.separation)
    if args.budget:
        plan.term_budget = args.budget
    support = sparse_conditional_support(source, plan, blocks=args.blocks, assume_cc=args.assume_cc)
    if args.format == "csv":
        rows = ["j,start,end,pos_sum,neg_sum,density"]
        for b in support.blocks:
            d = b.to_dict()
            rows.append(f"{b.j},{b.start},{b.end},{d['pos_sum']},{d['neg_sum']},{d['density']}")
        _emit(args, "\n".join(rows))
    else:
        _emit(args, json.dumps(support.to_dict(), indent=1))
    return EXIT_OK


def cmd_quotient(args) -> int:
    source = parse_series(args.series, _mode(args))
    p = parse_quotient_map(args.map)
    q = quotient_series(source, p)
    n = args.terms if p.size is None else min(args.terms, p.size)
    _emit(args, ",".join(_plain(q(i)) for i in range(1, n + 1)))
    return EXIT_OK


def _selector(text: str):
    """``k*n``, ``k*n+c``, ``n+c`` or an explicit comma list."""
    t = text.replace(" ", "")
    if "n" not in t:
        return [int(x) for x in t.split(",") if x]
    lhs, plus, c = t.partition("+")
    if not plus and "-" in lhs[1:]:
        lhs, _, c = lhs.rpartition("-")
        c = "-" + c
    k = lhs[:-2] if lhs.endswith("*n") else ("1" if lhs == "n" else None)
    if k is None:
        raise _Usage(f"bad selector {text!r}")
    k, c = int(k), int(c or 0)
    return lambda n: k * n + c


def cmd_subnumber(args) -> int:
    source = parse_series(args.series, _mode(args))
    sel = _selector(args.selector)
    need = max(sel) if isinstance(sel, list) else sel(args.terms)
    rep = analytical_sum(source, need)
    sub = subnumber_extract(rep, sel if isinstance(sel, list) else sel)
    n = sub.length if sub.length is not None else args.terms
    n = min(n, args.terms)
    _emit(args, ",".join(_plain(sub(i)) for i in range(1, n + 1)))
    return EXIT_OK


def cmd_verify(args) -> int:
    run = load_run(args.run)
    report = verify(run.result, run.source, run.A, slack=args.slack)
    payload = report.to_dict()
    payload["targets_match_declared"] = run.targets_match
    if args.format == "csv":
        _emit(args, report.to_csv().rstrip("\n"))
    else:
        _emit(args, json.dumps(payload, indent=1))
    ok = report.overall and run.targets_match
    if not ok:
        where = report.failed_stages
        print(f"verification failed at stages {where}" if where else "verification failed", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def _plain(v) -> str:
    if isinstance(v, Fraction) and v.denominator == 1:
        return str(v.numerator)
    return format_scalar(v)


def cmd_center(args) -> int:
    mode = _mode(args)
    pts = [parse_scalar(x, mode) for x in args.points.split(",") if x.strip()]
    z = sorted(center_of_distances(pts))
    _emit(args, ",".join(_plain(v) for v in z))
    return EXIT_OK


def cmd_density(args) -> int:
    d = natural_density_prefix(_index_set(args.set), args.N)
    _emit(args, _plain(d))
    return EXIT_OK


def cmd_topsum(args) -> int:
    source = parse_series(args.series, _mode(args))
    tol = Fraction(args.tol) if _mode(args) is Mode.EXACT else float(args.tol)
    r = topological_sum(source, tol)
    _emit(args, json.dumps({"value": r.value if r.value is None else format_scalar(r.value),
                            "status": r.status, "index": r.index,
                            "error_bound": None if r.error_bound is None else format_scalar(r.error_bound)},
                           indent=1))
    return EXIT_OK


# parser --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--mode", choices=("exact", "float"), default="exact")
    common.add_argument("--slack", type=float, default=None, help="FLOAT-mode numerical slack")
    common.add_argument("--out", default=None, help="write output to this file")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    engine = _Parser(add_help=False)
    engine.add_argument("--series", required=True)
    engine.add_argument("--target", required=True)
    engine.add_argument("--stages", type=int, required=True)
    engine.add_argument("--budget", type=int, default=None, help="per-stage term budget")

    p = _Parser(prog="seriesforge", description="Rearrangements of conditionally convergent series.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("classify", parents=[common], help="pcc classification")
    s.add_argument("--series", required=True)
    s.add_argument("--set", default=None, help="classify the restriction to this index set")
    s.add_argument("--empirical", action="store_true")
    s.add_argument("--horizon", type=int, default=10**5)
    s.set_defaults(fn=cmd_classify)

    s = sub.add_parser("riemann", parents=[common, engine], help="classical greedy rearrangement")
    s.add_argument("--assume-pcc", action="store_true")
    s.set_defaults(fn=cmd_riemann)

    s = sub.add_parser("constrain", parents=[common, engine], help="rearrangement fixed off a set")
    s.add_argument("--set", required=True, help="IndexSet JSON, inline or a path")
    s.add_argument("--policy", choices=("auto", "sup", "realized"), default="auto")
    s.add_argument("--assume-cc", action="store_true")
    s.set_defaults(fn=cmd_constrain)

    s = sub.add_parser("pcc-rearrange", parents=[common, engine], help="convergentize then track")
    s.add_argument("--assume-pcc", action="store_true")
    s.set_defaults(fn=cmd_pcc)

    s = sub.add_parser("sparse-support", parents=[common], help="density-zero conditional support")
    s.add_argument("--series", required=True)
    s.add_argument("--blocks", type=int, required=True)
    s.add_argument("--separation", type=int, default=4)
    s.add_argument("--budget", type=int, default=None)
    s.add_argument("--assume-cc", action="store_true")
    s.set_defaults(fn=cmd_sparse)

    s = sub.add_parser("quotient", parents=[common], help="quotient series terms")
    s.add_argument("--series", required=True)
    s.add_argument("--map", required=True, help="j0, j1, inline JSON or path")
    s.add_argument("--terms", type=int, default=20)
    s.set_defaults(fn=cmd_quotient)

    s = sub.add_parser("subnumber", parents=[common], help="subsequence of partial sums")
    s.add_argument("--series", required=True)
    s.add_argument("--selector", required=True, help="k*n, k*n+c, or a comma list")
    s.add_argument("--terms", type=int, default=20)
    s.set_defaults(fn=cmd_subnumber)

    s = sub.add_parser("verify", parents=[common], help="independently re-check a run file")
    s.add_argument("--run", required=True)
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("center", parents=[common], help="center of distances of a point set")
    s.add_argument("--points", required=True)
    s.set_defaults(fn=cmd_center)

    s = sub.add_parser("density", parents=[common], help="prefix density |A ∩ [1,N]|/N")
    s.add_argument("--set", required=True)
    s.add_argument("--N", type=int, required=True)
    s.set_defaults(fn=cmd_density)

    s = sub.add_parser("topsum", parents=[common], help="sum of a series to a tolerance")
    s.add_argument("--series", required=True)
    s.add_argument("--tol", required=True)
    s.set_defaults(fn=cmd_topsum)
    return p


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except (_Usage, ValueError, KeyError, OSError, json.JSONDecodeError, *_USAGE_ERRORS) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SeriesForgeError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE


def main() -> None:
    sys.exit(run_cli())
