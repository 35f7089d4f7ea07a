"""Command line entry point: ``dualpath run|netlib|interior-scan|ecdf``.

Every command writes CSV or JSON only. Output depends on nothing but the
inputs, so re-running with a warm cache reproduces files byte for byte.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import logging
import math
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

from .diagnostics import (
    DegenerateFit,
    TraceTooShort,
    certify,
    classify_regime,
    ecdf,
    summary,
)
from .interior import DEFAULT_DELTAS, has_strict_interior
from .mps import FetchError, MpsError, load_netlib, parse_mps
from .problem import LinearProgram, to_inequality_form
from .problems import BUILTINS, get_builtin
from .solver import SolverConfig, parse_strategy, solve

__all__ = ["TRACE_COLUMNS", "SUMMARY_COLUMNS", "ECDF_COLUMNS", "INTERIOR_COLUMNS", "main"]

logger = logging.getLogger("dualpath")

TRACE_COLUMNS = ("iter", "mu", "eta", "alpha", "primal_inf", "dual_inf", "comp_max", "comp_min",
                 "dual_l1", "max_dual", "strict_comp", "feas_over_mu", "objective")
SUMMARY_COLUMNS = ("problem", "strategy", "status", "iterations", "max_dual_tail",
                   "strict_comp_tail")
ECDF_COLUMNS = ("value", "fraction", "strategy")
INTERIOR_COLUMNS = ("name", "has_interior", "agreement")

# certificate and regime fits use the second half of the run
_FIT_TAIL = 0.5


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# helpers


def _safe(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text)


def _jsonable(v):
    """Replace non-finite floats so the output is strict JSON."""
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):
        return _jsonable(v.item())
    return v


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def _parse_strategies(text: Optional[str]):
    items = [t for t in (text or "").split(",") if t.strip()]
    if not items:
        raise UsageError("at least one strategy is required (--strategy)")
    try:
        return [parse_strategy(t) for t in items]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_deltas(text: Optional[str]):
    if not text:
        return DEFAULT_DELTAS
    try:
        deltas = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"invalid --deltas {text!r}") from None
    if not deltas or not all(d > 0 for d in deltas):
        raise UsageError("--deltas must list positive numbers")
    return deltas


def read_list(path) -> list[str]:
    """Names from a list file, one per line, ``#`` comments, first
    occurrence kept."""
    seen, names = set(), []
    for line in Path(path).read_text().splitlines():
        name = line.split("#")[0].strip()
        if name and name not in seen:
            seen.add(name)
            names.append(name)
    return names


def load_problem(name: str, cache=None):
    """Resolve a builtin name, an MPS path or a NETLIB name.

    Returns ``(label, inequality_problem, linear_program_or_None)``.
    """
    if name in BUILTINS:
        ex = get_builtin(name)
        return name, ex.problem, ex.lp
    path = Path(name)
    if path.suffix.lower() in (".mps", ".gz") and path.is_file():
        text = path.read_bytes()
        if text[:2] == b"\x1f\x8b":
            import gzip

            text = gzip.decompress(text)
        lp = parse_mps(text.decode("ascii"))
        label = path.name.split(".")[0]
        lp.name = label
        return label, to_inequality_form(lp), lp
    lp = load_netlib(name, cache)
    return lp.name, to_inequality_form(lp), lp


def _solver_kwargs(args) -> dict:
    return {"tol": args.tol, "max_iter": args.max_iter, "tau": args.tau,
            "shift": None if args.shift == "unit" else args.shift}


def _run_one(problem, label: str, strategy, cfg: SolverConfig, tail_frac: float) -> dict:
    """Solve once and collect the trace rows and the JSON summary."""
    trace = solve(problem, cfg)
    rows = [[rec.row()[c] for c in TRACE_COLUMNS] for rec in trace.records]
    out = {
        "problem": label,
        "strategy": strategy.label,
        "status": trace.status.value,
        "message": trace.message,
        "config": {"tol": cfg.tol, "max_iter": cfg.max_iter, "tau": cfg.tau,
                   "shift": "unit" if cfg.shift is None else cfg.shift, "tail_frac": tail_frac},
        "summary": summary(trace, tail_frac).as_dict(),
    }
    out["summary"]["problem"] = label
    try:
        out["certificate"] = certify(trace, _FIT_TAIL).as_dict()
    except (TraceTooShort, ValueError) as exc:
        out["certificate"] = None
        out["certificate_error"] = str(exc)
    try:
        reg = classify_regime(trace, _FIT_TAIL)
        out["regime"] = {"regime": reg.regime.value, "p": reg.p, "r2": reg.r2,
                         "n_points": reg.n_points}
    except (TraceTooShort, DegenerateFit, ValueError) as exc:
        out["regime"] = None
        out["regime_error"] = str(exc)
    return {"rows": rows, "json": out}


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _write_run(out_dir: Path, result: dict):
    j = result["json"]
    stem = f"{_safe(j['problem'])}__{_safe(j['strategy'])}"
    _write(out_dir / f"{stem}.csv", _csv_text(TRACE_COLUMNS, result["rows"]))
    _write(out_dir / f"{stem}.json", _dump_json(j))


def _ecdf_rows(summaries: Sequence[dict], strategy_order: Sequence[str]):
    rows = []
    for label in strategy_order:
        vals = [s["max_dual_tail"] for s in summaries
                if s["strategy"] == label and isinstance(s.get("max_dual_tail"), float)]
        if vals:
            rows.extend((v, f, label) for v, f in ecdf(vals))
    return rows


# ---------------------------------------------------------------------------
# commands


def cmd_run(args) -> int:
    strategies = _parse_strategies(args.strategy)
    if not args.problem:
        raise UsageError("--problem is required")
    out_dir = Path(args.out)
    names = [n for n in args.problem.split(",") if n.strip()]
    for name in names:
        label, problem, _ = load_problem(name.strip(), args.cache)
        for st in strategies:
            res = _run_one(problem, label, st, SolverConfig(strategy=st, **_solver_kwargs(args)),
                           args.tail_frac)
            _write_run(out_dir, res)
            j = res["json"]
            print(f"{label} {j['strategy']}: {j['status']} after {j['summary']['iterations']} "
                  f"iterations, tail max_dual {j['summary']['max_dual_tail']:.4g}")
    return 0


def _batch_worker(job):
    name, strat_texts, cfg_kw, cache, tail_frac = job
    results = []
    try:
        label, problem, _ = load_problem(name, cache)
    except FetchError as exc:
        return [{"error": "fetch_error", "problem": name, "strategy": t, "message": str(exc)}
                for t in strat_texts]
    except (MpsError, ValueError, OSError) as exc:
        return [{"error": "parse_error", "problem": name, "strategy": t, "message": str(exc)}
                for t in strat_texts]
    for text in strat_texts:
        st = parse_strategy(text)
        try:
            results.append(_run_one(problem, label, st, SolverConfig(strategy=st, **cfg_kw),
                                    tail_frac))
        except Exception as exc:  # recorded, never aborts the batch
            results.append({"error": "solve_error", "problem": label, "strategy": st.label,
                            "message": f"{type(exc).__name__}: {exc}"})
    return results


def _map(fn, jobs, n_workers: int):
    if n_workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, jobs))


def _names(args) -> list[str]:
    if args.list:
        names = read_list(args.list)
    elif args.problem:
        names = list(dict.fromkeys(n.strip() for n in args.problem.split(",") if n.strip()))
    else:
        raise UsageError("--list or --problem is required")
    if not names:
        raise UsageError("the problem list is empty")
    return names


def cmd_netlib(args) -> int:
    strategies = _parse_strategies(args.strategy)
    names = _names(args)
    texts = [s.label for s in strategies]
    cfg_kw = _solver_kwargs(args)
    jobs = [(n, texts, cfg_kw, args.cache, args.tail_frac) for n in names]
    out_dir = Path(args.out)
    summaries = []
    for results in _map(_batch_worker, jobs, args.jobs):
        for res in results:
            if "error" in res:
                summaries.append({"problem": res["problem"], "strategy": res["strategy"],
                                  "status": res["error"], "iterations": None,
                                  "max_dual_tail": None, "strict_comp_tail": None})
                logger.warning("%s %s: %s", res["problem"], res["strategy"], res["message"])
                continue
            _write_run(out_dir / "runs", res)
            summaries.append(res["json"]["summary"])
    _write(out_dir / "summary.csv",
           _csv_text(SUMMARY_COLUMNS, [[s[c] for c in SUMMARY_COLUMNS] for s in summaries]))
    _write(out_dir / "ecdf.csv", _csv_text(ECDF_COLUMNS, _ecdf_rows(summaries, texts)))
    for s in summaries:
        print(f"{s['problem']} {s['strategy']}: {s['status']}")
    return 0


def _interior_worker(job):
    name, deltas, cache = job
    try:
        _, _, lp = load_problem(name, cache)
        if not isinstance(lp, LinearProgram):
            return (name, "error", False, "not a linear program")
        v = has_strict_interior(lp, deltas)
    except Exception as exc:  # recorded inline
        return (name, "error", False, f"{type(exc).__name__}: {exc}")
    if v.has_interior is None:
        return (name, "error", False, v.error)
    return (name, v.has_interior, v.agreement, "")


def cmd_interior_scan(args) -> int:
    deltas = _parse_deltas(args.deltas)
    names = _names(args)
    rows = _map(_interior_worker, [(n, deltas, args.cache) for n in names], args.jobs)
    for name, _, _, msg in rows:
        if msg:
            logger.warning("%s: %s", name, msg)
    text = _csv_text(INTERIOR_COLUMNS, [r[:3] for r in rows])
    if args.out:
        _write(Path(args.out) / "interior.csv", text)
    sys.stdout.write(text)
    return 0


def cmd_ecdf(args) -> int:
    """Combine JSON run summaries (files or directories) into one ECDF CSV."""
    files = []
    for p in map(Path, args.inputs):
        files.extend(sorted(p.rglob("*.json")) if p.is_dir() else [p])
    summaries = []
    for f in files:
        data = json.loads(f.read_text())
        s = data.get("summary", data)
        if isinstance(s.get("max_dual_tail"), (int, float)):
            summaries.append({"strategy": s["strategy"], "max_dual_tail": float(s["max_dual_tail"])})
    if not summaries:
        raise UsageError("no run summaries found")
    order = list(dict.fromkeys(s["strategy"] for s in summaries))
    if args.strategy:
        order = [st.label for st in _parse_strategies(args.strategy)]
    text = _csv_text(ECDF_COLUMNS, _ecdf_rows(summaries, order))
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualpath", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--strategy", default="same-rate",
                       help="comma list of same-rate, aggressive, slow-shift:<beta>, "
                            "fixed-perturb:<delta>")
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--max-iter", type=int, default=300)
        p.add_argument("--tau", type=float, default=0.995)
        p.add_argument("--tail-frac", type=float, default=0.2)
        p.add_argument("--shift", choices=("unit", "start"), default="unit",
                       help="primal shift r: all ones, or the start point's a + s over mu")

    def source_flags(p):
        p.add_argument("--problem", help="builtin name, MPS path or NETLIB name (comma list)")
        p.add_argument("--cache", help="NETLIB cache directory (default $DUALPATH_CACHE)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("run", help="solve problems and write trace CSV + summary JSON")
    source_flags(p)
    solver_flags(p)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("netlib", help="batch over a NETLIB list, with an ECDF of max_dual")
    source_flags(p)
    solver_flags(p)
    p.add_argument("--list", help="file with one problem name per line")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_netlib)

    p = sub.add_parser("interior-scan", help="strict relative interior verdicts")
    source_flags(p)
    p.add_argument("--list", help="file with one problem name per line")
    p.add_argument("--deltas", help="comma list of bound tightenings")
    p.add_argument("--out", help="directory for interior.csv (stdout always)")
    p.set_defaults(func=cmd_interior_scan)

    p = sub.add_parser("ecdf", help="ECDF of tail max_dual from run summaries")
    p.add_argument("inputs", nargs="+", help="summary JSON files or directories")
    p.add_argument("--strategy", help="restrict and order strategies")
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_ecdf)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (FetchError, MpsError, KeyError, OSError) as exc:
        print(f"dualpath: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
