"""Command line entry point: ``jetrigidity verify`` / ``jetrigidity list``."""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence

from . import __version__
from .jetcore import DEFAULT_MAX_ORDER
from .rigidity import LINEARIZATION
from .scenario import Scenario, ScenarioError, builtin_catalog, builtin_text, load_builtin, parse_file, run_scenario

REPORT_SCHEMA = "jetrigidity-report"
REPORT_SCHEMA_VERSION = 1

CONVENTIONS = {
    "monomial_order": "graded lexicographic, x1 > x2 > ...; jets centered at the chart origin",
    "linearization": LINEARIZATION,
    "isometry_jet": "f in Iso^k iff f^*sigma agrees with sigma to order k-1 (modulo the sub-Riemannian gauge)",
    "prolonged_dims": "iso_jet_dims reports the image of Killing (k+depth)-jets in k-jets",
}


def _run_one(args):
    sc, max_order, emit, timings = args
    t0 = time.perf_counter()
    rep = run_scenario(sc, max_order, emit)
    if timings:
        rep["wall_time_s"] = round(time.perf_counter() - t0, 4)
    return rep


def collect(files: Sequence[str], builtins: Sequence[str]) -> List[Scenario]:
    scenarios: List[Scenario] = []
    for b in builtins:
        names = list(builtin_catalog()) if b == "all" else [b]
        for name in names:
            scenarios.extend(load_builtin(name))
    for path in files:
        scenarios.extend(parse_file(path))
    seen = set()
    for sc in scenarios:
        if sc.name in seen:
            raise ScenarioError(f"duplicate scenario name {sc.name!r} ({sc.source})")
        seen.add(sc.name)
    return scenarios


def run_scenarios(scenarios: Sequence[Scenario], max_order: int = DEFAULT_MAX_ORDER, jobs: int = 1,
                  emit_witnesses: bool = False, timings: bool = False) -> dict:
    """Run scenarios (optionally in worker processes) and assemble the report in name order."""
    work = [(sc, max_order, emit_witnesses, timings) for sc in scenarios]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_one, work))
    else:
        results = [_run_one(w) for w in work]
    results.sort(key=lambda r: r["name"])
    totals = {s: 0 for s in ("pass", "fail", "error", "report")}
    check_totals = {s: 0 for s in ("pass", "fail", "error", "report")}
    for r in results:
        totals[r["status"]] += 1
        for row in r.get("steps", []) + r.get("checks", []):
            check_totals[row["outcome"]] += 1
    return {
        "schema": REPORT_SCHEMA,
        "schema_version": REPORT_SCHEMA_VERSION,
        "engine_version": __version__,
        "conventions": CONVENTIONS,
        "flags": {"max_order": max_order, "emit_witnesses": emit_witnesses},
        "scenarios": results,
        "totals": {"scenarios": len(results), "by_status": totals, "rows": check_totals},
        "ok": totals["fail"] == 0 and totals["error"] == 0,
    }


# ---------------------------------------------------------------- rendering

def _summary(row: dict) -> str:
    if row["outcome"] == "error":
        return row["error"]
    res = row.get("result", {})
    op = row.get("op") or row.get("step")
    if op == "subrigidity":
        s = f"holds={res['holds']} audit={res['dims_audit']}"
        if "witness_rechecked" in res:
            s += f" witness_rechecked={res['witness_rechecked']}"
        return s
    if op == "map_isometry":
        s = f"verdict={res['verdict']} defect={res['defect']}"
        if "jet_equals_identity" in res:
            s += f" jet=id:{res['jet_equals_identity']}"
        return s
    if op == "max_isometry_order":
        return f"max_order={res['max_order']}"
    if op == "killing_dims":
        return f"depth={res['depth']} dims={list(res['dims'].values())}"
    if op == "iso_jet_dims":
        return f"depth={res['depth']} dims={list(res['dims'].values())} trend={res['trend']}"
    if op == "classify":
        return f"class={res['class']}"
    if op == "generalized_conformal":
        return f"shape={res['shape']}"
    if op == "lorentz_span":
        return " ".join(f"k={k}:{v['lorentz_span_dim']}/{v['killing_dim']}" for k, v in res["per_order"].items())
    if op == "pipeline_coherence":
        return f"maps={len(res['maps'])}"
    if op == "prolongation":
        return f"{res['algebra']} dims={res['dims']} rechecked={res['basis_rechecked']}"
    if op == "finite_type":
        return f"{res['algebra']} finite_type_order={res['finite_type_order']}"
    if op == "duality":
        return " vs ".join(f"{k}:{v}" for k, v in res["dims"].items())
    if op == "normalize":
        return f"f={res['f']} order={res['order']}"
    if op == "reeb":
        return f"R={res['reeb']} order={res['order']}"
    if op == "extend":
        a = res["order_audit"]
        return f"hbar order={res['order']} (input {a['input']} -> {a['hbar']})"
    if op == "quotient":
        return f"c={res['c']} generic={res['generic']}"
    if op == "lift":
        return f"delta={res['delta']}"
    return ""


def render_table(report: dict) -> str:
    lines = [f"jetrigidity {report['engine_version']}  (report schema {report['schema_version']}, "
             f"max order {report['flags']['max_order']})"]
    for sc in report["scenarios"]:
        lines.append(f"{sc['status'].upper():6} {sc['name']}")
        if sc["status"] == "error" and "error" in sc:
            lines.append(f"         {sc['error']}")
        for row in sc.get("steps", []):
            lines.append(f"    {row['outcome']:6} step {row['step']:<22} {_summary(row)}")
        for row in sc.get("checks", []):
            params = " ".join(f"{k}={v}" for k, v in row["params"].items() if not isinstance(v, (dict, list))
                              or k in ("ks",))
            lines.append(f"    {row['outcome']:6} {row['op']:<18} {params:<24} {_summary(row)}")
            if "note" in row:
                lines.append(f"           note: {row['note']}")
    t = report["totals"]
    lines.append(f"scenarios: {t['scenarios']}  " + "  ".join(f"{k}={v}" for k, v in t["by_status"].items()))
    lines.append("OK" if report["ok"] else "FAILED")
    return "\n".join(lines) + "\n"


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------- argparse

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jetrigidity", description="Exact jet-level rigidity checks for geometric structures.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run scenario files and/or builtins")
    v.add_argument("files", nargs="*", help="scenario JSON files")
    v.add_argument("--builtin", action="append", default=[], metavar="NAME|all",
                   help="builtin scenario (repeatable); 'all' runs the whole catalog")
    v.add_argument("--max-order", type=int, default=DEFAULT_MAX_ORDER,
                   help=f"largest jet order a check may ask for (default {DEFAULT_MAX_ORDER})")
    v.add_argument("--report", choices=("table", "json"), default="table")
    v.add_argument("-o", "--output", help="write the report to this file instead of stdout")
    v.add_argument("--jobs", type=int, default=1, help="worker processes (output order is unaffected)")
    v.add_argument("--emit-witnesses", action="store_true", help="include serialized witness jets")
    v.add_argument("--timings", action="store_true", help="add wall times (makes the report non-reproducible)")

    sub.add_parser("list", help="print the builtin catalog")
    s = sub.add_parser("show", help="print a builtin scenario file")
    s.add_argument("name")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name, info in builtin_catalog().items():
            print(f"{name:36} {info['description']}")
        return 0
    if args.command == "show":
        try:
            sys.stdout.write(builtin_text(args.name))
        except ScenarioError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        return 0
    if args.jobs < 1 or args.max_order < 1:
        print("error: --jobs and --max-order must be positive", file=sys.stderr)
        return 2
    try:
        scenarios = collect(args.files, args.builtin)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = run_scenarios(scenarios, args.max_order, args.jobs, args.emit_witnesses, args.timings)
    text = render_json(report) if args.report == "json" else render_table(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report["ok"] else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
