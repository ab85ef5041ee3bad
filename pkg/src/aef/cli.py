"""Command line: verify, classify, trajectory, list.

Exit codes: 0 everything passed, 1 a check failed, 2 bad usage or input.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import AefError, MetricDegeneration, BlowUp
from .expr import zero_test_settings

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    cases: list[str] = field(default_factory=list)
    all: bool = False
    pattern: str | None = None
    fmt: str = "json"
    out: str | None = None
    seed: int = 0
    tol: float | None = None
    trials: int | None = None
    dt: float = 1e-3
    t_end: float = 10.0
    drift_tol: float = 1e-8
    method: str = "rk4"
    free: bool = False
    jobs: int = 1
    params: dict[str, float] = field(default_factory=dict)
    functions: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(
            command=ns.command, cases=list(ns.case or []), all=getattr(ns, "all", False),
            pattern=getattr(ns, "filter", None), fmt=ns.format, out=ns.out, seed=ns.seed, tol=ns.tol,
            trials=ns.trials, dt=getattr(ns, "dt", 1e-3), t_end=getattr(ns, "t_end", 10.0),
            drift_tol=getattr(ns, "drift_tol", 1e-8), method=getattr(ns, "method", "rk4"),
            free=getattr(ns, "free", False), jobs=getattr(ns, "jobs", 1),
            params=_pairs(getattr(ns, "param", None) or [], float),
            functions=_pairs(getattr(ns, "function", None) or [], str),
        )


class UsageError(Exception):
    pass


def _pairs(items: Sequence[str], conv) -> dict:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"expected NAME=VALUE, got {item!r}")
        try:
            out[key.strip()] = conv(value.strip())
        except ValueError as exc:
            raise UsageError(f"bad value in {item!r}: {exc}") from exc
    return out


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(conv):
    def parse(text: str):
        v = conv(text)
        if v <= 0:
            raise argparse.ArgumentTypeError("must be positive")
        return v

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "md"), default="json")
    common.add_argument("--out", help="output file (a directory for verify)")
    common.add_argument("--seed", type=_seed, default=0, help="zero-test sampling seed")
    common.add_argument("--tol", type=_positive(float), help="zero-test tolerance")
    common.add_argument("--trials", type=_positive(int), help="zero-test points per parameter branch")

    p = argparse.ArgumentParser(prog="aef", description="Admissible electromagnetic fields for the case catalog.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run the check battery on catalog cases")
    v.add_argument("--case", action="append", help="case id (repeatable)")
    v.add_argument("--all", action="store_true", help="every case in the catalog")
    v.add_argument("--jobs", type=_positive(int), default=1)

    c = sub.add_parser("classify", parents=[common], help="print the reduction trace of one case")
    c.add_argument("--case", action="append", required=True)

    t = sub.add_parser("trajectory", parents=[common], help="integrate the charged-particle flow")
    t.add_argument("--case", action="append", required=True)
    t.add_argument("--dt", type=_positive(float), default=1e-3)
    t.add_argument("--t-end", type=_positive(float), default=10.0)
    t.add_argument("--drift-tol", type=_positive(float), default=1e-8)
    t.add_argument("--method", choices=("rk4", "rk4-adaptive"), default="rk4")
    t.add_argument("--free", action="store_true", help="ignore the potential (A = 0)")
    t.add_argument("--param", action="append", metavar="NAME=VALUE", help="fix a parameter")
    t.add_argument("--function", action="append", metavar="NAME=EXPR", help="closed form for a free function")
    t.add_argument("--jobs", type=_positive(int), default=1)

    ls = sub.add_parser("list", parents=[common], help="list catalog cases")
    ls.add_argument("filter", nargs="?", help="glob on case ids, e.g. '3.2.*'")
    ls.add_argument("--case", action="append", help=argparse.SUPPRESS)
    return p


# ---------------------------------------------------------------- workers (top level so they pickle)

def _verify_one(args) -> tuple[dict, str, bool]:
    case_id, seed, trials, tol = args
    from .catalog import load_case
    from .catalog.verify import verify_case

    rep = verify_case(load_case(case_id), seed=seed, trials=trials, tol=tol)
    return rep.to_json(), rep.to_markdown(), rep.passed


def _trajectory_one(args) -> dict:
    case_id, cfg = args
    from .catalog import load_case
    from .dynamics import conservation_report, instantiate, integrate

    case = load_case(case_id)
    inst = instantiate(case, free=cfg.free, params=cfg.params, functions=cfg.functions)
    traj = integrate(inst, dt=cfg.dt, t_end=cfg.t_end, method=cfg.method)
    rep = conservation_report(traj, cfg.drift_tol)
    out = rep.to_json()
    out.update({"potential": "free particle (A = 0)" if cfg.free else "printed potential",
                "dt": cfg.dt, "t_end": cfg.t_end, "method": cfg.method, "steps": traj.steps,
                "parameters": inst.params, "functions": inst.functions,
                "final_state": [float(x) for x in traj.states[-1]]})
    return out


def _map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- commands

def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _select(cfg: RunConfig) -> list[str]:
    from .catalog import case_ids, load_case

    if cfg.all:
        return case_ids()
    if not cfg.cases:
        raise UsageError("give --case ID or --all")
    for cid in cfg.cases:
        load_case(cid)
    return list(dict.fromkeys(cfg.cases))


def cmd_verify(cfg: RunConfig) -> int:
    from .catalog.store import _id_key

    ids = sorted(_select(cfg), key=_id_key)
    results = _map(_verify_one, [(cid, cfg.seed, cfg.trials, cfg.tol) for cid in ids], cfg.jobs)
    reports = [r[0] for r in results]
    summary = {
        "cases": len(reports),
        "passed": sum(r["passed"] for r in reports),
        "failed": {r["case"]: [c["name"] for c in r["checks"] if c["status"] == "fail"]
                   for r in reports if not r["passed"]},
        "documented_discrepancies": sum(d["documented"] for r in reports for d in r["discrepancies"]),
        "undocumented_discrepancies": sum(not d["documented"] for r in reports for d in r["discrepancies"]),
        "seed": cfg.seed,
    }
    md_summary = ["# Verification summary", "", f"{summary['passed']} of {summary['cases']} cases pass.", "",
                  "| case | result | outcome | expected |", "|---|---|---|---|"]
    for r in reports:
        md_summary.append(f"| {r['case']} | {'pass' if r['passed'] else 'FAIL'} | {r['outcome']} | "
                          f"{r['expected_outcome']} |")
    md_summary = "\n".join(md_summary) + "\n"
    if cfg.out:
        d = Path(cfg.out)
        d.mkdir(parents=True, exist_ok=True)
        for (js, md, _), cid in zip(results, ids):
            (d / f"{cid}.json").write_text(_dump(js))
            (d / f"{cid}.md").write_text(md)
        (d / "summary.json").write_text(_dump(summary))
        (d / "summary.md").write_text(md_summary)
        sys.stdout.write(_dump(summary) if cfg.fmt == "json" else md_summary)
    elif cfg.fmt == "json":
        sys.stdout.write(_dump({"summary": summary, "reports": reports}))
    else:
        sys.stdout.write(md_summary + "\n" + "\n".join(r[1] for r in results))
    if summary["failed"]:
        sys.stderr.write("failing checks: " + "; ".join(f"{k}: {', '.join(v)}" for k, v in summary["failed"].items())
                         + "\n")
        return EXIT_FAIL
    return EXIT_OK


def cmd_classify(cfg: RunConfig) -> int:
    from .catalog import load_case
    from .catalog.trace import classify_trace, trace_markdown

    traces = [classify_trace(load_case(cid), seed=cfg.seed, trials=cfg.trials, tol=cfg.tol) for cid in cfg.cases]
    if cfg.fmt == "json":
        _emit(_dump(traces[0] if len(traces) == 1 else traces), cfg.out)
    else:
        _emit("\n".join(trace_markdown(t) for t in traces), cfg.out)
    return EXIT_FAIL if any(t["failed_checks"] for t in traces) else EXIT_OK


def cmd_trajectory(cfg: RunConfig) -> int:
    from .catalog import load_case

    for cid in cfg.cases:
        load_case(cid)
    results = _map(_trajectory_one, [(cid, cfg) for cid in cfg.cases], cfg.jobs)
    if cfg.fmt == "json":
        _emit(_dump(results[0] if len(results) == 1 else results), cfg.out)
    else:
        lines = []
        for r in results:
            lines += [f"# Conservation for case {r['case']} ({r['potential']})", "",
                      f"RK4 method {r['method']}, dt = {r['dt']}, t_end = {r['t_end']}, steps {r['steps']}, "
                      f"tolerance {r['tol']}", "", "| quantity | relative drift | within tolerance |", "|---|---|---|"]
            for name, v in r["drift"].items():
                lines.append(f"| {name} | {v:.3e} | {'yes' if name not in r['violated'] else 'NO'} |")
            lines.append("")
        _emit("\n".join(lines), cfg.out)
    return EXIT_OK if all(r["passed"] for r in results) else EXIT_FAIL


def cmd_list(cfg: RunConfig) -> int:
    from .catalog import list_cases

    items = [s.to_json() for s in list_cases(cfg.pattern)]
    if cfg.fmt == "json":
        _emit(_dump(items), cfg.out)
    else:
        lines = ["| id | label | transitivity | expected | flagged |", "|---|---|---|---|---|"]
        lines += [f"| {s['id']} | {s['bianchi_label']} | {s['transitivity']} | {s['expected_outcome']} | "
                  f"{', '.join(s['flags'])} |" for s in items]
        _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "classify": cmd_classify, "trajectory": cmd_trajectory, "list": cmd_list}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = RunConfig.from_args(ns)
        settings = {"seed": cfg.seed}
        if cfg.tol is not None:
            settings["tol"] = cfg.tol
        if cfg.trials is not None:
            settings["trials"] = cfg.trials
        with zero_test_settings(**settings):
            return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        sys.stderr.write(f"aef: {exc}\n")
        return EXIT_USAGE
    except (BlowUp, MetricDegeneration) as exc:
        sys.stderr.write(f"aef: {exc.code}: {exc}\n")
        return EXIT_FAIL
    except (AefError, KeyError, ValueError) as exc:
        code = getattr(exc, "code", type(exc).__name__)
        sys.stderr.write(f"aef: {code}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
