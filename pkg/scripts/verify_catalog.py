"""Verify every catalog case and write per-case reports plus a summary table.

    python3 scripts/verify_catalog.py --out reports/ --seed 0
"""
import argparse
import json
import time
from pathlib import Path

from aef.catalog import case_ids, load_case
from aef.catalog.verify import summary, verify_case


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="reports")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("pattern", nargs="?", default=None)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for cid in case_ids(args.pattern):
        t0 = time.perf_counter()
        r = verify_case(load_case(cid), seed=args.seed)
        (out / f"{cid}.json").write_text(json.dumps(r.to_json(), indent=2, sort_keys=True) + "\n")
        (out / f"{cid}.md").write_text(r.to_markdown())
        flagged = ", ".join(sorted({d.field for d in r.discrepancies})) or "-"
        print(f"{cid:<12} {'pass' if r.passed else 'FAIL':<5} {r.outcome:<15} differs: {flagged:<28} "
              f"{time.perf_counter() - t0:5.1f} s")
        reports.append(r)
    (out / "summary.json").write_text(json.dumps(summary(reports), indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
