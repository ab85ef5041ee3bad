"""Drift of H and of the charges X_A against the RK4 step, for a few catalog cases.

Prints, per case, the relative drift at each dt in the ladder and the ratio between
neighbouring rungs (16 for clean fourth-order behaviour), plus the ratio of the final
state errors against a dt/8 reference run.

    python3 scripts/dt_halving.py 3.1.1 3.1.4 3.2.3 --t-end 10
"""
import argparse

import numpy as np

from aef.catalog import load_case
from aef.dynamics import instantiate, integrate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("cases", nargs="*", default=["3.1.1", "3.1.4", "3.2.3"])
    ap.add_argument("--t-end", type=float, default=10.0)
    ap.add_argument("--ladder", type=float, nargs="+", default=[0.04, 0.02, 0.01, 0.005, 0.0025])
    args = ap.parse_args()

    for cid in args.cases:
        inst = instantiate(load_case(cid))
        runs = [integrate(inst, dt=dt, t_end=args.t_end) for dt in args.ladder]
        ref = integrate(inst, dt=args.ladder[-1] / 8, t_end=args.t_end).states[-1]
        print(f"case {cid}  parameters {inst.params}")
        names = list(runs[0].drifts)
        print("  dt        " + "  ".join(f"{n:>9}" for n in names) + "  state err")
        errs = [float(np.max(np.abs(r.states[-1] - ref))) for r in runs]
        for dt, r, e in zip(args.ladder, runs, errs):
            print(f"  {dt:<8.4g}  " + "  ".join(f"{r.drifts[n]:9.2e}" for n in names) + f"  {e:9.2e}")
        print("  ratios")
        for k in range(len(runs) - 1):
            a, b = runs[k].drifts, runs[k + 1].drifts
            cells = [f"{a[n] / b[n]:9.1f}" if b[n] > 0 else f"{'-':>9}" for n in names]
            print(f"  {args.ladder[k]:<8.4g}  " + "  ".join(cells) + f"  {errs[k] / errs[k + 1]:9.1f}")
        print()


if __name__ == "__main__":
    main()
