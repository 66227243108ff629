"""Collision-vs-density campaign for both propagation models, plus gnuplot files.

    python scripts/reproduce_fig5.py --out fig5 --replicates 20
"""

import argparse

import numpy as np
from scipy import stats

from ringcoord.experiment import ExperimentPlan, emit_plots, run_campaign


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="fig5")
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--step", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--precision", type=int, default=None,
                    help="round coordinates to this many decimals before comparing")
    args = ap.parse_args()

    plan = ExperimentPlan(nodes=list(range(50, 751, args.step)), replicates=args.replicates,
                          models=["freespace", "shadowing"], seed=args.seed, out=args.out,
                          precision=args.precision)
    summary = run_campaign(plan)
    for model, rep in summary.aggregates.items():
        print(f"\n{model}: global mean {rep.global_mean:.3f} over {rep.samples} nodes")
        print("  nodes  mean(deg 20-90)")
        xs, ys = [], []
        for count, r in summary.by_count[model].items():
            band = [b for d, b in r.buckets.items() if 20 <= d <= 90]
            for b in band:
                xs.append(count)
                ys.append(b.mean)
            if band:
                w = sum(b.samples for b in band)
                print(f"  {count:5d}  {sum(b.mean * b.samples for b in band) / w:.3f}")
        if len(set(xs)) > 1:
            fit = stats.linregress(xs, ys)
            print(f"  slope vs node count {fit.slope:.2e} (p={fit.pvalue:.2g})")
        band = [b for d, b in rep.buckets.items() if 20 <= d <= 90]
        if band:
            print(f"  buckets below 3: {np.mean([b.mean < 3 for b in band]):.0%}")
    for path in emit_plots(args.out):
        print(path)


if __name__ == "__main__":
    main()
