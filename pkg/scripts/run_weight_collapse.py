"""Normalized importance-weight spectra at initialization (q = N(0, 9 I)).

    python scripts/run_weight_collapse.py --out results/collapse
"""

import argparse
import os

import numpy as np

from alphavi.harness import ExperimentConfig, run_weight_collapse
from alphavi.harness.csvio import emit_csv
from alphavi.harness.plotting import render_plot


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results/collapse")
    parser.add_argument("--dim", default="10,100,1000")
    parser.add_argument("--k", default="10,100,1000")
    parser.add_argument("--replicates", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    cfg = ExperimentConfig(experiment="weight-collapse",
                           dims=[int(d) for d in args.dim.split(",")],
                           ks=[int(k) for k in args.k.split(",")],
                           replicates=args.replicates, seed=args.seed, output_dir=args.out)
    result = run_weight_collapse(cfg)
    cfg.to_json(os.path.join(args.out, "collapse_config.json"))

    # median spectrum per (d, K), one plot per d
    cells = {}
    for r in result["spectra"]:
        cells.setdefault((r["d"], r["K"], r["rank"]), []).append(r["weight"])
    medians = [{"d": d, "K": K, "rank": rank, "median_weight": float(np.median(w))}
               for (d, K, rank), w in sorted(cells.items())]
    path = emit_csv(medians, os.path.join(args.out, "collapse_median_spectra.csv"))
    for d in cfg.dims:
        render_plot(path, {"x": "rank", "y": "median_weight", "group": "K", "marker": "o",
                           "logy": True, "filter": {"d": d}, "title": f"d={d}"},
                    os.path.join(args.out, f"spectrum_d{d}.svg"))
    for row in result["summary"]:
        print(f"d={row['d']:5d} K={row['K']:5d} top1={row['median_top1']:.4f} "
              f"top2={row['median_top2']:.4f} top10={row['median_top10']:.4f}")


if __name__ == "__main__":
    main()
