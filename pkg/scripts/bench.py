"""Per-step timings of both samplers over a range of n, beta*n held fixed.

    python scripts/bench.py [--sizes 250 500 1000 2000] [--out results/bench.csv]
"""
import argparse
import csv
import pathlib

from mallows_hitrun.cli import bench_model
from mallows_hitrun.models import L1, L2, TwoParam


def models(n):
    return {"l1": L1(1 / n), "l2": L2(1 / n ** 2), "twoparam": TwoParam(1 / n, 1.0)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000, 2000])
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--out", default="results/bench.csv")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = []
    for n in args.sizes:
        for name, model in models(n).items():
            hr_mean, hr_med = bench_model(model, n, "hitrun", args.steps)
            mh_mean, mh_med = bench_model(model, n, "metropolis", 20 * args.steps)
            rows.append((name, n, f"{hr_mean:.4f}", f"{hr_med:.4f}", f"{mh_mean * 1e3:.3f}", f"{mh_med * 1e3:.3f}",
                         f"{hr_med / mh_med:.0f}"))
            print(f"{name:9s} n={n:5d}  hitrun {hr_med:8.3f} ms  metropolis {mh_med * 1e3:7.2f} us  "
                  f"ratio {hr_med / mh_med:6.0f}")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("model", "n", "hitrun_mean_ms", "hitrun_median_ms", "metropolis_mean_us",
                    "metropolis_median_us", "ratio"))
        w.writerows(rows)


if __name__ == "__main__":
    main()
