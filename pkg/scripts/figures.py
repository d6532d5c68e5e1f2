"""Trace, histogram and autocorrelation data for the n=1000 comparison.

Writes CSV files under ``results/figures`` for L1 with beta=1/n and L2 with
beta=1/n^2, from the identity, hit-and-run against Metropolis. Metropolis is
thinned so both samplers spend about the same wall time per retained sample.

    python scripts/figures.py [--n 1000] [--samples 3000] [--out results/figures]
"""
import argparse
import csv
import pathlib
import time

import numpy as np

from mallows_hitrun.chain import ChainConfig, run_chain
from mallows_hitrun.cli import bench_model
from mallows_hitrun.diagnostics import autocorrelation, effective_sample_size
from mallows_hitrun.models import L1, L2
from mallows_hitrun.perm import Stat, identity

STATS = (Stat.T1, Stat.T2, Stat.T3)
FIELDS = ("t1_fixed_points", "t2_cycle_len_mid", "t3_lis")


def traces(model, n, samples, burn_in, sampler, thin, seed):
    cfg = ChainConfig(seed=seed, steps=(burn_in + samples) * thin, burn_in=burn_in * thin, thinning=thin)
    res = run_chain(model, identity(n), cfg, STATS, sampler=sampler)
    return {f: np.array([getattr(r, f) for r in res.records], dtype=float) for f in FIELDS}


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--samples", type=int, default=3000)
    ap.add_argument("--burn-in", type=int, default=1000)
    ap.add_argument("--max-lag", type=int, default=50)
    ap.add_argument("--out", default="results/figures")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = args.n

    for name, model in (("l1", L1(1 / n)), ("l2", L2(1 / n ** 2))):
        hr_ms, _ = bench_model(model, n, "hitrun", 1000)
        mh_ms, _ = bench_model(model, n, "metropolis", 20000)
        thin = max(1, round(hr_ms / mh_ms))
        t0 = time.perf_counter()
        hr = traces(model, n, args.samples, args.burn_in, "hitrun", 1, seed=1)
        t_hr = time.perf_counter() - t0
        t0 = time.perf_counter()
        mh = traces(model, n, args.samples, args.burn_in, "metropolis", thin, seed=2)
        t_mh = time.perf_counter() - t0

        for label, tr in (("hitrun", hr), ("metropolis", mh)):
            write(out / f"{name}_{label}_trace.csv", ("sample",) + FIELDS,
                  ([k] + [int(tr[f][k]) for f in FIELDS] for k in range(args.samples)))
            for f in FIELDS:
                vals, counts = np.unique(tr[f].astype(int), return_counts=True)
                write(out / f"{name}_{label}_{f}_hist.csv", ("value", "count"), zip(vals.tolist(), counts.tolist()))
        rows = []
        acfs = {(lab, f): autocorrelation(tr[f], args.max_lag) for lab, tr in (("hitrun", hr), ("metropolis", mh))
                for f in FIELDS}
        for lag in range(args.max_lag + 1):
            rows.append([lag] + [f"{acfs[k][lag]:.6f}" for k in acfs])
        write(out / f"{name}_acf.csv", ["lag"] + [f"{lab}_{f}" for lab, f in acfs], rows)

        print(f"{name}: metropolis thinning {thin}, wall time hitrun {t_hr:.1f}s metropolis {t_mh:.1f}s")
        for f in FIELDS:
            print(f"  {f}: mean hitrun {hr[f].mean():.3f} metropolis {mh[f].mean():.3f}; "
                  f"lag-1 acf {acfs['hitrun', f][1]:.3f} vs {acfs['metropolis', f][1]:.3f}; "
                  f"ESS {effective_sample_size(hr[f]):.0f} vs {effective_sample_size(mh[f]):.0f}")


if __name__ == "__main__":
    main()
