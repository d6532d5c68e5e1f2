"""Exact worst-start TV to stationarity of the hit-and-run kernel at small n.

Tabulates the transition matrix for n <= 5 and prints the TV after each step
from the identity and the reversal, at beta = c/n (L1) and c/n^2 (L2).

    python scripts/mixing.py [--n 5] [--steps 10] [--c 0.03125 1 4]
"""
import argparse

from mallows_hitrun.diagnostics import kernel_mixing_profile, mixing_step_bound
from mallows_hitrun.models import L1, L2


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--steps", type=int, default=None)
    ap.add_argument("--c", type=float, nargs="+", default=[1 / 32, 1.0, 4.0])
    args = ap.parse_args()
    n = args.n
    steps = args.steps or mixing_step_bound(n, 2)
    for c in args.c:
        for name, model in (("L1", L1(c / n)), ("L2", L2(c / n ** 2))):
            prof = kernel_mixing_profile(model, n, steps)
            t_mix = next((t for t, v in prof if v < 0.25), None)
            tvs = " ".join(f"{v:.4f}" for _, v in prof)
            print(f"{name} c={c:g}: t_mix(1/4)={t_mix}  TV by step: {tvs}")


if __name__ == "__main__":
    main()
