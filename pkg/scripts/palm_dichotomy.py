"""Palm overlap E[min(theta_n, 1)] for the Bergman and Ginibre ladders side by side."""

import argparse

from rigidlab.dpp import palm_sweep
from rigidlab.measures import bergman, ginibre


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replicas", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--ns", type=int, nargs="+", default=[8, 16, 32, 64, 128, 256])
    args = ap.parse_args()
    berg = palm_sweep(bergman(), args.ns, args.replicas, args.seed)
    gin = palm_sweep(ginibre(), args.ns, args.replicas, args.seed)
    print(f"{'n':>5} {'bergman':>16} {'ginibre':>16}")
    for b, g in zip(berg, gin):
        print(f"{b.n:5d} {b.mean_min:8.4f}+-{b.standard_error:.4f} {g.mean_min:8.4f}+-{g.standard_error:.4f}")


if __name__ == "__main__":
    main()
