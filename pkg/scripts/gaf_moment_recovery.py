"""Residual variance of the first-moment estimator for zeros of the alpha = 1/2 GAF."""

import argparse

from rigidlab.rigidity import GafProcess, recover_inside_moments, residual_variance_exact


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r0", type=float, default=0.3)
    ap.add_argument("--eps", type=float, default=16.0)
    ap.add_argument("--Ls", type=float, nargs="+", default=[2.0, 4.0, 8.0])
    ap.add_argument("--replicas", type=int, default=400, help="Monte Carlo replicas at the smallest L")
    args = ap.parse_args()
    proc = GafProcess(0.5)
    for L, v in zip(args.Ls, residual_variance_exact(proc, 1, args.r0, args.eps, args.Ls)):
        print(f"L={L:g}: exact residual variance {v:.5f}")
    rep = recover_inside_moments(proc, args.r0, 1, args.eps, args.Ls[0], args.replicas, master_seed=1, predict=True)
    print(f"Monte Carlo at L={args.Ls[0]:g}: {rep.residual_variance[1]:.5f} +- {rep.residual_variance_se[1]:.5f}")


if __name__ == "__main__":
    main()
