"""Variance certificates for count recovery in a disk: Ginibre succeeds, Bergman stalls."""

import argparse

from rigidlab.dpp import RadialDppModel
from rigidlab.errors import NotAchieved
from rigidlab.measures import bergman, ginibre
from rigidlab.rigidity import DppProcess, certificate_scan, recover_inside_moments


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rank", type=int, default=256)
    ap.add_argument("--delta", type=float, default=1e-3)
    ap.add_argument("--replicas", type=int, default=200)
    args = ap.parse_args()
    gin = DppProcess(RadialDppModel(ginibre(), args.rank))
    c = certificate_scan(gin, "PiecewiseLog", 0, 2.0, args.delta)
    rep = recover_inside_moments(gin, 2.0, 0, c.epsilon, c.L, args.replicas, master_seed=1, kind="PiecewiseLog")
    print(f"ginibre: eps={c.epsilon:.4g} L={c.L:.4g} variance={c.achieved_variance:.3g} "
          f"success={rep.success_rate:.3f}")
    try:
        certificate_scan(DppProcess(RadialDppModel(bergman(), args.rank)), "PiecewiseLog", 0, 0.25, args.delta)
        print("bergman: certificate found")
    except NotAchieved as err:
        eps, L, v = err.best
        print(f"bergman: not achieved, best eps={eps:.4g} L={L:.4g} variance={v:.4f}")


if __name__ == "__main__":
    main()
