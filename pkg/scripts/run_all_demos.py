"""Run every bundled config and write outputs under out/<name>/."""

import argparse
import sys

from rigidlab import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out")
    args = ap.parse_args()
    status = 0
    for name in cli.demo_names():
        rc = cli.main(["demo", name, "-o", f"{args.out}/{name}"])
        print(f"{name}: exit {rc}")
        status = max(status, rc)
    return status


if __name__ == "__main__":
    sys.exit(main())
