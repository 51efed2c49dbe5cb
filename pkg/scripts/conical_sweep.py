"""Circumference-to-radius ratio of shrinking loops around the ring and around a smooth point."""

import argparse
import math

from zgkn.charts import SpacetimeParams, SpheroidalPoint
from zgkn.metric import conical_ratio


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-1, 3e-2, 1e-2, 3e-3, 1e-3])
    args = ap.parse_args()
    par = SpacetimeParams(a=args.a)
    control = SpheroidalPoint(args.a, 0.8)
    print(f"{'eps':>8} {'ring ratio - 4pi':>18} {'bound 5 eps 4pi':>16} {'control - 2pi':>16}")
    for eps in args.eps:
        ring = conical_ratio(eps, par) - 4 * math.pi
        ctrl = conical_ratio(eps, par, control) - 2 * math.pi
        print(f"{eps:8.0e} {ring:18.3e} {5 * eps * 4 * math.pi:16.3e} {ctrl:16.3e}")


if __name__ == "__main__":
    main()
