"""Asymptotic-boundary error of the strip solvers along excision and truncation sweeps.

The inner data are the blow-up profile plus a bounded remainder.  With a zero
remainder the profile is exact and only the far-field and mesh errors remain,
so both remainders are reported.
"""

import argparse
import time

import numpy as np

from zgkn.pdesolver import BoundarySpec, StripGrid, observed_orders, solve_problem
from zgkn.suite import OBSERVATION_RADIUS, asymptotic_sweep, constant_remainder


def zero_remainder(x, y):
    return np.zeros_like(x)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kind", choices=["electric", "magnetic"], nargs="+", default=["electric", "magnetic"])
    ap.add_argument("--h", type=float, default=1 / 128)
    ap.add_argument("--xmax", type=float, default=4.0)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    ap.add_argument("--xmax-sweep", type=float, nargs="+", default=[2.0, 4.0, 8.0])
    args = ap.parse_args()
    for kind in args.kind:
        for name, rem in (("constant", constant_remainder), ("zero", zero_remainder)):
            t0 = time.perf_counter()
            errs = asymptotic_sweep(kind, tuple(args.eps), args.h, args.xmax, OBSERVATION_RADIUS, rem)
            orders = observed_orders(args.eps, errs)
            print(f"{kind:9s} remainder={name:8s} eps={args.eps} window errors="
                  + ", ".join(f"{e:.4e}" for e in errs)
                  + "  orders=" + ", ".join(f"{o:.2f}" for o in orders)
                  + f"  ({time.perf_counter() - t0:.1f}s)")
        domain = "electric" if kind == "electric" else "magnetic"
        bnd = BoundarySpec.asymptotic(kind, domain)
        errs = [solve_problem(kind, StripGrid.from_spacing(domain, xm, 0.25, 1 / 32), bnd).linf_error_in_window(OBSERVATION_RADIUS)
                for xm in args.xmax_sweep]
        print(f"{kind:9s} x_max sweep {args.xmax_sweep}: " + ", ".join(f"{e:.4e}" for e in errs))


if __name__ == "__main__":
    main()
