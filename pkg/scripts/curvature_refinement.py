"""Finite-difference Riemann magnitude of the flat and the KN metrics under step refinement."""

import argparse
import math

from zgkn.charts import SpacetimeParams
from zgkn.metric import chart_metric, curvature_scan

REGIONS = {
    "spheroidal": ((0.5, 3.0), (0.2, math.pi - 0.2)),
    "tilde": ((1.5, 4.0), (0.2, math.pi - 0.2)),
    "ring": ((0.5, 3.0), (-0.8, 0.8)),
    "weyl": ((0.1, 3.0), (-2.0, 2.0)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=float, nargs="+", default=[4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3, 1e-3])
    ap.add_argument("--samples", type=int, default=6)
    args = ap.parse_args()
    zg = SpacetimeParams(a=1.0)
    n = (args.samples, args.samples)
    for chart, region in REGIONS.items():
        m = chart_metric(chart, zg)
        row = [curvature_scan(m, region, h, n, richardson=False) for h in args.steps]
        print(f"{chart:10s} " + " ".join(f"{v:9.2e}" for v in row))
    kn = chart_metric("kn", SpacetimeParams(q=1, m=1, a=3, kappa=2))
    row = [curvature_scan(kn, ((1.0, 2.0), (0.5, math.pi - 0.5)), h, (4, 4)) for h in args.steps]
    print(f"{'kn':10s} " + " ".join(f"{v:9.2e}" for v in row))
    print(f"{'step':10s} " + " ".join(f"{h:9.1e}" for h in args.steps))


if __name__ == "__main__":
    main()
