"""Compare Re E - (kappa/2)|Phi|^2 and Re E + kappa |Phi|^2 with the norm V on a KN meridian grid."""

import argparse
import math

import numpy as np

from zgkn.charts import SpacetimeParams
from zgkn.ernst import ernst_kn, siegel_gap
from zgkn.metric import orbit_metric


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=1.0)
    ap.add_argument("--m", type=float, default=1.0)
    ap.add_argument("--a", type=float, default=3.0)
    ap.add_argument("--kappa", type=float, default=2.0)
    ap.add_argument("--n", type=int, default=200)
    args = ap.parse_args()
    par = SpacetimeParams(args.q, args.m, args.a, args.kappa)
    dev_plus = dev_gap = 0.0
    v_pos_gap_neg = n_pos = 0
    for r in np.linspace(-4 * par.a, 4 * par.a, args.n):
        for th in np.linspace(0.01, math.pi - 0.01, args.n):
            if r * r + par.a**2 * math.cos(th) ** 2 < 1e-3 * par.a**2:
                continue
            pair = ernst_kn(r, th, par)
            v = orbit_metric(r, th, par)[1]
            gap = siegel_gap(pair, par.kappa)
            dev_plus = max(dev_plus, abs(pair.e_pot.real + par.kappa * abs(pair.phi_pot) ** 2 - v) / (1 + abs(v)))
            dev_gap = max(dev_gap, abs(gap - v) / (1 + abs(v)))
            if v > 0:
                n_pos += 1
                v_pos_gap_neg += gap < 0
    print(f"max |Re E + kappa|Phi|^2 - V| / (1+|V|)     = {dev_plus:.3e}")
    print(f"max |Re E - kappa/2 |Phi|^2 - V| / (1+|V|)  = {dev_gap:.3e}")
    print(f"points with V > 0: {n_pos}; of those with negative Siegel gap: {v_pos_gap_neg}")


if __name__ == "__main__":
    main()
