"""Saturated entropy against coupling angle, compared with g(n).

Small angles push the loop towards a thermal state and the entropy towards
the bound.

    python3 scripts/max_entropy_vs_theta.py --photons 1 2
"""

import argparse
import math

import numpy as np

from fiberloop.architecture import ArchitectureSpec
from fiberloop.mps import build, canonicalize
from fiberloop.observables import area_law_bound, entropy_profile


def saturated_entropy(theta_over_pi, n, bins, dim):
    spec = ArchitectureSpec.single_loop(theta_over_pi * math.pi, (n,) * bins, dim)
    return float(entropy_profile(canonicalize(build(spec)))[:bins].max())


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--thetas", type=float, nargs="+", default=[0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45])
    p.add_argument("--photons", type=int, nargs="+", default=[1])
    p.add_argument("--bins", type=int, default=300)
    p.add_argument("--out", default="max_entropy_vs_theta.csv")
    args = p.parse_args()

    rows = []
    for n in args.photons:
        dim = max(10 * n, 12)
        for t in args.thetas:
            # bins needed to saturate grow like 1/sin^2(theta)
            bins = max(args.bins, int(8 / math.sin(t * math.pi) ** 2))
            e = saturated_entropy(t, n, bins, dim)
            rows.append((n, t, e, area_law_bound(n)))
            print(f"n={n} theta={t:.3f}pi  E_max={e:.6f}  g(n)={area_law_bound(n):.6f}")
    np.savetxt(args.out, np.array(rows), delimiter=",", header="n,theta_over_pi,E_max,g_n", comments="", fmt="%.17g")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
