"""Schmidt spectrum at a saturated cut against the thermal distribution.

    python3 scripts/schmidt_spectrum.py --theta 0.1 --cut 200
"""

import argparse
import math

from fiberloop.architecture import ArchitectureSpec
from fiberloop.mps import build, canonicalize
from fiberloop.observables import loop_mean_occupation, schmidt_spectrum, thermal_schmidt


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--theta", type=float, default=0.1, help="angle in units of pi")
    p.add_argument("--photons", type=int, default=1)
    p.add_argument("--bins", type=int, default=300)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--cut", type=int, default=200)
    p.add_argument("--count", type=int, default=12)
    args = p.parse_args()

    spec = ArchitectureSpec.single_loop(args.theta * math.pi, (args.photons,) * args.bins, args.dim)
    lam = schmidt_spectrum(canonicalize(build(spec)), args.cut)
    n = loop_mean_occupation(spec, args.cut)
    ref = thermal_schmidt(n, len(lam))
    print(f"# loop occupation n({args.cut}) = {n:.6f}")
    print("k,lambda,thermal,ratio")
    for k in range(min(args.count, len(lam))):
        ratio = lam[k + 1] / lam[k] if k + 1 < len(lam) else float("nan")
        print(f"{k},{lam[k]:.17g},{ref[k]:.17g},{ratio:.17g}")


if __name__ == "__main__":
    main()
