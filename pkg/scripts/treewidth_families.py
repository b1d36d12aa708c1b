"""Treewidth growth of loop-architecture families and their cost class.

    python3 scripts/treewidth_families.py --sizes 2 4 8 16
"""

import argparse

from fiberloop.architecture import ArchitectureSpec
from fiberloop.fock import CouplerSpec
from fiberloop.graphs import build_graph, classify_family, num_couplers, treewidth_upper_bound

FAMILIES = {
    "single loop, N grows": lambda k: ("single_loop", 1, k),
    "two-loop tower, N grows": lambda k: ("loop_tower", 2, k),
    "chain with L = N": lambda k: ("loop_chain", k, k),
    "tower with L = N": lambda k: ("loop_tower", k, k),
    "tritter cylinder, 3 rows": lambda k: ("tritter_cylinder", 3, k),
    "tritter cylinder, rows = N": lambda k: ("tritter_cylinder", k, k),
}


def member(kind, loops, bins):
    n = 3 if kind == "tritter_cylinder" else loops
    return ArchitectureSpec(kind, (1,) * bins, (CouplerSpec(0.25),) * n, 2, num_loops=loops)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[2, 3, 4, 6, 8, 12])
    p.add_argument("--heuristic", choices=["min_fill", "min_degree"], default="min_fill")
    args = p.parse_args()

    for name, shape in FAMILIES.items():
        pts = []
        for k in args.sizes:
            g = build_graph(member(*shape(k)))
            pts.append((num_couplers(g), treewidth_upper_bound(g, args.heuristic).bound))
        print(f"{name:28s} {classify_family(pts):17s} (T, tw) = {pts}")


if __name__ == "__main__":
    main()
