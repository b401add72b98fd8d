"""Print kmax over an (alpha, beta) grid for one family as a text map.

Usage: python3 scripts/region_map.py [family] [N]
"""
import sys

import numpy as np

from grushin import ConstructionError, SpaceModel
from grushin.regions import kmax_closed


def main(family="hyperbolic", N="10"):
    N = float(N)
    alphas = np.linspace(0.0, 3.0, 7)
    betas = np.linspace(0.0, 6.0, 13)
    print(f"kmax for {family}, N={N:g}  (rows alpha, columns beta; '.' infeasible)")
    print("alpha\\beta " + " ".join(f"{b:6.1f}" for b in betas))
    for a in alphas:
        cells = []
        for b in betas:
            try:
                r = kmax_closed(SpaceModel(family, a, b), N)
            except ConstructionError:
                cells.append("     -")
                continue
            cells.append(f"{r.kmax:6.2f}" if r.feasible else "     .")
        print(f"{a:10.2f} " + " ".join(cells))


if __name__ == "__main__":
    main(*sys.argv[1:])
