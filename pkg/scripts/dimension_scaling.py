"""Vertical distance from the singular line and the resulting exponents.

For each space prints delta, d((0,0),(0,delta)) and log(delta)/log(d),
then the fitted slope of log(delta) against log(d).
"""
import math

import numpy as np

from grushin import infinity, plane
from grushin.geodesics import dimension_slope, vertical_distance

DELTAS = np.geomspace(1e-1, 1e-3, 5)


def main():
    for sp in (plane(1, 1), plane(2, 2), infinity(3, 1)):
        print(sp)
        for delta in DELTAS:
            d = vertical_distance(sp, float(delta))
            print(f"  delta={delta:8.1e}  d={d:.10f}  exponent={math.log(delta) / math.log(d):9.4f}")
        if sp.family.value == "plane":
            print(f"  slope over deltas: {dimension_slope(sp, DELTAS[2:]):.4f}")


if __name__ == "__main__":
    main()
