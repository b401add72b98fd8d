"""Slice curvature-dimension check on a bound that holds and one that fails.

Uses the hyperbolic space with alpha=0.5, beta=2 and N=10: kmax is the
largest K for which the Ricci bound holds, and the slice inequality is
checked at K = kmax and searched for violations at K = kmax + 1.
"""
from grushin import SpaceModel
from grushin.regions import kmax_closed
from grushin.transport import SliceMeasure, cd_slice_check, find_violation


def main():
    sp, N = SpaceModel("hyperbolic", 0.5, 2), 10.0
    K = kmax_closed(sp, N).kmax
    print(f"{sp}, N={N:g}: kmax = {K:.6f}")
    mu0, mu1 = SliceMeasure.bump(sp, 0.6, 0.2), SliceMeasure.bump(sp, 1.4, 0.3)
    res = cd_slice_check(sp, K, N, mu0, mu1)
    print(f"K = kmax: pass={res.passed} min margin={res.min_margin:.3e} W2={res.w2:.6f}")
    v = find_violation(sp, K + 1.0, N, trials=50)
    if v.found:
        print(f"K = kmax + 1: violation on trial {v.trials}, margin {v.margin:.3e}")
    else:
        print(f"K = kmax + 1: no violation in {v.trials} trials")


if __name__ == "__main__":
    main()
