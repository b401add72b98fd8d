"""Exact curvature-dimension feasibility regions.

Ric_{N,V} >= K on the whole open half-space reduces, family by family, to a
handful of K-free inequalities in (alpha, beta, N) plus an explicit upper
bound on K.  With ``ig = 1/(N-2)`` (0 for N = ∞) the two K-free margins

    A = beta - alpha^2 - alpha - ig * beta^2        (dx⊗dx component)
    B = alpha * beta - alpha^2 - alpha               (dy⊗dy component)

are shared by the plane, the hemisphere and the hyperbolic half-plane:

    plane       feasible iff A, B >= 0;  kmax = 0
    sphere      feasible iff A, B >= 0;  kmax = 1 - 3 alpha + beta
    hyperbolic  feasible iff A, B >= 0;  kmax = min(-ig beta^2, beta(alpha-1)) - (alpha-1)^2

The infinity family has no such shortcut; its kmax is the infimum of two
rational functions, found from the real roots of their derivative numerators.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import EffectiveDim, INF, as_dim, ricci_lemma_array
from .errors import DimError, StatementError
from .model import Family, SpaceModel

__all__ = [
    "Binding",
    "RegionResult",
    "Interval",
    "kmax_closed",
    "kmax_numeric",
    "default_grid",
    "refined_kmax_numeric",
    "feasible_beta",
    "feasible_beta_gamma",
    "feasible_n_negative",
    "Statement",
    "Witness",
    "theorem_witness",
]


class Binding(str, enum.Enum):
    """Which Ricci component limits K (or fails, when infeasible)."""

    XX = "xx"
    YY = "yy"
    BOTH = "xx+yy"


@dataclass(frozen=True)
class RegionResult:
    feasible: bool
    kmax: float | None
    binding: Binding
    attained: bool = False
    margins: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "kmax": self.kmax,
            "binding": self.binding.value,
            "attained": self.attained,
            "margins": self.margins,
        }


@dataclass(frozen=True)
class Interval:
    """Closed interval with extended-real endpoints; empty when lo > hi."""

    lo: float
    hi: float

    @classmethod
    def empty(cls) -> "Interval":
        return cls(math.inf, -math.inf)

    @classmethod
    def everything(cls) -> "Interval":
        return cls(-math.inf, math.inf)

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def width(self) -> float:
        return 0.0 if self.is_empty else self.hi - self.lo

    def __contains__(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    def __and__(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else Interval.empty()

    def to_list(self):
        return None if self.is_empty else [self.lo, self.hi]


def _ig(N: EffectiveDim) -> float:
    return 0.0 if N.critical else N.inverse_gap()


def _binding(a: float, b: float) -> Binding:
    if a < b:
        return Binding.XX
    if b < a:
        return Binding.YY
    return Binding.BOTH


def _failing(a: float, b: float) -> Binding:
    if a < 0 <= b:
        return Binding.XX
    if b < 0 <= a:
        return Binding.YY
    return Binding.BOTH


def _check(space: SpaceModel, N: EffectiveDim) -> None:
    if N.critical and not space.unweighted:
        raise DimError(f"N = 2 requires a constant potential, got {space}")


# -- infinity family ---------------------------------------------------------


def _infinity_polys(space: SpaceModel, N: EffectiveDim):
    """Numerators P, Q with rxx = P/x^6 and ryy = Q/x^5 (ascending coefficients)."""
    g, b = space.gamma, space.beta
    ig = _ig(N)
    P = np.polynomial.Polynomial([0.0, 0.0, 6 * g - 1, -2.0, b])
    P = P - ig * np.polynomial.Polynomial([2 * g, 0.0, b]) ** 2
    Q = np.polynomial.Polynomial([2 * g, -1.0, b - 2])
    return P, Q


def _rational_min(num: np.polynomial.Polynomial, power: int) -> tuple[float, float | None]:
    """Minimum of num(x)/x^power over interior critical points (value, argmin)."""
    x = np.polynomial.Polynomial([0.0, 1.0])
    coef = (num.deriv() * x - power * num).coef
    # x = 0 roots are limits, not interior critical points
    nz = np.flatnonzero(coef)
    if nz.size == 0:
        return math.inf, None
    coef = coef[nz[0]:]
    # negligible leading coefficients only produce spurious huge roots
    big = np.flatnonzero(np.abs(coef) > 1e-13 * np.max(np.abs(coef)))
    crit = np.polynomial.Polynomial(coef[: big[-1] + 1])
    if crit.degree() == 0:
        return math.inf, None
    best, arg = math.inf, None
    with np.errstate(all="ignore"):
        roots = crit.roots()
    for r in roots:
        if abs(r.imag) > 1e-9 * max(1.0, abs(r.real)) or r.real <= 0:
            continue
        t = r.real
        # Newton polish on the critical-point equation
        dcrit = crit.deriv()
        with np.errstate(all="ignore"):
            for _ in range(8):
                d = dcrit(t)
                if not d or not math.isfinite(d):
                    break
                t_new = t - crit(t) / d
                if not 0 < t_new < math.inf:
                    break
                t = t_new
            val = num(t) / t**power
        if math.isfinite(val) and val < best:
            best, arg = val, t
    return best, arg


def _kmax_infinity(space: SpaceModel, N: EffectiveDim) -> RegionResult:
    P, Q = _infinity_polys(space, N)
    # x -> 0+ : rxx ~ P(0)/x^6 - ... ; Q(0) = 2 gamma > 0 so ryy -> +inf
    p0, p2, p3 = P.coef[0], P.coef[2], P.coef[3]
    if p0 < 0 or (p0 == 0 and (p2 < 0 or (p2 == 0 and p3 < 0))):
        return RegionResult(False, None, Binding.XX, margins={"x_to_0": "rxx -> -inf"})
    px, ax = _rational_min(P, 6)
    qy, ay = _rational_min(Q, 5)
    # both components tend to 0 as x -> inf, so the infimum is at most 0
    kx, ky = min(px, 0.0), min(qy, 0.0)
    kmax = min(kx, ky)
    attained = (px <= 0 and px == kmax) or (qy <= 0 and qy == kmax)
    margins = {"rxx_min": px if ax is not None else None, "ryy_min": qy if ay is not None else None,
               "rxx_argmin": ax, "ryy_argmin": ay}
    return RegionResult(True, float(kmax), _binding(kx, ky), attained, margins)


# -- public API ---------------------------------------------------------------


def kmax_closed(space: SpaceModel, N) -> RegionResult:
    """Supremum of K such that Ric_{N,V} >= K on the whole open half-space."""
    N = as_dim(N)
    _check(space, N)
    if space.family is Family.INFINITY:
        return _kmax_infinity(space, N)
    a, b = space.alpha, space.beta
    ig = _ig(N)
    A = b - a * a - a - ig * b * b
    B = a * b - a * a - a
    margins = {"A": A, "B": B}
    if A < 0 or B < 0:
        return RegionResult(False, None, _failing(A, B), margins=margins)
    attained = min(A, B) == 0
    fam = space.family
    if fam is Family.PLANE:
        return RegionResult(True, 0.0, _binding(A, B), attained, margins)
    if fam is Family.SPHERE:
        return RegionResult(True, 1 - 3 * a + b, _binding(A, B), attained, margins)
    # the binding component approaches kmax as x -> inf at rate margin / sinh^2
    cx, cy = -ig * b * b, b * (a - 1)
    attained = (cx <= cy and A == 0) or (cy <= cx and B == 0)
    return RegionResult(True, min(cx, cy) - (a - 1) ** 2 + 0.0, _binding(cx, cy),
                        attained, margins)


def default_grid(space: SpaceModel, n: int = 1000, refined: bool = False) -> np.ndarray:
    """Log-spaced interior grid covering the region where kmax is approached."""
    fam = space.family
    # below ~1e-3 the generic formula sums O(1/x^2) terms that cancel to O(1)
    lo = 1e-3
    if fam is Family.SPHERE:
        # closer to the pole the generic formula cancels O(1/cos^2) terms
        gap = 1e-4
        top = math.pi / 2 - gap
        # dense toward both endpoints
        left = np.geomspace(lo, math.pi / 4, n // 2)
        right = math.pi / 2 - np.geomspace(gap, math.pi / 4, n - n // 2)[::-1]
        return np.unique(np.clip(np.concatenate([left, right]), lo, top))
    if refined:
        hi = 20.0 if fam is Family.HYPERBOLIC else 1e5
    else:
        hi = 10.0
    return np.geomspace(lo, hi, n)


def kmax_numeric(space: SpaceModel, N, grid=None) -> float:
    """min over the grid of min(rxx, ryy) from the warped-product formula."""
    if grid is None:
        grid = default_grid(space)
    grid = np.asarray(grid, dtype=float)
    if grid.size < 100:
        raise ValueError("kmax_numeric needs at least 100 grid points")
    rxx, ryy = ricci_lemma_array(space, grid, N)
    return float(np.min(np.minimum(rxx, ryy)))


def refined_kmax_numeric(space: SpaceModel, N, n: int = 1000, zooms: int = 3) -> float:
    """:func:`kmax_numeric` on a wide log grid zoomed around its argmin."""
    grid = default_grid(space, n, refined=True)
    best = kmax_numeric(space, N, grid)
    for _ in range(zooms):
        rxx, ryy = ricci_lemma_array(space, grid, N)
        k = int(np.argmin(np.minimum(rxx, ryy)))
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
        grid = np.linspace(lo, hi, n)
        best = min(best, kmax_numeric(space, N, grid))
    return best


# -- beta intervals -------------------------------------------------------------


def _quad_ge(a: float, b: float, c: float) -> Interval:
    """{t >= 0 : a t^2 + b t + c >= 0} as a single interval."""
    half = Interval(0.0, math.inf)
    if a == 0:
        if b == 0:
            return half if c >= 0 else Interval.empty()
        r = -c / b
        return half & (Interval(r, math.inf) if b > 0 else Interval(-math.inf, r))
    disc = b * b - 4 * a * c
    if disc < 0:
        return half if a > 0 else Interval.empty()
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b)) if b != 0 else 0.5 * sq
    r1 = q / a
    r2 = c / q if q != 0 else -r1
    lo, hi = min(r1, r2), max(r1, r2)
    if a < 0:
        return half & Interval(lo, hi)
    # a > 0: two rays; the lower one must not reach into t >= 0
    if hi <= 0:
        return half
    if lo > 0:
        raise ValueError("feasible set is not an interval")
    return half & Interval(hi, math.inf)


def _lin_ge(slope: float, const: float) -> Interval:
    """{t : slope * t + const >= 0}."""
    return _quad_ge(0.0, slope, const)


def feasible_beta(family, alpha: float, N, K: float) -> Interval:
    """Exact set of beta >= alpha with kmax_closed(family(alpha, beta), N) >= K.

    ``K = -inf`` returns the K-free feasibility interval.
    """
    fam = Family(family)
    if fam is Family.INFINITY:
        raise ValueError("use feasible_beta_gamma for the infinity family")
    N = as_dim(N)
    a = float(alpha)
    K = float(K)
    base = Interval(a, math.inf)
    if N.critical:
        # constant potential forces beta = 0, hence alpha = 0
        if a != 0:
            return Interval.empty()
        r = kmax_closed(SpaceModel(fam, 0.0, 0.0), N)
        return Interval(0.0, 0.0) if r.feasible and r.kmax >= K else Interval.empty()
    ig = _ig(N)
    A = _quad_ge(-ig, 1.0, -(a * a + a))
    B = _lin_ge(a, -(a * a + a))
    out = base & A & B
    if K == -math.inf:
        return out
    if fam is Family.PLANE:
        return out if K <= 0 else Interval.empty()
    if fam is Family.SPHERE:
        return out & Interval(K - 1 + 3 * a, math.inf)
    c = K + (a - 1) ** 2
    C1 = _quad_ge(-ig, 0.0, -c)
    C2 = _lin_ge(a - 1, -c)
    return out & C1 & C2


def feasible_beta_gamma(beta: float, gamma: float) -> tuple[bool, float]:
    """Ric_{∞,V} >= 0 on the infinity half-plane, with its margin."""
    margin = min(beta * (6 * gamma - 1), 8 * (beta - 2) * gamma) - 1
    return margin >= 0, margin


def feasible_n_negative(family, alpha: float, beta: float, K: float) -> Interval:
    """Set of N < 0 with kmax_closed(family(alpha, beta), N) >= K, as [lo, hi]."""
    fam = Family(family)
    if fam is Family.INFINITY:
        raise ValueError("negative-N intervals are only closed-form for alpha families")
    a, b, K = float(alpha), float(beta), float(K)
    # write s = 2 - N > 2, so ig = -1/s; every N-dependent condition reads s <= bound
    smax = math.inf
    if a * b - a * a - a < 0:
        return Interval.empty()
    c0 = b - a * a - a
    if c0 < 0:
        smax = min(smax, b * b / -c0)
    if fam is Family.PLANE:
        if K > 0:
            return Interval.empty()
    elif fam is Family.SPHERE:
        if 1 - 3 * a + b < K:
            return Interval.empty()
    else:
        c = K + (a - 1) ** 2
        if b * (a - 1) < c:
            return Interval.empty()
        if c > 0:
            smax = min(smax, b * b / c)
    if smax <= 2:
        return Interval.empty()
    # N = 0 itself is excluded; the upper end is reported as the open bound 0
    return Interval(2 - smax, 0.0)


# -- theorem witnesses -------------------------------------------------------


class Statement(str, enum.Enum):
    T1_1_i = "T1_1_i"
    T1_1_ii = "T1_1_ii"
    T1_1_iii = "T1_1_iii"
    T1_2_i = "T1_2_i"
    T1_2_ii = "T1_2_ii"
    T1_2_iii = "T1_2_iii"
    T1_3_i = "T1_3_i"
    T1_3_ii = "T1_3_ii"


@dataclass(frozen=True)
class Witness:
    statement: Statement
    holds: bool
    params: dict
    certificate: dict

    def to_dict(self) -> dict:
        return {
            "statement": self.statement.value,
            "holds": self.holds,
            "params": self.params,
            "certificate": self.certificate,
        }


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise StatementError(msg)


def _pick_above(iv: Interval, a: float) -> float | None:
    """A point of iv strictly above a, preferring the lower endpoint."""
    iv = iv & Interval(math.nextafter(a, math.inf), math.inf)
    if iv.is_empty:
        return None
    if iv.lo > a:
        return iv.lo
    return iv.lo + 1.0 if math.isinf(iv.hi) else 0.5 * (iv.lo + iv.hi)


def theorem_witness(statement, **kw) -> Witness:
    """Concrete parameters (or an emptiness certificate) for a headline statement.

    Keyword inputs per statement:

    ``T1_1_i``   alpha, K > 0           hemisphere, N = ∞
    ``T1_1_ii``  alpha >= 1, N >= 2 + 4 alpha(alpha+1)
    ``T1_1_iii`` alpha, beta, N         hemisphere with kmax >= 0
    ``T1_2_i``   alpha >= 1, N >= 2 + 4 alpha(alpha+1)
    ``T1_2_ii``  alpha, beta >= 0, N in (2, ∞)
    ``T1_2_iii`` alpha >= 1, optional N < 0 (default -1)
    ``T1_3_i``   optional beta, gamma (default 3, 1)
    ``T1_3_ii``  beta >= 0, gamma > 0, N in (2, ∞), K
    """
    st = Statement(statement)
    if st is Statement.T1_1_i:
        a, K = float(kw["alpha"]), float(kw["K"])
        _need(a >= 0 and K > 0, "T1_1_i needs alpha >= 0 and K > 0")
        iv = feasible_beta(Family.SPHERE, a, INF, K)
        beta = iv.lo
        r = kmax_closed(SpaceModel(Family.SPHERE, a, beta), INF)
        return Witness(st, r.feasible and r.kmax >= K, {"alpha": a, "beta": beta, "K": K, "N": "inf"},
                       {"interval": iv.to_list(), "kmax": r.kmax})
    if st in (Statement.T1_1_ii, Statement.T1_2_i):
        a, N = float(kw["alpha"]), as_dim(kw["N"])
        _need(a >= 1, f"{st.value} needs alpha >= 1")
        _need(not N.negative and N.value >= 2 + 4 * a * (a + 1),
              f"{st.value} needs N >= 2 + 4 alpha(alpha+1)")
        if st is Statement.T1_1_ii:
            iv = feasible_beta(Family.SPHERE, a, N, 0.0)
            beta = _pick_above(iv, a)
            ok = beta is not None
            return Witness(st, ok, {"alpha": a, "beta": beta, "K": 0.0, "N": N.to_json()},
                           {"interval": iv.to_list()})
        iv = feasible_beta(Family.HYPERBOLIC, a, N, -math.inf)
        beta = _pick_above(iv, a)
        if beta is None:
            return Witness(st, False, {"alpha": a, "N": N.to_json()}, {"interval": None})
        r = kmax_closed(SpaceModel(Family.HYPERBOLIC, a, beta), N)
        return Witness(st, r.feasible and r.kmax < 0,
                       {"alpha": a, "beta": beta, "K": r.kmax, "N": N.to_json()},
                       {"interval": iv.to_list(), "binding": r.binding.value})
    if st is Statement.T1_1_iii:
        sp = SpaceModel(Family.SPHERE, kw["alpha"], kw["beta"])
        N = as_dim(kw["N"])
        r = kmax_closed(sp, N)
        _need(r.feasible and r.kmax >= 0, "T1_1_iii needs RCD(0, N) to hold")
        return Witness(st, r.kmax > 0, {**sp.to_dict(), "N": N.to_json(), "K": r.kmax},
                       {"kmax": r.kmax, "binding": r.binding.value})
    if st is Statement.T1_2_ii:
        a, b, N = float(kw["alpha"]), float(kw["beta"]), as_dim(kw["N"])
        _need(a >= 0 and b >= 0, "T1_2_ii needs alpha, beta >= 0")
        _need(not N.negative and not N.infinite and N.value > 2, "T1_2_ii needs N in (2, inf)")
        sp = SpaceModel(Family.HYPERBOLIC, a, b, strict=False)
        r = kmax_closed(sp, N)
        r_inf = kmax_closed(sp, INF)
        inf_ok = r_inf.feasible and r_inf.kmax >= 0
        holds = (not r.feasible or r.kmax < 0) and (inf_ok == (a == 1 and b >= 2))
        return Witness(st, holds, {"alpha": a, "beta": b, "N": N.to_json()},
                       {"finite_N": r.to_dict(), "infinite_N": r_inf.to_dict(),
                        "rcd0_inf": inf_ok})
    if st is Statement.T1_2_iii:
        a = float(kw["alpha"])
        N = as_dim(kw.get("N", -1.0))
        _need(a >= 1, "T1_2_iii needs alpha >= 1")
        _need(N.negative, "T1_2_iii needs N < 0")
        iv = feasible_beta(Family.HYPERBOLIC, a, N, 0.0)
        beta = _pick_above(iv, a)
        if beta is None:
            return Witness(st, False, {"alpha": a, "N": N.value}, {"interval": None})
        r = kmax_closed(SpaceModel(Family.HYPERBOLIC, a, beta), N)
        return Witness(st, r.feasible and r.kmax >= 0,
                       {"alpha": a, "beta": beta, "N": N.value, "K": 0.0},
                       {"beta_interval": iv.to_list(), "kmax": r.kmax,
                        "N_interval": feasible_n_negative(Family.HYPERBOLIC, a, beta, 0.0).to_list()})
    if st is Statement.T1_3_i:
        b, g = float(kw.get("beta", 3.0)), float(kw.get("gamma", 1.0))
        ok, margin = feasible_beta_gamma(b, g)
        r = kmax_closed(SpaceModel(Family.INFINITY, 0.0, b, g), INF)
        return Witness(st, ok and r.feasible and r.kmax >= 0, {"beta": b, "gamma": g, "K": 0.0, "N": "inf"},
                       {"margin": margin, "kmax": r.kmax})
    # T1_3_ii
    b, g = float(kw["beta"]), float(kw["gamma"])
    N, K = as_dim(kw["N"]), float(kw.get("K", 0.0))
    _need(b >= 0 and g > 0, "T1_3_ii needs beta >= 0, gamma > 0")
    _need(not N.negative and not N.infinite and N.value > 2, "T1_3_ii needs N in (2, inf)")
    sp = SpaceModel(Family.INFINITY, 0.0, b, g)
    r = kmax_closed(sp, N)
    # explicit point where rxx < K: rxx ~ -4 gamma^2 / ((N-2) x^6) near 0
    x = 1.0
    rxx = float(ricci_lemma_array(sp, np.array([x]), N)[0][0])
    while rxx >= K and x > 1e-6:
        x *= 0.5
        rxx = float(ricci_lemma_array(sp, np.array([x]), N)[0][0])
    return Witness(st, not r.feasible and rxx < K,
                   {"beta": b, "gamma": g, "N": N.value, "K": K},
                   {"kmax": r.to_dict(), "witness_x": x, "rxx": rxx})
