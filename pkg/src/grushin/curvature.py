"""Weighted N-Ricci tensor of the warped-product half-spaces.

For g = dx⊗dx + f^{-2} dy⊗dy and a potential V(x), in the orthonormal frame
(∂x, f∂y) the tensor Ric_{N,V} is diagonal with entries

    rxx = (f'/f)' - (f'/f)^2 + V'' - V'^2 / (N - 2)
    ryy = (f'/f)' - (f'/f)^2 - (f'/f) V'

Three independent evaluations are provided: the generic formula above fed by
analytic profiles, family-specific closed forms, and a finite-difference
oracle that only sees pointwise values of f and V.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DimError, DomainError
from .model import Family, SpaceModel, X_MIN, profile, profile_terms

__all__ = [
    "EffectiveDim",
    "INF",
    "as_dim",
    "RicciValue",
    "ricci_lemma",
    "ricci_lemma_array",
    "ricci_closed",
    "ricci_fd",
    "gauss_curvature",
]


@dataclass(frozen=True)
class EffectiveDim:
    """Extended-real effective dimension N in (-inf, 0) ∪ [2, +inf].

    N = 2 is accepted here and only rejected later, when paired with a
    nonconstant potential.
    """

    value: float

    def __post_init__(self):
        v = float(self.value)
        if math.isnan(v) or v == -math.inf:
            raise DimError(f"invalid effective dimension {self.value!r}")
        if 0.0 <= v < 2.0:
            raise DimError(f"effective dimension {v} lies in the excluded range [0, 2)")
        object.__setattr__(self, "value", v)

    @property
    def infinite(self) -> bool:
        return self.value == math.inf

    @property
    def negative(self) -> bool:
        return self.value < 0

    @property
    def critical(self) -> bool:
        """True for N = n = 2, where the potential must be constant."""
        return self.value == 2.0

    def inverse_gap(self) -> float:
        """1/(N - 2), with the N = ∞ case mapped to 0."""
        if self.infinite:
            return 0.0
        if self.critical:
            raise DimError("1/(N-2) undefined at N = 2")
        return 1.0 / (self.value - 2.0)

    def __str__(self) -> str:
        if self.infinite:
            return "inf"
        v = self.value
        return str(int(v)) if v.is_integer() else repr(v)

    @classmethod
    def parse(cls, text: str) -> "EffectiveDim":
        t = str(text).strip().lower()
        if t in ("inf", "+inf", "infinity", "∞"):
            return INF
        try:
            v = float(t)
        except ValueError:
            raise DimError(f"cannot parse effective dimension {text!r}") from None
        return cls(v)

    def to_json(self) -> float | str:
        return "inf" if self.infinite else self.value


INF = EffectiveDim(math.inf)


def as_dim(N) -> EffectiveDim:
    if isinstance(N, EffectiveDim):
        return N
    if isinstance(N, str):
        return EffectiveDim.parse(N)
    return EffectiveDim(N)


def _check_pair(space: SpaceModel, N: EffectiveDim) -> None:
    if N.critical and not space.unweighted:
        raise DimError(f"N = 2 requires a constant potential, got {space}")


@dataclass(frozen=True)
class RicciValue:
    """Diagonal entries of Ric_{N,V} in the orthonormal frame (∂x, f∂y)."""

    rxx: float
    ryy_over_gyy: float

    @property
    def min(self) -> float:
        return min(self.rxx, self.ryy_over_gyy)

    def bounds(self, K: float) -> bool:
        """Whether Ric_{N,V} >= K g holds at this point."""
        return self.min >= K


def _assemble(L: float, dL: float, dV: float, d2V: float, N: EffectiveDim) -> RicciValue:
    gauss = dL - L * L
    if N.critical:
        rxx = gauss
    else:
        rxx = gauss + d2V - dV * dV * N.inverse_gap()
    return RicciValue(rxx, gauss - L * dV)


def ricci_lemma(space: SpaceModel, x: float, N) -> RicciValue:
    """Ric_{N,V} from the generic warped-product formula."""
    N = as_dim(N)
    _check_pair(space, N)
    p = profile(space, x)
    return _assemble(p.dlogf, p.d2logf, p.dV, p.d2V, N)


def ricci_lemma_array(space: SpaceModel, xs, N) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`ricci_lemma`; returns (rxx, ryy_over_gyy) arrays."""
    N = as_dim(N)
    _check_pair(space, N)
    _, L, dL, _, dV, d2V = profile_terms(space, xs)
    r = _assemble(L, dL, dV, d2V, N)
    return r.rxx, r.ryy_over_gyy


def ricci_closed(space: SpaceModel, x: float, N) -> RicciValue:
    """Ric_{N,V} from the per-family closed forms."""
    N = as_dim(N)
    _check_pair(space, N)
    x = space.check(x)
    a, b = space.alpha, space.beta
    ig = 0.0 if N.critical else N.inverse_gap()
    fam = space.family
    if fam is Family.PLANE:
        rxx = (-a * a - a + b - b * b * ig) / x**2
        ryy = (-a * a - a + a * b) / x**2
    elif fam in (Family.SPHERE, Family.HYPERBOLIC):
        if fam is Family.SPHERE:
            s2, c2 = math.sin(x) ** 2, math.cos(x) ** 2
        else:
            s2, c2 = math.sinh(x) ** 2, math.cosh(x) ** 2
        common = 3 * a - 1 + (a - 1) ** 2 * c2
        rxx = -(common - b + b * b * ig * c2) / s2
        ryy = -(common - b * (1 + (a - 1) * c2)) / s2
    else:
        g = space.gamma
        rxx = (6 * g - 1) / x**4 - 2 / x**3 + b / x**2 - ig * (2 * g + b * x * x) ** 2 / x**6
        ryy = 2 * g / x**5 - 1 / x**4 + (b - 2) / x**3
    return RicciValue(rxx, ryy)


def _pointwise_mp(space: SpaceModel, x):
    """log f and V at an mpmath point, from the raw closed forms only."""
    a, b = mpmath.mpf(space.alpha), mpmath.mpf(space.beta)
    fam = space.family
    if fam is Family.PLANE:
        return a * mpmath.log(x), -b * mpmath.log(x)
    if fam is Family.SPHERE:
        s = mpmath.sin(x)
        return mpmath.log(s**a / mpmath.cos(x)), -b * mpmath.log(s)
    if fam is Family.HYPERBOLIC:
        s = mpmath.sinh(x)
        return mpmath.log(s**a / mpmath.cosh(x)), -b * mpmath.log(s)
    g = mpmath.mpf(space.gamma)
    return mpmath.log(mpmath.exp(-1 / x)), g / x**2 - b * mpmath.log(x)


def ricci_fd(space: SpaceModel, x: float, N, h: float = 1e-5) -> RicciValue:
    """Ric_{N,V} by central differences of log f and V (no analytic derivatives).

    f and V are sampled in 40-digit arithmetic so that the second difference
    is limited by truncation (O(h^4)) rather than by cancellation.
    """
    N = as_dim(N)
    _check_pair(space, N)
    if not 1e-6 <= h <= 1e-3:
        raise ValueError(f"step h={h} outside [1e-6, 1e-3]")
    x = space.check(x)
    if x < 1e-6:
        raise DomainError("finite-difference oracle refuses x < 1e-6")
    lo, hi = space.domain
    if x - 2 * h < X_MIN or x + 2 * h >= hi:
        raise DomainError(f"stencil x ± 2h leaves the domain at x={x}, h={h}")

    with mpmath.workdps(40):
        xm, hm = mpmath.mpf(x), mpmath.mpf(h)
        pts = [_pointwise_mp(space, xm + k * hm) for k in (-2, -1, 0, 1, 2)]
        lf = [p[0] for p in pts]
        vv = [p[1] for p in pts]
        # fourth-order central stencils
        d1 = lambda u: (u[0] - 8 * u[1] + 8 * u[3] - u[4]) / (12 * hm)
        d2 = lambda u: (-u[0] + 16 * u[1] - 30 * u[2] + 16 * u[3] - u[4]) / (12 * hm**2)
        L, dL, dV, d2V = (float(d(u)) for d, u in ((d1, lf), (d2, lf), (d1, vv), (d2, vv)))
    return _assemble(L, dL, dV, d2V, N)


def gauss_curvature(space: SpaceModel, x: float) -> float:
    """Sectional curvature (f'/f)' - (f'/f)^2 of the unweighted metric."""
    p = profile(space, x)
    return p.d2logf - p.dlogf**2
