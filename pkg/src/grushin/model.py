"""Warped-product profiles and weighted measures of the Grushin half-spaces.

Every space is written on its open half-space chart ``x > 0`` as

    g = dx⊗dx + f(x)^{-2} dy⊗dy,      m = e^{-V(x)} dvol_g = e^{-V} / f  dx dy,

so a space is fully described by its warp factor ``f`` and potential ``V``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionError, DomainError

__all__ = [
    "X_MIN",
    "Family",
    "SpaceModel",
    "ProfileEval",
    "profile",
    "profile_terms",
    "weight_density",
    "log_weight_density",
    "metric_length",
    "metric_lengths",
    "plane",
    "sphere",
    "hyperbolic",
    "infinity",
    "bare",
]

#: Guard band: coordinates closer than this to the singular line are rejected.
X_MIN = 1e-12


class Family(str, enum.Enum):
    PLANE = "plane"
    SPHERE = "sphere"
    HYPERBOLIC = "hyperbolic"
    INFINITY = "infinity"


def _fmt(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)


@dataclass(frozen=True)
class SpaceModel:
    """One weighted almost-Riemannian half-space.

    ``alpha`` is ignored by the infinity family and ``gamma`` by the others.
    ``strict=False`` skips the ``beta >= alpha`` measure condition; it is
    meant for curvature work on the bare metric (e.g. ``beta = 0``).
    """

    family: Family
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float | None = None
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        for name in ("alpha", "beta"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ConstructionError(f"{name} must be finite, got {val}")
            object.__setattr__(self, name, val)
        if fam is Family.INFINITY:
            if self.gamma is None or not float(self.gamma) > 0 or not math.isfinite(self.gamma):
                raise ConstructionError("infinity family needs gamma > 0")
            object.__setattr__(self, "gamma", float(self.gamma))
            if self.beta < 0:
                raise ConstructionError("infinity family needs beta >= 0")
            if self.alpha < 0:
                raise ConstructionError("alpha must be >= 0")
        else:
            if self.alpha < 0:
                raise ConstructionError("alpha must be >= 0")
            if self.strict and self.beta < self.alpha:
                raise ConstructionError(
                    f"measure needs beta >= alpha, got alpha={self.alpha}, beta={self.beta}"
                )
            object.__setattr__(self, "gamma", None)

    @property
    def domain(self) -> tuple[float, float]:
        """Open x-interval of the chart."""
        if self.family is Family.SPHERE:
            return (0.0, math.pi / 2)
        return (0.0, math.inf)

    @property
    def unweighted(self) -> bool:
        """True when the potential V vanishes identically."""
        return self.beta == 0 and (self.family is not Family.INFINITY)

    def contains(self, x: float) -> bool:
        lo, hi = self.domain
        return X_MIN <= x < hi and math.isfinite(x)

    def check(self, x: float) -> float:
        x = float(x)
        if not self.contains(x):
            raise DomainError(f"x={x!r} outside the open domain {self.domain} of {self}")
        return x

    # canonical text form -------------------------------------------------

    def __str__(self) -> str:
        s = f"{self.family.value}:alpha={_fmt(self.alpha)},beta={_fmt(self.beta)}"
        if self.gamma is not None:
            s += f",gamma={_fmt(self.gamma)}"
        return s

    @classmethod
    def parse(cls, text: str) -> "SpaceModel":
        """Parse ``family:alpha=<a>,beta=<b>[,gamma=<g>]``."""
        try:
            fam, _, rest = text.strip().partition(":")
            kw: dict[str, float] = {}
            for item in filter(None, rest.split(",")):
                key, _, val = item.partition("=")
                key = key.strip()
                if key not in ("alpha", "beta", "gamma") or key in kw:
                    raise ValueError(f"bad key {key!r}")
                kw[key] = float(val)
            family = Family(fam.strip().lower())
        except ValueError as exc:
            raise ConstructionError(f"cannot parse space {text!r}: {exc}") from None
        return cls(family, **kw)

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
        }


def plane(alpha: float, beta: float) -> SpaceModel:
    return SpaceModel(Family.PLANE, alpha, beta)


def sphere(alpha: float, beta: float) -> SpaceModel:
    return SpaceModel(Family.SPHERE, alpha, beta)


def hyperbolic(alpha: float, beta: float) -> SpaceModel:
    return SpaceModel(Family.HYPERBOLIC, alpha, beta)


def infinity(beta: float, gamma: float) -> SpaceModel:
    return SpaceModel(Family.INFINITY, 0.0, beta, gamma)


def bare(family, alpha: float = 0.0) -> SpaceModel:
    """Unweighted metric (beta = 0) of a non-infinity family, any alpha."""
    return SpaceModel(Family(family), alpha, 0.0, strict=False)


@dataclass(frozen=True)
class ProfileEval:
    """Warp factor and potential with their first two x-derivatives.

    ``dlogf`` and ``d2logf`` are (f'/f) and (f'/f)' evaluated analytically;
    they stay finite where ``f`` itself under- or overflows.
    """

    f: float
    df: float
    d2f: float
    V: float
    dV: float
    d2V: float
    dlogf: float
    d2logf: float


def _terms(space: SpaceModel, x):
    """(log f, f'/f, (f'/f)', V, V', V'') for scalar or array x > 0."""
    a, b = space.alpha, space.beta
    fam = space.family
    if fam is Family.PLANE:
        lx = np.log(x)
        return a * lx, a / x, -a / x**2, -b * lx, -b / x, b / x**2
    if fam is Family.SPHERE:
        s, c = np.sin(x), np.cos(x)
        ls = np.log(s)
        return (
            a * ls - np.log(c),
            a * c / s + s / c,
            -a / s**2 + 1.0 / c**2,
            -b * ls,
            -b * c / s,
            b / s**2,
        )
    if fam is Family.HYPERBOLIC:
        s, c = np.sinh(x), np.cosh(x)
        ls = np.log(s)
        return (
            a * ls - np.log(c),
            a * c / s - s / c,
            -a / s**2 - 1.0 / c**2,
            -b * ls,
            -b * c / s,
            b / s**2,
        )
    g = space.gamma
    return (
        -1.0 / x,
        1.0 / x**2,
        -2.0 / x**3,
        g / x**2 - b * np.log(x),
        -2.0 * g / x**3 - b / x,
        6.0 * g / x**4 + b / x**2,
    )


def profile(space: SpaceModel, x: float) -> ProfileEval:
    """Evaluate f, V and their derivatives at an interior point."""
    x = space.check(x)
    logf, L, dL, V, dV, d2V = (float(t) for t in _terms(space, x))
    f = math.exp(logf)
    return ProfileEval(
        f=f,
        df=f * L,
        d2f=f * (dL + L * L),
        V=V,
        dV=dV,
        d2V=d2V,
        dlogf=L,
        d2logf=dL,
    )


def profile_terms(space: SpaceModel, xs) -> tuple[np.ndarray, ...]:
    """Vectorised (log f, f'/f, (f'/f)', V, V', V'') on an array of interior points."""
    xs = np.asarray(xs, dtype=float)
    lo, hi = space.domain
    if np.any(~np.isfinite(xs)) or np.any(xs < X_MIN) or np.any(xs >= hi):
        raise DomainError(f"grid leaves the open domain {space.domain} of {space}")
    return _terms(space, xs)


def weight_density(space: SpaceModel, x: float) -> float:
    """Density of the weighted measure with respect to dx dy."""
    x = space.check(x)
    a, b = space.alpha, space.beta
    fam = space.family
    if fam is Family.PLANE:
        return x ** (b - a)
    if fam is Family.SPHERE:
        return math.cos(x) * math.sin(x) ** (b - a)
    if fam is Family.HYPERBOLIC:
        return math.cosh(x) * math.sinh(x) ** (b - a)
    return math.exp(b * math.log(x) - space.gamma / x**2 + 1.0 / x)


def log_weight_density(space: SpaceModel, x: float) -> float:
    """log of :func:`weight_density`, finite where the density underflows."""
    x = space.check(x)
    logf, _, _, V, _, _ = _terms(space, x)
    return float(-V - logf)


def metric_length(space: SpaceModel, x: float, dx: float, dy: float) -> float:
    """Riemannian norm of the tangent vector (dx, dy) at abscissa x."""
    p = profile(space, x)
    if dy == 0:
        return abs(dx)
    if p.f == 0.0:
        return math.inf
    return math.hypot(dx, dy / p.f)


def metric_lengths(space: SpaceModel, x, dx, dy) -> np.ndarray:
    """Vectorised :func:`metric_length` over arrays of base points."""
    x, dx, dy = (np.asarray(t, dtype=float) for t in (x, dx, dy))
    logf = profile_terms(space, x)[0]
    with np.errstate(over="ignore"):
        return np.hypot(dx, dy * np.exp(-logf))
