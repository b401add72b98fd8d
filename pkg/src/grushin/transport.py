"""Distortion coefficients and curvature-dimension checks on horizontal slices.

A horizontal slice ``{y = const}`` carries the one-dimensional measure
``w(x) dx`` with ``w = weight_density``, and the distance between two of
its points is exactly ``|x1 - x0|`` (the straight segment is a unit-speed
extremal with ``v = 0`` and the metric dominates ``dx^2``). Optimal
transport on a slice is therefore the monotone rearrangement.

Functionals of the interpolant are evaluated by pulling back to the
support of the source measure: with ``T_t = (1 - t) id + t T``,

    int G(rho_t) dm = int q0(x) G(rho_t(T_t x)) / rho_t(T_t x) dx,
    rho_t(T_t x) = q0(x) / (T_t'(x) w(T_t x)),

where ``q0`` is the Lebesgue density of the source.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .curvature import EffectiveDim, as_dim
from .errors import QuadratureError, SupportError
from .model import Family, SpaceModel, log_weight_density, profile_terms, weight_density

__all__ = [
    "DistortionInput",
    "tau",
    "tau_tilde",
    "distortion",
    "SliceMeasure",
    "transport_map",
    "slice_interpolant",
    "entropy",
    "renyi",
    "w2",
    "w2_lp",
    "CDResult",
    "cd_slice_check",
    "slice_curvature",
    "Violation",
    "find_violation",
    "random_bump_pair",
    "DEFAULT_TGRID",
]

DEFAULT_TGRID = tuple(np.linspace(0.0, 1.0, 11))
_PI2 = math.pi**2


# -- distortion coefficients ---------------------------------------------


@dataclass(frozen=True)
class DistortionInput:
    K: float
    N: float
    t: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"t={self.t} outside [0, 1]")
        if not self.theta >= 0.0:
            raise ValueError(f"theta={self.theta} must be >= 0")
        N = float(self.N)
        if math.isnan(N) or 0.0 <= N < 1.0:
            raise ValueError(f"N={N} outside [1, inf] or (-inf, 0)")


def _ratio_power(t, N, arg, fn):
    # t^{1/N} (fn(t arg) / fn(arg))^{1 - 1/N}
    return t ** (1.0 / N) * (fn(t * arg) / fn(arg)) ** (1.0 - 1.0 / N)


def tau(inp: DistortionInput) -> float:
    """Distortion coefficient for N in [1, inf)."""
    K, N, t, th = inp.K, float(inp.N), inp.t, inp.theta
    if not 1.0 <= N < math.inf:
        raise ValueError(f"tau needs N in [1, inf), got {N}")
    k = K * th * th
    if k > 0 and (N - 1) * _PI2 <= k:
        return math.inf
    if k == 0 or (k < 0 and N == 1):
        return t
    if t == 0.0:
        return 0.0
    if k > 0:
        return _ratio_power(t, N, th * math.sqrt(K / N), math.sin)
    return _ratio_power(t, N, th * math.sqrt(-K / N), math.sinh)


def tau_tilde(inp: DistortionInput) -> float:
    """Distortion coefficient for N < 0."""
    K, N, t, th = inp.K, float(inp.N), inp.t, inp.theta
    if not N < 0:
        raise ValueError(f"tau_tilde needs N < 0, got {N}")
    k = K * th * th
    if (N - 1) * _PI2 >= k:
        return math.inf
    if k == 0:
        return t
    if k < 0 and k / N >= _PI2:
        # the sine ratio passes its pole at theta sqrt(K/N) = pi before the
        # threshold (N-1) pi^2 is reached; saturate instead of going non-real
        return math.inf
    if t == 0.0:
        # t^{1/N} blows up but the product vanishes linearly in t
        return 0.0
    if k < 0:
        return _ratio_power(t, N, th * math.sqrt(K / N), math.sin)
    return _ratio_power(t, N, th * math.sqrt(-K / N), math.sinh)


def distortion(K: float, N: float, t: float, theta: float) -> float:
    """Dispatch to :func:`tau` or :func:`tau_tilde` by the sign of N."""
    inp = DistortionInput(K, N, t, theta)
    return tau_tilde(inp) if N < 0 else tau(inp)


# -- slice measures ------------------------------------------------------


def _quad(fn, a, b, what="integral"):
    val, err = integrate.quad(fn, a, b, epsabs=1e-12, epsrel=1e-11, limit=400)
    if not (math.isfinite(val) and err <= 1e-8 * max(1.0, abs(val))):
        raise QuadratureError(f"{what} on [{a}, {b}] did not converge (err={err:.3g})")
    return val


def _biweight_cdf(s):
    s = min(max(s, -1.0), 1.0)
    return 0.5 + (15.0 / 16.0) * (s - 2.0 * s**3 / 3.0 + s**5 / 5.0)


@dataclass(frozen=True)
class SliceMeasure:
    """Probability measure on the slice ``{y}`` of a space.

    ``kind`` is ``"bump"`` (quartic biweight with params ``(center,
    radius)``), ``"uniform"`` (constant density against the weighted
    measure) or ``"interpolant"`` (params ``(mu0, mu1, t)``).
    The density ``rho`` is taken against the weighted measure; ``lebesgue``
    is ``rho * weight_density``.
    """

    space: SpaceModel
    a: float
    b: float
    kind: str
    params: tuple
    y: float = 0.0

    # constructors -------------------------------------------------------

    @staticmethod
    def _check_support(space, a, b):
        lo, hi = space.domain
        if not (lo < a < b < hi) or not math.isfinite(b):
            raise SupportError(f"support [{a}, {b}] leaves the open domain {space.domain}")

    @classmethod
    def bump(cls, space: SpaceModel, center: float, radius: float, y: float = 0.0):
        """Biweight bump (15 / 16 r) (1 - s^2)^2 in Lebesgue density."""
        a, b = center - radius, center + radius
        if not radius > 0:
            raise SupportError("bump radius must be positive")
        cls._check_support(space, a, b)
        mu = cls(space, a, b, "bump", (float(center), float(radius)), y)
        mu._validate()
        return mu

    @classmethod
    def uniform(cls, space: SpaceModel, a: float, b: float, y: float = 0.0):
        """Normalised restriction of the weighted measure to [a, b]."""
        cls._check_support(space, a, b)
        M = _quad(lambda x: weight_density(space, x), a, b, "slice mass")
        mu = cls(space, a, b, "uniform", (M,), y)
        mu._validate()
        return mu

    def _validate(self):
        total = _quad(self.lebesgue, self.a, self.b, "normalisation")
        if abs(total - 1.0) > 1e-8:
            raise QuadratureError(f"slice measure integrates to {total!r}, not 1")

    # evaluation ---------------------------------------------------------

    def lebesgue(self, x: float) -> float:
        """Density with respect to dx."""
        if not self.a <= x <= self.b:
            return 0.0
        if self.kind == "bump":
            c, r = self.params
            s = (x - c) / r
            return 15.0 / (16.0 * r) * (1.0 - s * s) ** 2
        if self.kind == "uniform":
            return weight_density(self.space, x) / self.params[0]
        mu0, mu1, t = self.params
        xs = self._inverse(x)
        _, dT = transport_map(mu0, mu1)
        return mu0.lebesgue(xs) / ((1 - t) + t * dT(xs))

    def density(self, x: float) -> float:
        """rho = d mu / d m."""
        return math.exp(self.log_density(x))

    def log_density(self, x: float) -> float:
        q = self.lebesgue(x)
        if q <= 0.0:
            return -math.inf
        return math.log(q) - log_weight_density(self.space, x)

    def cdf(self, x: float) -> float:
        if x <= self.a:
            return 0.0
        if x >= self.b:
            return 1.0
        if self.kind == "bump":
            c, r = self.params
            return _biweight_cdf((x - c) / r)
        if self.kind == "uniform":
            return _quad(lambda z: weight_density(self.space, z), self.a, x) / self.params[0]
        mu0 = self.params[0]
        return mu0.cdf(self._inverse(x))

    def quantile(self, u: float) -> float:
        if u <= 0.0:
            return self.a
        if u >= 1.0:
            return self.b
        if self.kind == "bump":
            c, r = self.params
            s = optimize.brentq(lambda s: _biweight_cdf(s) - u, -1.0, 1.0, xtol=1e-15, rtol=1e-15)
            return c + r * s
        if self.kind == "interpolant":
            mu0, mu1, t = self.params
            x = mu0.quantile(u)
            return (1 - t) * x + t * transport_map(mu0, mu1)[0](x)
        return optimize.brentq(lambda x: self.cdf(x) - u, self.a, self.b, xtol=1e-14, rtol=1e-14)

    def _inverse(self, z: float) -> float:
        # x with T_t(x) = z on the source support
        mu0, mu1, t = self.params
        T, _ = transport_map(mu0, mu1)
        if z <= self.a:
            return mu0.a
        if z >= self.b:
            return mu0.b
        return optimize.brentq(
            lambda x: (1 - t) * x + t * T(x) - z, mu0.a, mu0.b, xtol=1e-15, rtol=1e-15
        )

    def pullback(self):
        """(source measure, phi, phi') with self = phi_# source."""
        if self.kind != "interpolant":
            return self, (lambda x: x), (lambda x: 1.0)
        mu0, mu1, t = self.params
        T, dT = transport_map(mu0, mu1)
        return mu0, (lambda x: (1 - t) * x + t * T(x)), (lambda x: (1 - t) + t * dT(x))


def transport_map(mu0: SliceMeasure, mu1: SliceMeasure):
    """Monotone map T = Q1 o F0 and its derivative q0 / (q1 o T)."""
    if mu0.kind == "bump" and mu1.kind == "bump":
        (c0, r0), (c1, r1) = mu0.params, mu1.params
        k = r1 / r0
        return (lambda x: c1 + k * (x - c0)), (lambda x: k)

    def T(x):
        return mu1.quantile(mu0.cdf(x))

    def dT(x):
        Tx = T(x)
        q1 = mu1.lebesgue(Tx)
        if q1 > 0:
            return mu0.lebesgue(x) / q1
        # endpoint: one-sided difference quotient
        h = 1e-7 * (mu0.b - mu0.a)
        x2 = x - h if x + h > mu0.b else x + h
        return abs(T(x2) - Tx) / h

    return T, dT


def slice_interpolant(space: SpaceModel, mu0: SliceMeasure, mu1: SliceMeasure, t: float):
    """Displacement interpolant mu_t = ((1 - t) id + t T)_# mu0."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} outside [0, 1]")
    for mu in (mu0, mu1):
        if mu.space != space:
            raise SupportError("measures live on a different space")
        if mu.kind == "interpolant":
            raise SupportError("interpolants of interpolants are not supported")
    if mu0.y != mu1.y:
        raise SupportError("measures lie on different slices")
    if t == 0.0 or mu0 == mu1:
        return mu0
    if t == 1.0:
        return mu1
    a = (1 - t) * mu0.a + t * mu1.a
    b = (1 - t) * mu0.b + t * mu1.b
    return SliceMeasure(space, a, b, "interpolant", (mu0, mu1, float(t)), mu0.y)


# -- functionals ----------------------------------------------------------


def _pulled(space: SpaceModel, mu: SliceMeasure, g):
    """int q_src(x) g(log rho(phi(x))) dx."""
    src, phi, dphi = mu.pullback()

    def integrand(x):
        q = src.lebesgue(x)
        if q <= 0.0:
            return 0.0
        logrho = math.log(q / dphi(x)) - log_weight_density(space, phi(x))
        return q * g(logrho)

    return _quad(integrand, src.a, src.b, "slice functional")


def entropy(space: SpaceModel, mu: SliceMeasure) -> float:
    """int rho log rho dm."""
    return _pulled(space, mu, lambda lr: lr)


def renyi(space: SpaceModel, mu: SliceMeasure, Np) -> float:
    """int rho^{1 - 1/N'} dm."""
    Np = float(Np.value if isinstance(Np, EffectiveDim) else Np)
    if Np == math.inf:
        return 1.0
    if math.isnan(Np) or 0.0 <= Np < 1.0:
        raise ValueError(f"N'={Np} outside [1, inf] or (-inf, 0)")
    e = -1.0 / Np
    return _pulled(space, mu, lambda lr: math.exp(e * lr))


def w2(mu0: SliceMeasure, mu1: SliceMeasure) -> float:
    """Quadratic Wasserstein distance via the monotone coupling."""
    T, _ = transport_map(mu0, mu1)
    val = _quad(lambda x: mu0.lebesgue(x) * (T(x) - x) ** 2, mu0.a, mu0.b, "W2")
    return math.sqrt(max(val, 0.0))


def w2_lp(mu0: SliceMeasure, mu1: SliceMeasure, n: int = 40) -> float:
    """Kantorovich W2 of n-cell discretisations, solved as a linear program."""
    def atoms(mu):
        edges = np.linspace(mu.a, mu.b, n + 1)
        mass = np.diff([mu.cdf(e) for e in edges])
        return 0.5 * (edges[1:] + edges[:-1]), mass / mass.sum()

    x0, m0 = atoms(mu0)
    x1, m1 = atoms(mu1)
    C = (x0[:, None] - x1[None, :]) ** 2
    A_eq = np.vstack([np.kron(np.eye(n), np.ones(n)), np.kron(np.ones(n), np.eye(n))])
    res = optimize.linprog(
        C.ravel(), A_eq=A_eq, b_eq=np.concatenate([m0, m1]), bounds=(0, None), method="highs"
    )
    if not res.success:
        raise QuadratureError(f"transport LP failed: {res.message}")
    return math.sqrt(res.fun)


# -- curvature-dimension check -------------------------------------------


def _nprime(N: EffectiveDim) -> tuple[float, ...]:
    if N.infinite:
        return (math.inf,)
    n = N.value
    if N.negative:
        return (n, n / 2, n / 10)
    return (n, n + 1, 2 * n, 1e6)


@dataclass(frozen=True)
class CDResult:
    passed: bool
    min_margin: float
    margins: list[float]
    w2: float
    tgrid: list[float]

    def to_dict(self) -> dict:
        return {"pass": self.passed, "margins": self.margins, "w2": self.w2}


def _margin(space, K, Np, mu0, mu1, t, T, W2sq, ent):
    mut = slice_interpolant(space, mu0, mu1, t)
    if Np == math.inf:
        lhs = entropy(space, mut)
        rhs = (1 - t) * ent[0] + t * ent[1] - 0.5 * K * t * (1 - t) * W2sq
        return rhs - lhs
    e = -1.0 / Np

    def rhs_integrand(x):
        q = mu0.lebesgue(x)
        if q <= 0.0:
            return 0.0
        Tx = T(x)
        th = abs(Tx - x)
        r0 = math.exp(e * mu0.log_density(x))
        r1 = math.exp(e * mu1.log_density(Tx))
        return q * (distortion(K, Np, 1 - t, th) * r0 + distortion(K, Np, t, th) * r1)

    lhs = renyi(space, mut, Np)
    try:
        rhs = _quad(rhs_integrand, mu0.a, mu0.b, "distortion integral")
    except QuadratureError:
        # an infinite coefficient on a set of positive measure
        rhs = math.inf
    if math.isinf(rhs):
        return -math.inf if Np > 0 else math.inf
    return lhs - rhs if Np > 0 else rhs - lhs


def cd_slice_check(
    space: SpaceModel, K: float, N, mu0: SliceMeasure, mu1: SliceMeasure, tgrid=DEFAULT_TGRID,
    tol: float = 1e-6,
) -> CDResult:
    """Test the CD(K, N) inequality along the slice interpolant from mu0 to mu1.

    Finite positive N uses the Renyi form with N' in {N, N+1, 2N, 1e6};
    negative N the reversed form with N' in {N, N/2, N/10}; N = inf the
    entropy form. The margin is reported so that positive means satisfied.
    """
    N = as_dim(N)
    T, _ = transport_map(mu0, mu1)
    W = w2(mu0, mu1)
    ent = (entropy(space, mu0), entropy(space, mu1)) if N.infinite else None
    margins = []
    for t in tgrid:
        t = float(t)
        margins.append(
            min(_margin(space, K, Np, mu0, mu1, t, T, W * W, ent) for Np in _nprime(N))
        )
    worst = min(margins)
    return CDResult(worst >= -tol, worst, margins, W, [float(t) for t in tgrid])


def slice_curvature(space: SpaceModel, xs, N) -> np.ndarray:
    """W'' - W'^2 / (N - 1) for the slice weight w = exp(-W).

    A slice satisfies CD(K, N) exactly when this is >= K on its support.
    """
    N = as_dim(N)
    _, L, dL, _, dV, d2V = profile_terms(space, xs)
    dW, d2W = dV + L, d2V + dL
    if N.infinite:
        return d2W
    return d2W - dW * dW / (N.value - 1.0)


# -- random bumps and the violation search --------------------------------


def _x_range(space: SpaceModel) -> tuple[float, float]:
    if space.family is Family.SPHERE:
        return 0.02, math.pi / 2 - 0.02
    if space.family is Family.HYPERBOLIC:
        return 0.02, 6.0
    return 0.02, 8.0


def random_bump_pair(space: SpaceModel, rng: np.random.Generator, window=None):
    """Two bumps on the slice y = 0 with supports inside ``window``."""
    lo, hi = window or _x_range(space)
    out = []
    for _ in range(2):
        c = float(np.exp(rng.uniform(math.log(lo), math.log(hi))))
        rmax = min(c - lo, hi - c, 0.5 * c)
        r = float(rng.uniform(0.1, 1.0)) * rmax
        out.append(SliceMeasure.bump(space, c, max(r, 1e-3 * c)))
    return out[0], out[1]


@dataclass(frozen=True)
class Violation:
    found: bool
    trials: int
    seed: int
    mu0: SliceMeasure | None = None
    mu1: SliceMeasure | None = None
    margin: float | None = None


def find_violation(
    space: SpaceModel, K: float, N, trials: int = 200, seed: int = 0, tgrid=DEFAULT_TGRID
) -> Violation:
    """Search for bump pairs that break the slice inequality.

    Bumps are drawn inside the region where :func:`slice_curvature` is below
    K (when there is one) and are kept small relative to that region.
    """
    rng = np.random.default_rng(seed)
    lo, hi = _x_range(space)
    grid = np.geomspace(lo, hi, 2000)
    bad = grid[slice_curvature(space, grid, N) < K]
    window = (float(bad.min()), float(bad.max())) if bad.size > 1 else (lo, hi)
    if window[1] - window[0] < 1e-6:
        window = (lo, hi)
    for k in range(1, trials + 1):
        mu0, mu1 = random_bump_pair(space, rng, window)
        res = cd_slice_check(space, K, N, mu0, mu1, tgrid)
        if not res.passed:
            return Violation(True, k, seed, mu0, mu1, res.min_margin)
    return Violation(False, trials, seed)
