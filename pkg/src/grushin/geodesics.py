"""Normal extremals, shooting distances and scaling probes.

Geodesics are computed on the reflection-symmetric full space, where the
warp factor is extended evenly across ``x = 0``. The Hamiltonian is

    H(x, y, u, v) = (u^2 + f(x)^2 v^2) / 2

with Hamilton's equations ``x' = u``, ``y' = f^2 v``, ``u' = -f f' v^2``,
``v' = 0``. On the sphere ``y`` is an angle and the chart ends at the pole
``|x| = pi/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.stats import qmc

from . import _dopri
from .errors import DomainError, IntegrationError, NoConvergence
from .model import Family, SpaceModel, metric_lengths, profile_terms

__all__ = [
    "DEFAULT_SEED",
    "GeodesicState",
    "Trajectory",
    "DistanceResult",
    "hamiltonian",
    "flow",
    "shoot",
    "distance_bvp",
    "solve_distance",
    "distance_graph_oracle",
    "convexity_probe",
    "vertical_distance",
    "dimension_exponent",
    "dimension_slope",
]

DEFAULT_SEED = 20240917
MAX_STEPS = 200_000
#: step cap while screening shooting candidates
SCREEN_STEPS = 20_000
#: step cap inside Newton; minimisers need a few thousand steps at most
NEWTON_STEPS = 50_000

_CODES = {
    Family.PLANE: _dopri.PLANE,
    Family.SPHERE: _dopri.SPHERE,
    Family.HYPERBOLIC: _dopri.HYPERBOLIC,
    Family.INFINITY: _dopri.INFINITY,
}


def _code(space: SpaceModel) -> tuple[int, float]:
    return _CODES[space.family], float(space.alpha)


def _f2(space: SpaceModel, x: float) -> float:
    fam, a = _code(space)
    return _dopri.coeffs(fam, a, float(x))[0]


def _in_chart(space: SpaceModel, x: float) -> bool:
    if not math.isfinite(x):
        return False
    return space.family is not Family.SPHERE or abs(x) < math.pi / 2


@dataclass(frozen=True)
class GeodesicState:
    """Point (x, y) with covector (u, v) in canonical coordinates."""

    x: float
    y: float
    u: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.u, self.v])


@dataclass(frozen=True)
class Trajectory:
    """Accepted step points of a flow, with Hermite-interpolable data."""

    t: np.ndarray
    states: np.ndarray  # (n, 4): x, y, u, v
    length: float
    boundary_hit: bool = False

    @property
    def samples(self) -> list[tuple[float, GeodesicState]]:
        return [(float(t), GeodesicState(*map(float, s))) for t, s in zip(self.t, self.states)]

    @property
    def end(self) -> GeodesicState:
        return GeodesicState(*map(float, self.states[-1]))

    def min_x(self) -> float:
        """Minimum of x(t), using the cubic Hermite interpolant on each step."""
        t, x, u = self.t, self.states[:, 0], self.states[:, 2]
        best = float(x.min())
        if len(t) < 2:
            return best
        h = np.diff(t)
        x0, x1, d0, d1 = x[:-1], x[1:], u[:-1] * h, u[1:] * h
        # x(s) = c0 + c1 s + c2 s^2 + c3 s^3 on s in [0, 1]
        c1 = d0
        c2 = 3 * (x1 - x0) - 2 * d0 - d1
        c3 = 2 * (x0 - x1) + d0 + d1
        qa, qb, qc = 3 * c3, 2 * c2, c1
        with np.errstate(invalid="ignore", divide="ignore"):
            disc = np.sqrt(np.maximum(qb * qb - 4 * qa * qc, 0.0))
            roots = np.stack([(-qb - disc) / (2 * qa), (-qb + disc) / (2 * qa), -qc / qb])
        for r in roots:
            ok = np.isfinite(r) & (r > 0) & (r < 1)
            if ok.any():
                s = r[ok]
                val = x0[ok] + c1[ok] * s + c2[ok] * s * s + c3[ok] * s**3
                best = min(best, float(val.min()))
        return best


def hamiltonian(space: SpaceModel, s: GeodesicState) -> float:
    """H = (u^2 + f(x)^2 v^2) / 2 on the even extension of the chart."""
    if s.v == 0.0:
        if not math.isfinite(s.x):
            raise DomainError(f"non-finite x={s.x}")
        return 0.5 * s.u * s.u
    if not _in_chart(space, s.x):
        raise DomainError(f"H undefined at x={s.x} with v != 0 for {space}")
    return 0.5 * (s.u * s.u + _f2(space, s.x) * s.v * s.v)


def _run(space, x0, y0, u0, v, T, tol, record, jac, max_steps=MAX_STEPS):
    fam, a = _code(space)
    z0 = np.zeros(9)
    z0[0], z0[1], z0[2] = x0, y0, u0
    z0[5] = 1.0  # d u / d u0
    nerr = 9 if jac else 3
    return _dopri.integrate(fam, a, z0, float(v), float(T), float(tol), nerr, record, max_steps)


def flow(space: SpaceModel, s0: GeodesicState, T: float, tol: float = 1e-10) -> Trajectory:
    """Integrate Hamilton's equations from ``s0`` for time ``T``.

    Stops early, with ``boundary_hit`` set, if a sphere trajectory reaches
    the pole.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError(f"tol={tol} outside [1e-12, 1e-4]")
    if not _in_chart(space, s0.x):
        raise DomainError(f"initial x={s0.x} outside the chart of {space}")
    H0 = hamiltonian(space, s0)
    # the flow is homogeneous in the covector: integrate at unit speed so the
    # mixed absolute/relative error control does not depend on the scale of H
    c = math.sqrt(2 * H0)
    if not (c > 0 and math.isfinite(c)):
        c = 1.0
    status, t_end, _, ts, zs, n = _run(space, s0.x, s0.y, s0.u / c, s0.v / c, c * T, tol, True, False)
    t_end /= c
    if status == _dopri.UNDERFLOW:
        raise IntegrationError(f"step size underflow at t={t_end:.6g}")
    if status == _dopri.TOO_MANY_STEPS:
        raise IntegrationError(f"more than {MAX_STEPS} steps before t={T}")
    states = np.empty((n, 4))
    states[:, :2] = zs[:n, :2]
    states[:, 2] = c * zs[:n, 2]
    states[:, 3] = s0.v
    return Trajectory(
        t=ts[:n] / c,
        states=states,
        length=math.sqrt(2 * H0) * t_end,
        boundary_hit=status == _dopri.BOUNDARY_HIT,
    )


# -- shooting -------------------------------------------------------------


def _wrap(space: SpaceModel, dy: float) -> float:
    if space.family is Family.SPHERE:
        return math.remainder(dy, 2 * math.pi)
    return dy


def shoot(space, p, q, u0, v, tol=1e-10, max_steps=MAX_STEPS):
    """Endpoint residual at t = 1 and its Jacobian in (u0, v)."""
    status, _, z, *_ = _run(space, p[0], p[1], u0, v, 1.0, tol, False, True, max_steps)
    if status != _dopri.OK:
        return None, None
    r = np.array([z[0] - q[0], _wrap(space, z[1] - q[1])])
    J = np.array([[z[3], z[6]], [z[4], z[7]]])
    return r, J


def _pivot_bound(space, p, q):
    """Best length of the admissible path: horizontal, vertical at x*, horizontal."""
    dy = abs(_wrap(space, q[1] - p[1]))
    xa, xb = sorted((p[0], q[0]))
    if dy == 0:
        return xb - xa, max(xb, 1e-3)
    hi = math.pi / 2 - 1e-3 if space.family is Family.SPHERE else max(4 * xb, 4.0)
    xs = np.concatenate([np.geomspace(1e-3, hi, 400), [xa, xb]])
    xs = xs[xs > 0]
    fam, a = _code(space)
    f = np.sqrt([_dopri.coeffs(fam, a, float(x))[0] for x in xs])
    with np.errstate(divide="ignore"):
        cost = np.abs(xs - p[0]) + np.abs(xs - q[0]) + dy / f
    i = int(np.argmin(cost))
    return float(cost[i]), float(xs[i])


def _length_floor(space, p, q, upper):
    """Lower bound on d(p, q) from |dy/ds| <= f(x) along unit-speed curves."""
    dx = abs(q[0] - p[0])
    dy = abs(_wrap(space, q[1] - p[1]))
    if dy == 0 or upper <= dx:
        return dx
    top = math.pi / 2 - 1e-9 if space.family is Family.SPHERE else math.inf
    xs = np.geomspace(1e-6, min(max(p[0], q[0]) + upper, top), 400)
    fam, a = _code(space)
    f = np.sqrt([_dopri.coeffs(fam, a, float(x))[0] for x in xs])
    fmax = np.maximum.accumulate(f)
    # a curve of length L stays in |x| <= x_p + L
    reach = lambda L: float(fmax[min(np.searchsorted(xs, min(p[0], q[0]) + L), len(xs) - 1)])
    lo, hi = dx, upper
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if mid * reach(mid) >= dy:
            hi = mid
        else:
            lo = mid
    return lo


@dataclass(frozen=True)
class DistanceResult:
    """Outcome of a shooting distance computation."""

    d: float
    method: str
    converged_shots: int
    seed: int
    covector: tuple[float, float] | None = None
    p: tuple[float, float] = (0.0, 0.0)
    q: tuple[float, float] = (0.0, 0.0)
    lengths: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "method": self.method,
            "converged_shots": self.converged_shots,
            "seed": self.seed,
        }


def _check_endpoint(space, pt):
    x, y = float(pt[0]), float(pt[1])
    hi = math.pi / 2 if space.family is Family.SPHERE else math.inf
    if not (0.0 <= x < hi) or not math.isfinite(y):
        raise DomainError(f"endpoint {pt} outside the closed half-space of {space}")
    return x, y


def _newton(space, p, q, w0, tol, maxiter=60):
    """Damped Newton on the shooting residual; returns (u0, v) or None.

    Iterates past the acceptance threshold until the residual stagnates,
    so converged covectors are polished to integrator accuracy.
    """
    w = np.array(w0, dtype=float)
    r, J = shoot(space, p, q, *w, tol=tol, max_steps=NEWTON_STEPS)
    if r is None:
        return None
    nr = float(np.linalg.norm(r))
    scale = 1.0 + abs(q[0]) + abs(q[1])
    for _ in range(maxiter):
        if nr <= 1e-14 * scale:
            break
        # Newton in (u0, log|v|): the turning point, and with it the
        # endpoint, depends smoothly on log|v| even where f is exponentially flat
        logv = w[1] != 0.0
        Js = J * np.array([1.0, w[1]]) if logv else J
        try:
            step = np.linalg.lstsq(Js, -r, rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        if logv:
            step[1] = min(max(step[1], -5.0), 5.0)
        lam = 1.0
        while lam > 1e-4:
            if logv:
                w_try = np.array([w[0] + lam * step[0], w[1] * math.exp(lam * step[1])])
            else:
                w_try = w + lam * step
            r_try, J_try = shoot(space, p, q, *w_try, tol=tol, max_steps=NEWTON_STEPS)
            if r_try is not None and np.linalg.norm(r_try) < (1 - 0.25 * lam) * nr:
                w, r, J, nr = w_try, r_try, J_try, float(np.linalg.norm(r_try))
                break
            lam *= 0.5
        else:
            break
    return w if nr <= 1e-10 * scale else None


def solve_distance(
    space: SpaceModel,
    p,
    q,
    restarts: int = 8,
    seed: int = DEFAULT_SEED,
    tol: float = 1e-10,
    candidates: int = 256,
) -> DistanceResult:
    """Shortest normal extremal from p to q found by multi-start shooting.

    ``candidates`` quasi-random covectors, plus half as many built from a
    turning abscissa, are screened by endpoint residual and Newton-step
    size. They are polished in rank order by Newton's method with the
    variational Jacobian until ``restarts`` of them converge (at most
    ``4 * restarts`` attempts, or ``16 * restarts`` while every converged
    shot is longer than the pivot path, which is then not minimal). The result is the minimal length among all
    converged shots (and, on the sphere, the meridian through the pole).
    """
    if restarts < 8:
        raise ValueError("restarts must be >= 8")
    p = _check_endpoint(space, p)
    q = _check_endpoint(space, q)
    if p[0] == q[0] and _wrap(space, q[1] - p[1]) == 0.0:
        return DistanceResult(0.0, "trivial", 0, seed, (0.0, 0.0), p, q)

    bound, xstar = _pivot_bound(space, p, q)
    f0 = math.sqrt(_f2(space, p[0]))
    fref = max(f0, math.sqrt(_f2(space, xstar)), 1e-300)
    dx = q[0] - p[0]

    # screening: angle of the initial unit covector and total length
    # the reference scale of v is only a guess, so it gets a log-uniform factor
    sob = qmc.Halton(d=3, scramble=True, seed=seed).random(candidates)
    lo = max(_length_floor(space, p, q, bound), 1e-3 * bound)
    theta = np.pi * (2 * sob[:, 0] - 1)
    ell = lo + (bound * 1.05 - lo) * sob[:, 1]
    vfac = 4.0 ** (2 * sob[:, 2] - 1)
    inits = [(dx, 0.0)]
    inits += [
        (e * math.cos(th), e * math.sin(th) * k / fref) for th, e, k in zip(theta, ell, vfac)
    ]
    # second family parametrised by the outermost abscissa x_t (where u = 0),
    # drawn around the pivot abscissa; conservation of H then fixes
    # |v| = |u0| / sqrt(f(x_t)^2 - f(x_p)^2)
    top = math.pi / 2 - 1e-3 if space.family is Family.SPHERE else math.inf
    tp = qmc.Halton(d=2, scramble=True, seed=seed + 1).random(candidates // 2)
    turning = []
    for s_u, s_x in tp:
        u0 = (lo + (bound * 1.05 - lo) * s_u) * (1 if s_x < 0.5 else -1)
        xt = min(xstar * 3.0 ** (4 * (s_x % 0.5) - 1), top)
        gap = _f2(space, xt) - f0 * f0
        if gap > 0:
            vt = abs(u0) / math.sqrt(gap)
            turning += [(u0, vt), (u0, -vt)]
    n_plain = len(inits)
    inits += turning
    # rank by the relative size of the Newton step in (u0, log|v|): in
    # oscillatory regimes the raw residual says little about the distance
    # to a solution; near the singular set the basins are thin and the
    # residual ranks better. The orders are interleaved.
    scored = []
    for k, w in enumerate(inits):
        r, J = shoot(space, p, q, *w, tol=max(tol, 1e-8), max_steps=SCREEN_STEPS)
        if r is None or not np.all(np.isfinite(r)) or not np.all(np.isfinite(J)):
            continue
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        size = math.hypot(step[0], step[1] * fref) / max(math.hypot(w[0], w[1] * fref), 1e-300)
        if w[1] != 0.0:
            size = min(size, math.hypot(step[0] / max(abs(w[0]), 1e-3), step[1] / w[1]))
        scored.append((size, float(np.linalg.norm(r)), k, w))
    plain = [c for c in scored if c[2] < n_plain]
    turn = [c for c in scored if c[2] >= n_plain]
    ranked = [
        sorted(plain, key=lambda c: c[0]),
        sorted(plain, key=lambda c: c[1]),
        sorted(turn, key=lambda c: c[0]),
    ]
    order, seen = [], set()
    for k in range(max(map(len, ranked), default=0)):
        for lst in ranked:
            if k < len(lst) and lst[k][2] not in seen:
                seen.add(lst[k][2])
                order.append(lst[k][3])

    lengths, best = [], (math.inf, None)
    attempts = 0
    for w in order:
        # a shot longer than the pivot path is certainly not minimal
        done = len(lengths) >= restarts and best[0] <= bound * (1 + 1e-9)
        if done or attempts >= (4 if best[0] <= bound else 16) * restarts:
            break
        attempts += 1
        sol = _newton(space, p, q, w, tol)
        if sol is None:
            continue
        length = math.sqrt(sol[0] ** 2 + f0 * f0 * sol[1] ** 2)
        lengths.append(length)
        if length < best[0]:
            best = (length, (float(sol[0]), float(sol[1])))

    method = "shooting"
    if space.family is Family.SPHERE:
        meridian = math.pi - p[0] - q[0]
        if meridian < best[0] - 1e-12:
            best, method = (meridian, None), "meridian"
    if best[0] == math.inf:
        raise NoConvergence(
            f"no shooting restart converged for {space} from {p} to {q} (seed={seed})"
        )
    return DistanceResult(best[0], method, len(lengths), seed, best[1], p, q, lengths)


def distance_bvp(space: SpaceModel, p, q, restarts: int = 8, seed: int = DEFAULT_SEED) -> float:
    """Distance between two points of the closed half-space."""
    return solve_distance(space, p, q, restarts=restarts, seed=seed).d


def _adapted_nodes(space, x_lo, x_hi, n):
    """n abscissae with spacing roughly proportional to 1/f, floored at 1/4 of uniform."""
    fine = np.linspace(x_lo, x_hi, 20 * n)
    f = np.exp(profile_terms(space, fine)[0])
    dens = f / f.mean() + 0.25
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(fine))])
    return np.interp(np.linspace(0.0, cum[-1], n), cum, fine)


def distance_graph_oracle(space: SpaceModel, p, q, n: int = 200, margin: float = 0.25) -> float:
    """Shortest path on a 16-neighbour grid over a box around p and q.

    Edge weights are Riemannian lengths evaluated at edge midpoints, so the
    value is an upper bound for the distance up to discretisation error.
    The x-spacing follows 1/f so that cells are close to square in the
    metric; the number of y-nodes (between n and 4n) is chosen to match.
    The coordinates of p and q are inserted into the node sets so that both
    endpoints are grid nodes; where f is small a single y-cell can be long.
    """
    if n < 100:
        raise ValueError("n must be >= 100")
    p = (float(p[0]), float(p[1]))
    q = (float(q[0]), float(q[1]))
    xa, xb = sorted((p[0], q[0]))
    ya, yb = sorted((p[1], q[1]))
    if xa <= 0:
        raise DomainError("grid box touches the singular set x = 0")
    # the box must hold the pivot path
    _, xstar = _pivot_bound(space, p, q)
    top = max(xb, xstar)
    x_lo = max(xa - margin * (top - xa + 1e-3), 0.5 * xa)
    x_hi = top + margin * (top - xa + 1e-3)
    if space.family is Family.SPHERE:
        x_hi = min(x_hi, math.pi / 2 - 0.05)
    xs = _adapted_nodes(space, x_lo, x_hi, n)
    hx = np.diff(xs)
    fm = np.exp(profile_terms(space, 0.5 * (xs[1:] + xs[:-1]))[0])
    hy = float(np.median(hx * fm))
    yc = 0.5 * (ya + yb)
    half = 0.5 * max(yb - ya, 1e-3) * (1 + 2 * margin)
    ny = int(np.clip(math.ceil(2 * half / hy) + 1, n, 4 * n))
    xs = np.unique(np.concatenate([xs, [p[0], q[0]]]))
    ys = np.unique(np.concatenate([np.linspace(yc - half, yc + half, ny), [p[1], q[1]]]))
    nx, ny = xs.size, ys.size
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    idx = np.arange(nx * ny).reshape(nx, ny)

    rows, cols, wts = [], [], []
    steps = ((1, 0), (0, 1), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1))
    for di, dj in steps:
        i0 = slice(0, nx - di)
        j0 = slice(max(0, -dj), ny - max(0, dj))
        i1 = slice(di, nx)
        j1 = slice(j0.start + dj, j0.stop + dj)
        xm = 0.5 * (X[i0, j0] + X[i1, j1])
        w = metric_lengths(space, xm, X[i1, j1] - X[i0, j0], Y[i1, j1] - Y[i0, j0])
        rows.append(idx[i0, j0].ravel())
        cols.append(idx[i1, j1].ravel())
        wts.append(w.ravel())

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    w = np.concatenate(wts)
    G = sparse.coo_matrix((w, (r, c)), shape=(nx * ny, nx * ny)).tocsr()
    src = idx[np.searchsorted(xs, p[0]), np.searchsorted(ys, p[1])]
    dst = idx[np.searchsorted(xs, q[0]), np.searchsorted(ys, q[1])]
    if src == dst:
        return 0.0
    dist = csgraph.dijkstra(G, directed=False, indices=src)
    return float(dist[dst])


def convexity_probe(space: SpaceModel, p, q, seed: int = DEFAULT_SEED) -> float:
    """Minimum of x along the minimising geodesic from p to q."""
    res = solve_distance(space, p, q, seed=seed)
    if res.method == "trivial":
        return res.p[0]
    if res.method == "meridian":
        return min(res.p[0], res.q[0])
    u0, v = res.covector
    traj = flow(space, GeodesicState(res.p[0], res.p[1], u0, v), 1.0)
    return traj.min_x()


def vertical_distance(space: SpaceModel, delta: float, seed: int = DEFAULT_SEED) -> float:
    """d((0, 0), (0, delta)) for the families with a singular line at x = 0."""
    if space.family not in (Family.PLANE, Family.INFINITY):
        raise ValueError("dimension exponent is defined for the plane and infinity families")
    if not 1e-6 < delta < 0.5:
        raise ValueError(f"delta={delta} outside (1e-6, 0.5)")
    return distance_bvp(space, (0.0, 0.0), (0.0, delta), seed=seed)


def dimension_exponent(space: SpaceModel, delta: float, seed: int = DEFAULT_SEED) -> float:
    """log(delta) / log d((0, 0), (0, delta))."""
    return math.log(delta) / math.log(vertical_distance(space, delta, seed))


def dimension_slope(space: SpaceModel, deltas, seed: int = DEFAULT_SEED) -> float:
    """Least-squares slope of log(delta) against log(d) over several deltas.

    Unlike the pointwise exponent this removes the constant prefactor of
    d ~ c * delta^(1/k), so it recovers k already at moderate delta.
    """
    deltas = np.asarray(deltas, dtype=float)
    d = np.array([vertical_distance(space, float(t), seed) for t in deltas])
    slope, _ = np.polyfit(np.log(d), np.log(deltas), 1)
    return float(slope)
