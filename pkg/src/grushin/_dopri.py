"""Compiled Dormand-Prince 5(4) kernel for the normal-extremal flow.

State layout (length 9): ``x, y, u`` followed by the derivatives of
``(x, y, u)`` with respect to the initial ``u0`` and with respect to ``v``.
``v`` is a parameter, so it is constant by construction.
"""
import math

import numpy as np
from numba import njit

PLANE, SPHERE, HYPERBOLIC, INFINITY = 0, 1, 2, 3

OK, BOUNDARY_HIT, UNDERFLOW, TOO_MANY_STEPS = 0, 1, 2, 3

#: sphere flows stop this close to the pole
POLE_GAP = 1e-10

# Dormand-Prince tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@njit(cache=True)
def coeffs(fam, a, x):
    """(f^2, (f^2)'/2, ((f^2)'/2)') of the even extension of f at x."""
    xa = abs(x)
    sg = 1.0 if x >= 0.0 else -1.0
    if fam == PLANE:
        if a == 0.0:
            return 1.0, 0.0, 0.0
        F2 = xa ** (2 * a)
        G = a * xa ** (2 * a - 1)
        dG = 0.0 if 2 * a == 1.0 else a * (2 * a - 1) * xa ** (2 * a - 2)
        return F2, sg * G, dG
    if fam == INFINITY:
        if xa == 0.0:
            return 0.0, 0.0, 0.0
        e = math.exp(-2.0 / xa)
        return e, sg * e / xa**2, e * (2.0 / xa**4 - 2.0 / xa**3)
    if fam == SPHERE:
        s, c = math.sin(xa), math.cos(xa)
        F2 = s ** (2 * a) / c**2
        if a == 0.0:
            return F2, sg * s / c**3, 1.0 / c**2 + 3 * s * s / c**4
        B = a * c * c + s * s
        dB = 2 * s * c * (1 - a)
        dC = 3 * s / c**4
    else:
        s, c = math.sinh(xa), math.cosh(xa)
        F2 = s ** (2 * a) / c**2
        if a == 0.0:
            return F2, -sg * s / c**3, -1.0 / c**2 + 3 * s * s / c**4
        B = a * c * c - s * s
        dB = 2 * s * c * (a - 1)
        dC = -3 * s / c**4
    A = s ** (2 * a - 1)
    dA = 0.0 if 2 * a == 1.0 else (2 * a - 1) * s ** (2 * a - 2) * c
    C = 1.0 / c**3
    return F2, sg * A * B * C, dA * B * C + A * dB * C + A * B * dC


@njit(cache=True)
def _rhs(fam, a, v, z, out):
    F2, G, dG = coeffs(fam, a, z[0])
    out[0] = z[2]
    out[1] = F2 * v
    out[2] = -G * v * v
    # column d/du0 (dv = 0) then column d/dv (dv = 1)
    for k in range(2):
        dv = float(k)
        o = 3 + 3 * k
        out[o] = z[o + 2]
        out[o + 1] = 2 * G * v * z[o] + F2 * dv
        out[o + 2] = -dG * v * v * z[o] - 2 * G * v * dv


@njit(cache=True)
def integrate(fam, a, z0, v, T, tol, nerr, record, max_steps):
    """Adaptive DOPRI5 with PI step control from t = 0 to t = T.

    The local error of each step is held below ``tol * h`` in a mixed
    absolute/relative norm over the first ``nerr`` components.

    Returns ``(status, t_end, z_end, ts, zs, n)``; ``ts[:n]``, ``zs[:n]``
    hold accepted step points when ``record`` is set.
    """
    n = z0.shape[0]
    z = z0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)
    tmp = np.empty(n)
    znew = np.empty(n)
    cap = max_steps + 1 if record else 1
    ts = np.empty(cap)
    zs = np.empty((cap, n))
    ts[0] = 0.0
    zs[0, :] = z
    nrec = 1

    t = 0.0
    h = min(T, 1e-2)
    err_old = 1e-4
    beta = 0.04
    expo = 0.2 - 0.75 * beta
    pole = math.pi / 2 - POLE_GAP
    _rhs(fam, a, v, z, k1)
    steps = 0
    status = OK
    while t < T:
        if steps >= max_steps:
            status = TOO_MANY_STEPS
            break
        # stretch onto T rather than leave a round-off sized last step
        last = t + 1.01 * h >= T
        if last:
            h = T - t
        if h < 1e-14 * max(min(T, 1.0), t):
            status = UNDERFLOW
            break
        for i in range(n):
            tmp[i] = z[i] + h * A21 * k1[i]
        _rhs(fam, a, v, tmp, k2)
        for i in range(n):
            tmp[i] = z[i] + h * (A31 * k1[i] + A32 * k2[i])
        _rhs(fam, a, v, tmp, k3)
        for i in range(n):
            tmp[i] = z[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        _rhs(fam, a, v, tmp, k4)
        for i in range(n):
            tmp[i] = z[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        _rhs(fam, a, v, tmp, k5)
        for i in range(n):
            tmp[i] = z[i] + h * (
                A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]
            )
        _rhs(fam, a, v, tmp, k6)
        for i in range(n):
            znew[i] = z[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
        _rhs(fam, a, v, znew, k7)

        err = 0.0
        finite = True
        for i in range(nerr):
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            # error per unit step: the global error stays O(tol * T)
            sc = tol * min(h, 1.0) * (1.0 + max(abs(z[i]), abs(znew[i])))
            r = e / sc
            err += r * r
            if not math.isfinite(znew[i]):
                finite = False
        err = math.sqrt(err / nerr)
        steps += 1
        if not finite or not math.isfinite(err):
            h *= 0.1
            continue
        if fam == SPHERE and abs(znew[0]) >= pole:
            # shrink onto the pole; give up once steps are negligible
            if h < 1e-12:
                status = BOUNDARY_HIT
                break
            h *= 0.5
            continue
        if err <= 1.0:
            fac = err**expo / err_old**beta if err > 0 else 0.0
            fac = min(5.0, max(0.1, fac / 0.9))
            h_next = h / fac if fac > 0 else 10.0 * h
            err_old = max(err, 1e-4)
            t = T if last else t + h
            for i in range(n):
                z[i] = znew[i]
                k1[i] = k7[i]
            if record:
                ts[nrec] = t
                zs[nrec, :] = z
                nrec += 1
            h = h_next
        else:
            fac = min(10.0, max(1.0, err**expo / 0.9))
            h /= fac
    return status, t, z, ts, zs, nrec
