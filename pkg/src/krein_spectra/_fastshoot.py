"""Compiled shooting kernels for the two ODE-heavy determinants.

Same Dormand-Prince 5(4) pair and PI controller as :mod:`.integrate`,
specialized to the box potential (two complex components) and the coupled
dynamo system (four complex components) and compiled with numba.  Model
modules fall back to the generic integrator when numba is unavailable; a
cross-check test keeps the two paths honest against each other.

Status codes returned by the kernels: 0 ok, 1 step-size underflow,
2 non-finite state.
"""

from __future__ import annotations

import cmath
import math

try:
    from numba import njit

    AVAILABLE = True
except Exception:  # pragma: no cover - exercised only without numba
    AVAILABLE = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def deco(fn):
            return fn

        return deco if not (args and callable(args[0])) else args[0]


_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_ALPHA = 0.7 / 5.0
_BETA = 0.4 / 5.0

# Dormand-Prince coefficients, spelled out for the compiled kernels
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (
    9017 / 3168,
    -355 / 33,
    46732 / 5247,
    49 / 176,
    -5103 / 18656,
)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


@njit(cache=True)
def shoot_box(mu, G, ex, phase_pos, phase_neg, at_zero, rel_tol, abs_tol):
    """psi(1) for psi'' = (V(y) - mu) psi, psi(-1) = 0, psi'(-1) = 1."""
    t = -1.0
    t_end = 1.0
    y0 = 0.0 + 0.0j
    y1 = 1.0 + 0.0j

    def V(y):
        if y == 0.0:
            return at_zero
        if y > 0.0:
            return G * cmath.exp(ex * math.log(y)) * phase_pos
        return G * cmath.exp(ex * math.log(-y)) * phase_neg

    k1a = y1
    k1b = (V(t) - mu) * y0

    d0 = max(abs(y0), abs(y1))
    d1 = max(abs(k1a), abs(k1b))
    if d0 > 1e-12 and d1 > 1e-12:
        h = 0.01 * d0 / d1
    else:
        h = 2e-3
    if h > 0.2:
        h = 0.2

    err_prev = 1.0
    steps = 0
    while t < t_end:
        if h <= 16.0 * abs(t) * 2.220446049250313e-16 + 5e-308:
            return 1, 0.0j
        if steps > 1000000:
            return 2, 0.0j
        if t + h > t_end:
            h = t_end - t

        u0 = y0 + h * _A21 * k1a
        u1 = y1 + h * _A21 * k1b
        k2a = u1
        k2b = (V(t + _C2 * h) - mu) * u0

        u0 = y0 + h * (_A31 * k1a + _A32 * k2a)
        u1 = y1 + h * (_A31 * k1b + _A32 * k2b)
        k3a = u1
        k3b = (V(t + _C3 * h) - mu) * u0

        u0 = y0 + h * (_A41 * k1a + _A42 * k2a + _A43 * k3a)
        u1 = y1 + h * (_A41 * k1b + _A42 * k2b + _A43 * k3b)
        k4a = u1
        k4b = (V(t + _C4 * h) - mu) * u0

        u0 = y0 + h * (_A51 * k1a + _A52 * k2a + _A53 * k3a + _A54 * k4a)
        u1 = y1 + h * (_A51 * k1b + _A52 * k2b + _A53 * k3b + _A54 * k4b)
        k5a = u1
        k5b = (V(t + _C5 * h) - mu) * u0

        u0 = y0 + h * (_A61 * k1a + _A62 * k2a + _A63 * k3a + _A64 * k4a + _A65 * k5a)
        u1 = y1 + h * (_A61 * k1b + _A62 * k2b + _A63 * k3b + _A64 * k4b + _A65 * k5b)
        k6a = u1
        k6b = (V(t + h) - mu) * u0

        n0 = y0 + h * (_B1 * k1a + _B3 * k3a + _B4 * k4a + _B5 * k5a + _B6 * k6a)
        n1 = y1 + h * (_B1 * k1b + _B3 * k3b + _B4 * k4b + _B5 * k5b + _B6 * k6b)
        k7a = n1
        k7b = (V(t + h) - mu) * n0

        e0 = h * (_E1 * k1a + _E3 * k3a + _E4 * k4a + _E5 * k5a + _E6 * k6a + _E7 * k7a)
        e1 = h * (_E1 * k1b + _E3 * k3b + _E4 * k4b + _E5 * k5b + _E6 * k6b + _E7 * k7b)

        if not (
            math.isfinite(n0.real)
            and math.isfinite(n0.imag)
            and math.isfinite(n1.real)
            and math.isfinite(n1.imag)
        ):
            return 2, 0.0j

        sc0 = abs_tol + rel_tol * max(abs(y0), abs(n0))
        sc1 = abs_tol + rel_tol * max(abs(y1), abs(n1))
        err = math.sqrt(
            (
                (e0.real / sc0) ** 2
                + (e0.imag / sc0) ** 2
                + (e1.real / sc1) ** 2
                + (e1.imag / sc1) ** 2
            )
            / 4.0
        )
        if err <= 1.0:
            t += h
            y0 = n0
            y1 = n1
            k1a = k7a
            k1b = k7b
            steps += 1
            if err < 1e-10:
                err = 1e-10
            factor = _SAFETY * err ** (-_ALPHA) * err_prev**_BETA
            err_prev = err
            if factor > _MAX_FACTOR:
                factor = _MAX_FACTOR
            elif factor < _MIN_FACTOR:
                factor = _MIN_FACTOR
            h *= factor
        else:
            fac = _SAFETY * err ** (-0.2)
            if fac < _MIN_FACTOR:
                fac = _MIN_FACTOR
            elif fac > 1.0:
                fac = 1.0
            h *= fac

    return 0, y0


@njit(cache=True)
def shoot_dynamo(lam, coeffs, llp1, r0, s0, s1, s2, s3, rel_tol, abs_tol):
    """Boundary state of the coupled poloidal/toroidal system from r0 to 1.

    State (f1, f1', f2, f2') with
        f1'' = (llp1/r^2 + lam) f1 - alpha f2
        f2'' = (llp1/r^2 + lam) f2 + alpha' f1' + lam alpha f1 - alpha^2 f2
    where alpha(r) is the polynomial with the (possibly complex) ``coeffs``.
    """
    t = r0
    t_end = 1.0
    y0, y1, y2, y3 = s0, s1, s2, s3

    n_c = coeffs.shape[0]

    def rhs(r, f1, d1, f2, d2):
        a = coeffs[n_c - 1]
        ap = a * (n_c - 1)
        for i in range(n_c - 2, -1, -1):
            a = a * r + coeffs[i]
            if i >= 1:
                ap = ap * r + coeffs[i] * i
        if n_c == 1:
            ap = 0.0 * coeffs[0]
        L = llp1 / (r * r) + lam
        g1 = L * f1 - a * f2
        g2 = L * f2 + ap * d1 + lam * a * f1 - a * a * f2
        return d1, g1, d2, g2

    k1 = rhs(t, y0, y1, y2, y3)

    d0m = max(max(abs(y0), abs(y1)), max(abs(y2), abs(y3)))
    d1m = max(max(abs(k1[0]), abs(k1[1])), max(abs(k1[2]), abs(k1[3])))
    if d0m > 1e-12 and d1m > 1e-12:
        h = 0.01 * d0m / d1m
    else:
        h = 1e-3 * (t_end - t)
    if h > 0.1 * (t_end - t):
        h = 0.1 * (t_end - t)

    err_prev = 1.0
    steps = 0
    while t < t_end:
        if h <= 16.0 * abs(t) * 2.220446049250313e-16 + 5e-308:
            return 1, 0.0j, 0.0j, 0.0j, 0.0j
        if steps > 1000000:
            return 2, 0.0j, 0.0j, 0.0j, 0.0j
        if t + h > t_end:
            h = t_end - t

        k2 = rhs(
            t + _C2 * h,
            y0 + h * _A21 * k1[0],
            y1 + h * _A21 * k1[1],
            y2 + h * _A21 * k1[2],
            y3 + h * _A21 * k1[3],
        )
        k3 = rhs(
            t + _C3 * h,
            y0 + h * (_A31 * k1[0] + _A32 * k2[0]),
            y1 + h * (_A31 * k1[1] + _A32 * k2[1]),
            y2 + h * (_A31 * k1[2] + _A32 * k2[2]),
            y3 + h * (_A31 * k1[3] + _A32 * k2[3]),
        )
        k4 = rhs(
            t + _C4 * h,
            y0 + h * (_A41 * k1[0] + _A42 * k2[0] + _A43 * k3[0]),
            y1 + h * (_A41 * k1[1] + _A42 * k2[1] + _A43 * k3[1]),
            y2 + h * (_A41 * k1[2] + _A42 * k2[2] + _A43 * k3[2]),
            y3 + h * (_A41 * k1[3] + _A42 * k2[3] + _A43 * k3[3]),
        )
        k5 = rhs(
            t + _C5 * h,
            y0 + h * (_A51 * k1[0] + _A52 * k2[0] + _A53 * k3[0] + _A54 * k4[0]),
            y1 + h * (_A51 * k1[1] + _A52 * k2[1] + _A53 * k3[1] + _A54 * k4[1]),
            y2 + h * (_A51 * k1[2] + _A52 * k2[2] + _A53 * k3[2] + _A54 * k4[2]),
            y3 + h * (_A51 * k1[3] + _A52 * k2[3] + _A53 * k3[3] + _A54 * k4[3]),
        )
        k6 = rhs(
            t + h,
            y0 + h * (_A61 * k1[0] + _A62 * k2[0] + _A63 * k3[0] + _A64 * k4[0] + _A65 * k5[0]),
            y1 + h * (_A61 * k1[1] + _A62 * k2[1] + _A63 * k3[1] + _A64 * k4[1] + _A65 * k5[1]),
            y2 + h * (_A61 * k1[2] + _A62 * k2[2] + _A63 * k3[2] + _A64 * k4[2] + _A65 * k5[2]),
            y3 + h * (_A61 * k1[3] + _A62 * k2[3] + _A63 * k3[3] + _A64 * k4[3] + _A65 * k5[3]),
        )
        n0 = y0 + h * (_B1 * k1[0] + _B3 * k3[0] + _B4 * k4[0] + _B5 * k5[0] + _B6 * k6[0])
        n1 = y1 + h * (_B1 * k1[1] + _B3 * k3[1] + _B4 * k4[1] + _B5 * k5[1] + _B6 * k6[1])
        n2 = y2 + h * (_B1 * k1[2] + _B3 * k3[2] + _B4 * k4[2] + _B5 * k5[2] + _B6 * k6[2])
        n3 = y3 + h * (_B1 * k1[3] + _B3 * k3[3] + _B4 * k4[3] + _B5 * k5[3] + _B6 * k6[3])
        k7 = rhs(t + h, n0, n1, n2, n3)

        ok = True
        for v in (n0, n1, n2, n3):
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                ok = False
        if not ok:
            return 2, 0.0j, 0.0j, 0.0j, 0.0j

        acc = 0.0
        olds = (y0, y1, y2, y3)
        news = (n0, n1, n2, n3)
        for m in range(4):
            e = h * (
                _E1 * k1[m]
                + _E3 * k3[m]
                + _E4 * k4[m]
                + _E5 * k5[m]
                + _E6 * k6[m]
                + _E7 * k7[m]
            )
            sc = abs_tol + rel_tol * max(abs(olds[m]), abs(news[m]))
            acc += (e.real / sc) ** 2 + (e.imag / sc) ** 2
        err = math.sqrt(acc / 8.0)

        if err <= 1.0:
            t += h
            y0, y1, y2, y3 = n0, n1, n2, n3
            k1 = k7
            steps += 1
            if err < 1e-10:
                err = 1e-10
            factor = _SAFETY * err ** (-_ALPHA) * err_prev**_BETA
            err_prev = err
            if factor > _MAX_FACTOR:
                factor = _MAX_FACTOR
            elif factor < _MIN_FACTOR:
                factor = _MIN_FACTOR
            h *= factor
        else:
            fac = _SAFETY * err ** (-0.2)
            if fac < _MIN_FACTOR:
                fac = _MIN_FACTOR
            elif fac > 1.0:
                fac = 1.0
            h *= fac

    return 0, y0, y1, y2, y3
