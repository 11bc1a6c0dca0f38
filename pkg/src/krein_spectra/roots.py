"""Complex root finding for characteristic functions.

Newton iteration with finite-difference derivatives solves the scalar
problems (shooting determinants, Airy determinants); a 2x2 complex Newton
locates double roots (exceptional points) in an (eigenvalue, parameter)
pair, and a 3x3 variant locates the cusp where two exceptional points
coalesce over two parameters.  An adaptive argument-principle counter over
rectangles provides an independent completeness oracle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import (
    DerivativeVanished,
    InsufficientSampling,
    NoConvergence,
    RootOnContour,
    SingularJacobian,
)

__all__ = [
    "RootResult",
    "ExceptionalPoint",
    "find_root_complex",
    "refine_eigenvalue",
    "find_double_root",
    "find_coalescence",
    "count_roots_in_contour",
    "spectral_sort_key",
]


def _round_sig(x: float, digits: int = 12) -> float:
    if x == 0.0 or not math.isfinite(x):
        return x
    return round(x, digits - 1 - math.floor(math.log10(abs(x))))


def spectral_sort_key(z: complex) -> tuple[float, float, float]:
    """Deterministic (modulus, real, imag) ordering key for spectra.

    Modulus and real part are rounded to 12 significant digits so that the
    members of a conjugate pair (whose computed moduli differ in the last
    bits) always order by imaginary part, identically across solver paths.
    """
    return (_round_sig(abs(z)), _round_sig(z.real), z.imag)

_DERIV_FLOOR = 1e-14


@dataclass
class RootResult:
    root: complex
    residual: float
    iterations: int
    converged: bool


@dataclass
class ExceptionalPoint:
    """A double root of a characteristic function.

    ``parameter`` is the sweep parameter at the coalescence; for
    two-parameter localizations ``parameter2`` carries the second one.
    ``residual_f`` and ``residual_df`` are |f| and |df/dz| at the solution.
    """

    parameter: float
    eigenvalue: complex
    residual_f: float
    residual_df: float
    parameter2: Optional[float] = None


def _fd_step(z: complex) -> float:
    return max(1e-7, 1e-7 * abs(z))


def _dz(f: Callable[[complex], complex], z: complex, fz: complex | None = None) -> complex:
    h = _fd_step(z)
    return (f(z + h) - f(z - h)) / (2.0 * h)


def find_root_complex(
    f: Callable[[complex], complex],
    guess: complex,
    tol: float,
    max_iter: int = 50,
) -> RootResult:
    """Newton iteration for an analytic ``f`` from ``guess``.

    The derivative is a central finite difference with adaptive step.  The
    result is converged once ``|f(root)| <= tol``; iteration also stops when
    the Newton step stagnates at rounding level, in which case ``converged``
    still reflects the ``|f|`` criterion.  Raises
    :class:`DerivativeVanished` when |f'| falls below the floor (candidate
    double root) and :class:`NoConvergence` after ``max_iter`` steps.
    """
    z = complex(guess)
    fz = f(z)
    best_z, best_f = z, abs(fz)
    stagnant = 0
    for it in range(1, max_iter + 1):
        if abs(fz) <= tol:
            return RootResult(root=z, residual=abs(fz), iterations=it - 1, converged=True)
        df = _dz(f, z)
        scale = max(abs(fz), 1.0)
        if abs(df) <= _DERIV_FLOOR * scale:
            raise DerivativeVanished(
                f"|f'| ~ {abs(df):.3e} near z={z!r}; possible double root"
            )
        step = fz / df
        z = z - step
        fz = f(z)
        improved = abs(fz) < best_f
        if improved:
            best_z, best_f = z, abs(fz)
        # tiny non-improving steps mean the evaluation noise floor is reached
        if abs(step) <= 1e-9 * max(1.0, abs(z)) and not improved:
            stagnant += 1
            if stagnant >= 2:
                return RootResult(
                    root=best_z,
                    residual=best_f,
                    iterations=it,
                    converged=best_f <= tol,
                )
        else:
            stagnant = 0
    if best_f <= tol:
        return RootResult(root=best_z, residual=best_f, iterations=max_iter, converged=True)
    raise NoConvergence(
        f"no root after {max_iter} iterations from {guess!r} (best |f| = {best_f:.3e})"
    )


def refine_eigenvalue(
    f: Callable[[complex], complex],
    guess: complex,
    pos_tol: float = 1e-12,
    max_iter: int = 50,
) -> RootResult:
    """Newton refinement with a position-based tolerance.

    Characteristic functions here have wildly varying magnitudes, so the
    residual tolerance for :func:`find_root_complex` is derived from the
    local derivative: |f| <= |f'| * pos_tol * max(1, |z|).
    """
    df = _dz(f, complex(guess))
    tol = max(abs(df), _DERIV_FLOOR) * pos_tol * max(1.0, abs(guess))
    return find_root_complex(f, guess, tol=tol, max_iter=max_iter)


def _solve2(a11, a12, a21, a22, b1, b2):
    det = a11 * a22 - a12 * a21
    if abs(det) <= _DERIV_FLOOR * (abs(a11 * a22) + abs(a12 * a21) + 1e-300):
        raise SingularJacobian("2x2 Newton Jacobian is singular")
    return (b1 * a22 - b2 * a12) / det, (a11 * b2 - a21 * b1) / det


def find_double_root(
    f: Callable[[complex, complex], complex],
    guess_z: complex,
    guess_p: float,
    tol: float = 1e-10,
    max_iter: int = 60,
) -> ExceptionalPoint:
    """Locate (z, p) with f(z, p) = 0 and df/dz(z, p) = 0.

    2D Newton on the pair (f, f_z); the parameter is complexified during the
    iteration (the determinants are analytic in it) and folded back to its
    real part at the end.  Residuals of both conditions must fall below
    ``tol`` (scaled by the local function magnitude) for success.
    """
    z = complex(guess_z)
    p = complex(guess_p)

    def fz_at(zz: complex, pp: complex) -> complex:
        h = _fd_step(zz)
        return (f(zz + h, pp) - f(zz - h, pp)) / (2.0 * h)

    for _ in range(max_iter):
        f0 = f(z, p)
        f1 = fz_at(z, p)
        hz = max(3e-6, 3e-6 * abs(z))
        hp = max(3e-6, 3e-6 * abs(p))
        # Jacobian of (f, f_z) with respect to (z, p)
        d_f_dz = f1
        d_f_dp = (f(z, p + hp) - f(z, p - hp)) / (2.0 * hp)
        d_fz_dz = (f(z + hz, p) - 2.0 * f0 + f(z - hz, p)) / (hz * hz)
        d_fz_dp = (fz_at(z, p + hp) - fz_at(z, p - hp)) / (2.0 * hp)
        try:
            dz, dp = _solve2(d_f_dz, d_f_dp, d_fz_dz, d_fz_dp, f0, f1)
        except SingularJacobian:
            raise
        z -= dz
        p -= dp
        if abs(dz) <= 1e-13 * max(1.0, abs(z)) and abs(dp) <= 1e-13 * max(1.0, abs(p)):
            break

    p_real = p.real
    f0 = f(z, p_real)
    f1 = fz_at(z, complex(p_real))
    # scale residuals against the function size one step away from the root
    probe = abs(f(z + 0.1 * max(1.0, abs(z)), p_real))
    scale = max(probe, 1e-30)
    res_f = abs(f0) / scale
    res_df = abs(f1) / scale * max(1.0, abs(z)) * 0.1
    if res_f > tol or not math.isfinite(res_f):
        raise NoConvergence(
            f"double-root refinement stalled at z={z!r}, p={p_real!r} "
            f"(scaled residuals {res_f:.2e}, {res_df:.2e})"
        )
    return ExceptionalPoint(
        parameter=p_real, eigenvalue=z, residual_f=res_f, residual_df=res_df
    )


def find_coalescence(
    f: Callable[[complex, complex, complex], complex],
    guess_z: complex,
    guess_p: float,
    guess_q: float,
    tol: float = 1e-9,
    max_iter: int = 60,
) -> ExceptionalPoint:
    """Locate the coalescence of two exceptional points over two parameters.

    Solves f = f_z = f_zz = 0 for (z, p, q) by 3x3 complex Newton with
    finite-difference derivatives; at such a cusp the characteristic function
    has a triple root in z.  Both parameters are folded to their real parts.
    """
    z, p, q = complex(guess_z), complex(guess_p), complex(guess_q)

    def vec(zz, pp, qq):
        h1 = max(1e-6, 1e-6 * abs(zz))
        h2 = max(2e-4, 2e-4 * abs(zz))
        f0 = f(zz, pp, qq)
        fp1 = f(zz + h1, pp, qq)
        fm1 = f(zz - h1, pp, qq)
        fp2 = f(zz + h2, pp, qq)
        fm2 = f(zz - h2, pp, qq)
        fz = (fp1 - fm1) / (2.0 * h1)
        fzz = (fp2 - 2.0 * f0 + fm2) / (h2 * h2)
        return (f0, fz, fzz)

    for _ in range(max_iter):
        F = vec(z, p, q)
        hz = max(1e-5, 1e-5 * abs(z))
        hp = max(1e-5, 1e-5 * abs(p))
        hq = max(1e-5, 1e-5 * abs(q))
        cols = []
        for (dz_, dp_, dq_, h) in (
            (1.0, 0.0, 0.0, hz),
            (0.0, 1.0, 0.0, hp),
            (0.0, 0.0, 1.0, hq),
        ):
            Fp = vec(z + dz_ * h, p + dp_ * h, q + dq_ * h)
            Fm = vec(z - dz_ * h, p - dp_ * h, q - dq_ * h)
            cols.append(tuple((a - b) / (2.0 * h) for a, b in zip(Fp, Fm)))
        # solve J * d = F by Gaussian elimination on the 3x3 complex system
        J = [[cols[0][i], cols[1][i], cols[2][i], F[i]] for i in range(3)]
        for col in range(3):
            piv = max(range(col, 3), key=lambda r: abs(J[r][col]))
            if abs(J[piv][col]) < 1e-300:
                raise SingularJacobian("3x3 Newton Jacobian is singular")
            J[col], J[piv] = J[piv], J[col]
            for r in range(col + 1, 3):
                fac = J[r][col] / J[col][col]
                for c in range(col, 4):
                    J[r][c] -= fac * J[col][c]
        d = [0j, 0j, 0j]
        for r in (2, 1, 0):
            acc = J[r][3]
            for c in range(r + 1, 3):
                acc -= J[r][c] * d[c]
            d[r] = acc / J[r][r]
        z -= d[0]
        p -= d[1]
        q -= d[2]
        if (
            abs(d[0]) <= 1e-11 * max(1.0, abs(z))
            and abs(d[1]) <= 1e-11 * max(1.0, abs(p))
            and abs(d[2]) <= 1e-11 * max(1.0, abs(q))
        ):
            break

    p_r, q_r = p.real, q.real
    F = vec(z, complex(p_r), complex(q_r))
    probe = abs(f(z + 0.1 * max(1.0, abs(z)), p_r, q_r))
    scale = max(probe, 1e-30)
    res_f = abs(F[0]) / scale
    res_df = abs(F[1]) / scale * max(1.0, abs(z)) * 0.1
    if res_f > tol or not math.isfinite(res_f):
        raise NoConvergence(
            f"coalescence refinement stalled at z={z!r}, p={p_r!r}, q={q_r!r}"
        )
    return ExceptionalPoint(
        parameter=p_r,
        eigenvalue=z,
        residual_f=res_f,
        residual_df=res_df,
        parameter2=q_r,
    )


def count_roots_in_contour(
    f: Callable[[complex], complex],
    rectangle: tuple[complex, complex],
    samples_per_edge: int = 64,
) -> int:
    """Number of zeros of ``f`` inside a rectangle, by the argument principle.

    ``rectangle`` holds two opposite corners.  The winding number of f around
    the counterclockwise boundary is accumulated from phase increments;
    segments whose increment exceeds pi/2 are bisected adaptively, and
    :class:`InsufficientSampling` is raised (rather than aliasing) if a
    segment cannot be resolved.  :class:`RootOnContour` is raised when |f|
    vanishes on the boundary.
    """
    c1, c2 = rectangle
    x0, x1 = sorted((c1.real, c2.real))
    y0, y1 = sorted((c1.imag, c2.imag))
    if x0 == x1 or y0 == y1:
        raise ValueError("rectangle is degenerate")
    corners = [
        complex(x0, y0),
        complex(x1, y0),
        complex(x1, y1),
        complex(x0, y1),
        complex(x0, y0),
    ]

    cache: dict[complex, complex] = {}

    def fval(z: complex) -> complex:
        v = cache.get(z)
        if v is None:
            v = f(z)
            cache[z] = v
        if v == 0.0 or abs(v) < 1e-300:
            raise RootOnContour(f"|f| vanishes at z={z!r} on the contour")
        return v

    total = 0.0
    max_depth = 14
    for a, b in zip(corners[:-1], corners[1:]):
        pts = [a + (b - a) * k / samples_per_edge for k in range(samples_per_edge + 1)]
        stack = list(zip(pts[:-1], pts[1:]))[::-1]
        while stack:
            za, zb = stack.pop()
            dphi = cmath.phase(fval(zb) / fval(za))
            if abs(dphi) > 0.5 * math.pi:
                depth = round(math.log2(abs(b - a) / max(abs(zb - za), 1e-300)))
                if depth >= max_depth:
                    raise InsufficientSampling(
                        f"phase increment {dphi:.3f} rad on segment "
                        f"({za!r}, {zb!r}) not resolvable"
                    )
                zm = 0.5 * (za + zb)
                stack.append((zm, zb))
                stack.append((za, zm))
            else:
                total += dphi
    n = total / (2.0 * math.pi)
    n_int = round(n)
    if abs(n - n_int) > 1e-6:
        raise InsufficientSampling(
            f"winding number {n!r} did not round cleanly to an integer"
        )
    return int(n_int)
