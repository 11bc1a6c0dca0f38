"""Spherically symmetric mean-field dynamo eigenvalue problem.

The kinematic spherical dynamo couples the poloidal and toroidal field
amplitudes of one angular mode l through a radial helicity profile
alpha(r) on [0, 1].  In the variables f_i = r * phi_i the eigenvalue system
reads

    f1'' = [l(l+1)/r^2 + lam] f1 - alpha f2,
    f2'' = [l(l+1)/r^2 + lam] f2 + alpha' f1' + lam alpha f1 - alpha^2 f2,

where the second line expands (alpha f1')' with f1'' substituted from the
first, so no numerical differentiation of alpha is ever needed.  Both
regular Frobenius solutions ~ r^{l+1} are shot from a small seed radius to
r = 1; the 2x2 determinant of their boundary residuals vanishes exactly on
the spectrum.  Boundary kinds:

* idealized:  f1(1) = 0,              f2(1) = 0
* realistic:  f1'(1) + l f1(1) = 0,   f2(1) = 0

With a constant profile the problem is exactly solvable: on the n-th
spherical Bessel mode (j_l(k_n) = 0, idealized walls) the eigenvalues are
lam = -k_n^2 +- alpha0 * k_n, which serves as the analytic oracle for the
shooting path.  Real eigenvalue pairs of non-constant profiles collide and
turn into complex-conjugate (oscillatory) pairs as the profile scale C
grows; the associated spectral phase transitions are tracked in C-sweeps.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import spherical_jn

from . import _fastshoot
from .branches import TrackResult, is_real_eigenvalue, track_branches
from .errors import (
    GridMismatch,
    IncompleteSpectrum,
    NonFiniteState,
    RadiusAtZero,
    StepSizeUnderflow,
)
from .integrate import IvpProblem, integrate_ivp, integrate_ivp_samples
from .roots import spectral_sort_key
from .settings import DEFAULT_SETTINGS, SolverSettings

__all__ = [
    "AlphaProfile",
    "BoundaryKind",
    "DynamoParams",
    "DynamoState",
    "KreinJProduct",
    "REFERENCE_PROFILE_COEFFS",
    "reference_profile",
    "load_profile",
    "alpha_eval",
    "dynamo_rhs",
    "regular_solutions_seed",
    "dynamo_determinant",
    "dynamo_spectrum",
    "c_sweep",
    "constant_alpha_oracle",
    "spherical_bessel_zeros",
    "dynamo_eigenfunction",
    "krein_inner_product_J",
    "transform_to_diagonal_metric",
    "dynamo_krein_diagnostic",
]

_SEED_RADIUS = 1e-4

# quartic helicity profile fitted to field-reversal simulations; ships as a
# bundled example and under the CLI token "fig1"
REFERENCE_PROFILE_COEFFS = (1.0, 0.0, -26.09, 53.64, -28.22)


class BoundaryKind(str, Enum):
    IDEALIZED = "idealized"
    REALISTIC = "realistic"


@dataclass(frozen=True)
class AlphaProfile:
    """Radial helicity profile C * p(r) with polynomial p, lowest degree first."""

    coefficients: tuple[float, ...]
    scale: float = 1.0

    def __post_init__(self) -> None:
        if not self.coefficients:
            raise ValueError("profile needs at least one coefficient")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    def __call__(self, r: float) -> float:
        return alpha_eval(r, self)[0]


def reference_profile(scale: float = 1.0) -> AlphaProfile:
    return AlphaProfile(coefficients=REFERENCE_PROFILE_COEFFS, scale=scale)


def load_profile(path: str, scale: float = 1.0) -> AlphaProfile:
    """Profile from a plain-text file, one coefficient per line, lowest first."""
    with open(path, "r", encoding="utf-8") as fh:
        coeffs = [float(line) for line in fh if line.strip()]
    return AlphaProfile(coefficients=tuple(coeffs), scale=scale)


@dataclass(frozen=True)
class DynamoParams:
    l: int
    profile: AlphaProfile
    bc: BoundaryKind = BoundaryKind.IDEALIZED

    def __post_init__(self) -> None:
        if self.l < 1:
            raise ValueError("angular mode number l must be >= 1; no monopole dynamos")


class DynamoState(NamedTuple):
    f1: complex
    df1: complex
    f2: complex
    df2: complex


@dataclass
class KreinJProduct:
    """Indefinite off-diagonal-metric product of a two-component field.

    ``value`` integrates (conj(phi1) phi2 + conj(phi2) phi1) r^2 dr; the
    ``neutrality_ratio`` against the ordinary norm vanishes on neutral
    states.  ``warning`` is set under realistic boundary conditions, where
    no self-adjoint structure backs the diagnostic.
    """

    value: complex
    norm: float
    neutrality_ratio: float
    warning: Optional[str] = None


def alpha_eval(r: float, profile: AlphaProfile) -> tuple[float, float]:
    """Profile value and its analytic derivative at radius r."""
    if not 0.0 <= r <= 1.0:
        raise ValueError("radius outside [0, 1]")
    c = profile.coefficients
    a = c[-1]
    ap = c[-1] * (len(c) - 1)
    for i in range(len(c) - 2, -1, -1):
        a = a * r + c[i]
        if i >= 1:
            ap = ap * r + c[i] * i
    if len(c) == 1:
        ap = 0.0
    return profile.scale * a, profile.scale * ap


def dynamo_rhs(
    r: float, state: DynamoState, lam: complex, params: DynamoParams
) -> DynamoState:
    """First-order form of the coupled system; r = 0 is excluded."""
    if r == 0.0:
        raise RadiusAtZero("evaluate seeds with regular_solutions_seed instead")
    a, ap = alpha_eval(r, params.profile)
    L = params.l * (params.l + 1) / (r * r) + lam
    f1, d1, f2, d2 = state
    return DynamoState(
        f1=d1,
        df1=L * f1 - a * f2,
        f2=d2,
        df2=L * f2 + ap * d1 + lam * a * f1 - a * a * f2,
    )


def regular_solutions_seed(r0: float, l: int) -> tuple[DynamoState, DynamoState]:
    """Two independent states with the regular r^{l+1} leading behavior.

    The singular r^{-l} branch is discarded; the next-order corrections are
    O(r0^2) relative and provably negligible at the default seed radius.
    """
    if not 0.0 < r0 <= 1e-3:
        raise ValueError("seed radius must lie in (0, 1e-3]")
    amp = r0 ** (l + 1)
    damp = (l + 1) * r0**l
    return (
        DynamoState(f1=complex(amp), df1=complex(damp), f2=0.0j, df2=0.0j),
        DynamoState(f1=0.0j, df1=0.0j, f2=complex(amp), df2=complex(damp)),
    )


def _boundary_states(
    lam: complex,
    params: DynamoParams,
    settings: SolverSettings,
    r0: float,
    scale: complex = 1.0,
) -> tuple[DynamoState, DynamoState]:
    seeds = regular_solutions_seed(r0, params.l)
    coeffs = np.array(
        [scale * params.profile.scale * c for c in params.profile.coefficients],
        dtype=complex,
    )
    llp1 = float(params.l * (params.l + 1))
    out = []
    for seed in seeds:
        if _fastshoot.AVAILABLE and _USE_FAST:
            status, f1, d1, f2, d2 = _fastshoot.shoot_dynamo(
                complex(lam),
                coeffs,
                llp1,
                r0,
                seed.f1,
                seed.df1,
                seed.f2,
                seed.df2,
                settings.rel_tol,
                settings.abs_tol,
            )
            if status == 1:
                raise StepSizeUnderflow("dynamo shooting step underflow")
            if status == 2:
                raise NonFiniteState("dynamo shooting state overflowed")
            out.append(DynamoState(f1, d1, f2, d2))
        else:
            cs = coeffs

            def rhs(r: float, y: tuple[complex, ...]) -> tuple[complex, ...]:
                a = cs[-1]
                ap = cs[-1] * (len(cs) - 1)
                for i in range(len(cs) - 2, -1, -1):
                    a = a * r + cs[i]
                    if i >= 1:
                        ap = ap * r + cs[i] * i
                if len(cs) == 1:
                    ap = 0.0
                L = llp1 / (r * r) + lam
                f1, d1, f2, d2 = y
                return (d1, L * f1 - a * f2, d2, L * f2 + ap * d1 + lam * a * f1 - a * a * f2)

            res = integrate_ivp(
                IvpProblem(
                    rhs=rhs,
                    span=(r0, 1.0),
                    initial_state=tuple(seed),
                    rel_tol=settings.rel_tol,
                    abs_tol=settings.abs_tol,
                )
            )
            out.append(DynamoState(*res.state))
    return out[0], out[1]


def _residual_rows(state: DynamoState, l: int, bc: BoundaryKind) -> tuple[complex, complex]:
    if bc is BoundaryKind.IDEALIZED:
        return state.f1, state.f2
    # realistic: d/dr phi1 + (l+1) phi1 / r = 0 maps to f1' + l f1 = 0
    return state.df1 + l * state.f1, state.f2


def dynamo_determinant(
    lam: complex,
    params: DynamoParams,
    settings: SolverSettings = DEFAULT_SETTINGS,
    r0: float = _SEED_RADIUS,
    scale: complex = 1.0,
) -> complex:
    """2x2 boundary-residual determinant of the two regular solutions.

    Analytic in lam; vanishes exactly on the spectrum for the given
    boundary kind.  ``scale`` multiplies the profile (used by sweeps).
    """
    sa, sb = _boundary_states(lam, params, settings, r0, scale)
    a1, a2 = _residual_rows(sa, params.l, params.bc)
    b1, b2 = _residual_rows(sb, params.l, params.bc)
    return a1 * b2 - b1 * a2


# tests flip this to exercise the generic integrator against the compiled path
_USE_FAST = True


def spherical_bessel_zeros(l: int, n: int) -> list[float]:
    """First n positive zeros of the spherical Bessel function j_l.

    Zeros of j_0 are k*pi exactly; the zeros of successive orders
    interlace, which brackets every root for brentq.
    """
    if l < 0 or n < 1:
        raise ValueError("need l >= 0 and n >= 1")
    count = n + l + 1
    points = [math.pi * k for k in range(1, count + 1)]
    for order in range(1, l + 1):
        nxt = []
        for lo, hi in zip(points[:-1], points[1:]):
            nxt.append(brentq(lambda x: spherical_jn(order, x), lo, hi, xtol=1e-13))
        points = nxt
    return points[:n]


def constant_alpha_oracle(alpha0: float, l: int, n: int) -> tuple[complex, complex]:
    """Closed-form eigenvalue pair of the constant-profile dynamo.

    With constant alpha the coupling block is proportional to the diagonal
    one, so on the n-th spherical Bessel mode (idealized walls) the 2x2
    reduction [[-k^2, alpha], [alpha k^2, -k^2]] gives
    lam = -k_n^2 +- alpha0 k_n.
    """
    k = spherical_bessel_zeros(l, n)[-1]
    return complex(-k * k + alpha0 * k), complex(-k * k - alpha0 * k)


def _c_zero_levels(params: DynamoParams, n_levels: int) -> list[complex]:
    """Spectrum at zero profile scale, ordered by descending real part.

    Idealized walls give each -k_{l,n}^2 twice (the components decouple
    into identical blocks); realistic walls split into the j_{l-1} and j_l
    zero families.
    """
    if params.bc is BoundaryKind.IDEALIZED:
        ks = spherical_bessel_zeros(params.l, (n_levels + 3) // 2)
        vals = []
        for k in ks:
            vals.extend([complex(-k * k), complex(-k * k)])
    else:
        n_half = n_levels // 2 + 2
        ks1 = spherical_bessel_zeros(params.l - 1, n_half) if params.l >= 1 else []
        ks2 = spherical_bessel_zeros(params.l, n_half)
        vals = [complex(-k * k) for k in ks1] + [complex(-k * k) for k in ks2]
        vals.sort(key=lambda z: -z.real)
    return vals[:n_levels]


def _growth_sort_key(z: complex):
    k = spectral_sort_key(z)
    return (-k[1], k[0], z.imag)


def continued_dynamo_levels(
    params: DynamoParams,
    n_levels: int,
    settings: SolverSettings = DEFAULT_SETTINGS,
    r0: float = _SEED_RADIUS,
) -> TrackResult:
    """Continue the ``n_levels`` top decoupled modes to the full profile scale."""
    seeds = _c_zero_levels(params, n_levels)
    n_steps = max(24, min(200, int(12 + 2.5 * abs(params.profile.scale))))
    grid = [i / n_steps for i in range(n_steps + 1)]

    def family(lam: complex, t: float) -> complex:
        return dynamo_determinant(lam, params, settings, r0, scale=t)

    return track_branches(
        family,
        grid,
        seeds,
        parameter_name="profile_fraction",
        reality_tol=settings.reality_tol,
        pos_tol=settings.newton_pos_tol,
    )


def dynamo_spectrum(
    params: DynamoParams,
    count: int,
    settings: SolverSettings = DEFAULT_SETTINGS,
    certify: bool = True,
    r0: float = _SEED_RADIUS,
) -> list[complex]:
    """The ``count`` eigenvalues of largest real part (growth ordering).

    Seeded from the zero-profile values and continued in the profile scale;
    completeness is certified by an argument-principle count over an
    enclosing rectangle unless disabled.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    track = continued_dynamo_levels(params, count + 4, settings, r0)
    finals = [br.last() for br in track.branches if br.reached(1.0)]
    if len(finals) < count + 4:
        raise IncompleteSpectrum(
            f"only {len(finals)} of {count + 4} branches survived continuation: "
            + "; ".join(track.diagnostics[:3])
        )
    finals.sort(key=_growth_sort_key)
    kept, rest = finals[:count], finals[count:]
    if certify:
        res = [v.real for v in kept]
        ims = [v.imag for v in kept]
        spread = max(res) - min(res)
        margin = max(1.0, 0.05 * spread)
        left = min(res) - margin
        smaller = [v.real for v in rest if v.real < min(res) - 1e-9]
        if smaller:
            left = 0.5 * (min(res) + max(smaller))
        lo = complex(left, -(max(abs(v) for v in ims) + margin))
        hi = complex(max(res) + margin, max(abs(v) for v in ims) + margin)
        from .roots import count_roots_in_contour

        found = count_roots_in_contour(
            lambda lam: dynamo_determinant(lam, params, settings, r0),
            (lo, hi),
            settings.contour_samples,
        )
        inside = [
            v for v in kept if lo.real < v.real < hi.real and lo.imag < v.imag < hi.imag
        ]
        if found != len(inside):
            raise IncompleteSpectrum(
                f"contour ({lo!r}, {hi!r}) holds {found} roots, located {len(inside)}"
            )
    return kept


def c_sweep(
    params: DynamoParams,
    c_grid: Sequence[float],
    n_levels: int,
    settings: SolverSettings = DEFAULT_SETTINGS,
    r0: float = _SEED_RADIUS,
) -> TrackResult:
    """Track the ``n_levels`` leading branches over a profile-scale grid.

    Real-to-complex transition points are refined and reported as
    exceptional points of the sweep.
    """
    grid = [float(c) for c in c_grid]
    if len(grid) < 1:
        raise ValueError("scale grid must be nonempty")
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise ValueError("scale grid must be strictly increasing")
    base = AlphaProfile(coefficients=params.profile.coefficients, scale=1.0)
    base_params = DynamoParams(l=params.l, profile=base, bc=params.bc)

    if grid[0] == 0.0:
        seeds = _c_zero_levels(params, n_levels)
    else:
        first = DynamoParams(
            l=params.l,
            profile=AlphaProfile(params.profile.coefficients, scale=grid[0]),
            bc=params.bc,
        )
        track0 = continued_dynamo_levels(first, n_levels, settings, r0)
        seeds = [br.last() for br in track0.branches if br.reached(1.0)]

    def family(lam: complex, c: float) -> complex:
        return dynamo_determinant(lam, base_params, settings, r0, scale=c)

    return track_branches(
        family,
        grid,
        seeds,
        parameter_name="C",
        reality_tol=settings.reality_tol,
        pos_tol=settings.newton_pos_tol,
    )


def dynamo_eigenfunction(
    params: DynamoParams,
    lam: complex,
    n_samples: int = 320,
    settings: SolverSettings = DEFAULT_SETTINGS,
    r0: float = _SEED_RADIUS,
) -> tuple[list[float], list[tuple[complex, complex]]]:
    """Two-component eigenfunction phi = f / r sampled on a radial grid.

    The null vector of the 2x2 boundary-residual matrix combines the two
    regular solutions; the result is normalized to unit maximum modulus.
    """
    seeds = regular_solutions_seed(r0, params.l)
    rs = [r0 + (1.0 - r0) * i / (n_samples - 1) for i in range(n_samples)]
    runs = []
    for seed in seeds:

        def rhs(r: float, y: tuple[complex, ...]) -> tuple[complex, ...]:
            st = dynamo_rhs(r, DynamoState(*y), lam, params)
            return tuple(st)

        states = integrate_ivp_samples(
            IvpProblem(
                rhs=rhs,
                span=(r0, 1.0),
                initial_state=tuple(seed),
                rel_tol=settings.rel_tol,
                abs_tol=settings.abs_tol,
            ),
            rs,
        )
        runs.append(states)
    ra = _residual_rows(DynamoState(*runs[0][-1]), params.l, params.bc)
    rb = _residual_rows(DynamoState(*runs[1][-1]), params.l, params.bc)
    # null vector of [[ra1, rb1], [ra2, rb2]] from its larger row
    if abs(ra[0]) + abs(rb[0]) >= abs(ra[1]) + abs(rb[1]):
        cA, cB = -rb[0], ra[0]
    else:
        cA, cB = -rb[1], ra[1]
    phi = []
    peak = 0.0
    for r, sa, sb in zip(rs, runs[0], runs[1]):
        f1 = cA * sa[0] + cB * sb[0]
        f2 = cA * sa[2] + cB * sb[2]
        p = (f1 / r, f2 / r)
        peak = max(peak, abs(p[0]), abs(p[1]))
        phi.append(p)
    phi = [(p1 / peak, p2 / peak) for p1, p2 in phi]
    return rs, phi


def krein_inner_product_J(
    phi_samples: Sequence[tuple[complex, complex]],
    grid: Sequence[float],
    warn_realistic: bool = False,
) -> KreinJProduct:
    """Trapezoidal off-diagonal-metric product over the radial grid."""
    if len(phi_samples) != len(grid) or len(grid) < 2:
        raise GridMismatch("samples and grid must share a common length >= 2")
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise GridMismatch("radial grid must be strictly increasing")
    acc = 0.0j
    nrm = 0.0
    for i in range(len(grid) - 1):
        h = grid[i + 1] - grid[i]
        vals = []
        for j in (i, i + 1):
            p1, p2 = phi_samples[j]
            r2 = grid[j] * grid[j]
            vals.append(
                (
                    (p1.conjugate() * p2 + p2.conjugate() * p1) * r2,
                    (abs(p1) ** 2 + abs(p2) ** 2) * r2,
                )
            )
        acc += 0.5 * h * (vals[0][0] + vals[1][0])
        nrm += 0.5 * h * (vals[0][1] + vals[1][1])
    warning = (
        "no Krein self-adjoint structure under realistic boundary conditions; "
        "neutrality is a heuristic diagnostic"
        if warn_realistic
        else None
    )
    return KreinJProduct(
        value=acc,
        norm=nrm,
        neutrality_ratio=abs(acc) / nrm if nrm > 0 else math.inf,
        warning=warning,
    )


def transform_to_diagonal_metric(
    phi: Sequence[tuple[complex, complex]]
) -> list[tuple[complex, complex]]:
    """Rotate two-component samples into the diagonal-metric components.

    Returns ((phi2 + phi1)/sqrt(2), (phi2 - phi1)/sqrt(2)) per sample; in
    these components the off-diagonal-metric product becomes
    ||phi_+||^2 - ||phi_-||^2.
    """
    inv = 1.0 / math.sqrt(2.0)
    return [((p2 + p1) * inv, (p2 - p1) * inv) for p1, p2 in phi]


def dynamo_krein_diagnostic(
    params: DynamoParams,
    lam: complex,
    n_samples: int = 320,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> KreinJProduct:
    """Neutrality diagnostic of the eigenfunction at ``lam``."""
    rs, phi = dynamo_eigenfunction(params, lam, n_samples, settings)
    return krein_inner_product_J(
        phi, rs, warn_realistic=params.bc is BoundaryKind.REALISTIC
    )
