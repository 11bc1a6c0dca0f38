"""PT-symmetric interpolation Hamiltonian in a box.

The operator -d^2/dy^2 + G y^2 (iy)^nu on [-1, 1] with Dirichlet walls
interpolates between an empty box (coupling off), a free particle with a
constant complex offset (nu = -2) and a harmonic oscillator in a box
(nu = 0), with an imaginary linear potential at nu = -1.  The rescaled
coupling and spectral variable are

    G = g * b**(4 + nu),        mu = b**2 * E,

where 2*b is the physical box width.  Eigenvalues are located by shooting:
D(mu) = psi(1) for the solution with psi(-1) = 0, psi'(-1) = 1 vanishes
exactly on the spectrum.  The branch of (iy)**nu is the principal logarithm
with iy on the imaginary axis,

    V(y) = G |y|**(2 + nu) * exp(i * sign(y) * nu * pi / 2),

the unique choice that keeps V continuous on [-1, 1] away from 0 and
PT-symmetric, V(-y) = conj(V(y)).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import _fastshoot
from .branches import (
    REALITY_TOL,
    SegmentLabel,
    TrackResult,
    is_real_eigenvalue,
    track_branches,
)
from .errors import (
    AsymmetricGrid,
    IncompleteSpectrum,
    InsufficientDepth,
    NoConvergence,
    NonFiniteState,
    StepSizeUnderflow,
)
from .integrate import IvpProblem, integrate_ivp, integrate_ivp_samples

# tests flip this to exercise the generic integrator against the compiled path
_USE_FAST = True
from .roots import (
    ExceptionalPoint,
    count_roots_in_contour,
    find_coalescence,
    find_double_root,
    refine_eigenvalue,
    spectral_sort_key,
)
from .settings import DEFAULT_SETTINGS, SolverSettings

__all__ = [
    "InterpParams",
    "Eigenfunction",
    "KreinParityProduct",
    "potential",
    "shooting_determinant",
    "eigenvalues",
    "continued_levels",
    "nu_sweep",
    "supremum_bound_ks",
    "critical_level_kc",
    "krein_inner_product_P",
    "eigenfunction",
    "empty_box_mu",
    "coalescence_point",
    "herbst_line_crossing",
]


@dataclass(frozen=True)
class InterpParams:
    """Exponent nu in [-2, 0], half-width b > 0 and coupling g."""

    nu: float
    b: float
    g: float = 1.0

    def __post_init__(self) -> None:
        if not -2.0 <= self.nu <= 0.0:
            raise ValueError(f"nu = {self.nu} outside the validated interval [-2, 0]")
        if self.b <= 0.0:
            raise ValueError("half-width b must be positive")

    @property
    def coupling(self) -> float:
        """Rescaled coupling G = g * b**(4 + nu)."""
        return self.g * self.b ** (4.0 + self.nu)

    def mu_of_E(self, E: complex) -> complex:
        return self.b * self.b * E

    def E_of_mu(self, mu: complex) -> complex:
        return mu / (self.b * self.b)


@dataclass
class Eigenfunction:
    """A shooting eigenfunction sampled on a symmetric grid over [-1, 1]."""

    samples: list[tuple[float, complex]]
    eigenvalue: complex


@dataclass
class KreinParityProduct:
    """Parity inner product of a wave function with itself.

    ``value`` is the integral of conj(psi(y)) * psi(-y); ``norm`` the usual
    squared norm; ``neutrality_ratio`` their quotient, which drops to zero on
    neutral (isotropic) states.
    """

    value: complex
    norm: float
    neutrality_ratio: float


def empty_box_mu(k: int) -> float:
    """Spectrum of the empty box, mu_k = k**2 pi**2 / 4."""
    return (k * math.pi / 2.0) ** 2


def _potential_factory(nu: complex, b: complex, g: complex) -> Callable[[float], complex]:
    """V(y) with parameters allowed to be complex (analytic continuation
    used only by the exceptional-point refiners)."""
    G = g * cmath.exp((4.0 + nu) * cmath.log(b))
    phase_pos = cmath.exp(1j * nu * math.pi / 2.0)
    phase_neg = cmath.exp(-1j * nu * math.pi / 2.0)
    ex = 2.0 + nu
    at_zero = 0.0j if ex.real > 1e-12 else -G

    def V(y: float) -> complex:
        if y == 0.0:
            return at_zero
        if y > 0.0:
            return G * cmath.exp(ex * math.log(y)) * phase_pos
        return G * cmath.exp(ex * math.log(-y)) * phase_neg

    return V


def potential(y: float, params: InterpParams) -> complex:
    """Principal-branch evaluation of G y^2 (iy)^nu at real y in [-1, 1]."""
    if not -1.0 <= y <= 1.0:
        raise ValueError("y outside the box [-1, 1]")
    return _potential_factory(params.nu, params.b, params.g)(y)


def _determinant_raw(
    mu: complex,
    nu: complex,
    b: complex,
    g: complex,
    settings: SolverSettings,
    scale: float = 1.0,
) -> complex:
    if _fastshoot.AVAILABLE and _USE_FAST:
        G = scale * g * cmath.exp((4.0 + nu) * cmath.log(b))
        ex = complex(2.0 + nu)
        at_zero = 0.0j if ex.real > 1e-12 else -G
        status, psi1 = _fastshoot.shoot_box(
            complex(mu),
            complex(G),
            ex,
            cmath.exp(1j * nu * math.pi / 2.0),
            cmath.exp(-1j * nu * math.pi / 2.0),
            at_zero,
            settings.rel_tol,
            settings.abs_tol,
        )
        if status == 1:
            raise StepSizeUnderflow("shooting step underflow inside the box")
        if status == 2:
            raise NonFiniteState("shooting state overflowed inside the box")
        return psi1

    V = _potential_factory(nu, b, g)

    def rhs(y: float, state: tuple[complex, ...]) -> tuple[complex, complex]:
        psi, dpsi = state
        return (dpsi, (scale * V(y) - mu) * psi)

    problem = IvpProblem(
        rhs=rhs,
        span=(-1.0, 1.0),
        initial_state=(0.0j, 1.0 + 0.0j),
        rel_tol=settings.rel_tol,
        abs_tol=settings.abs_tol,
    )
    return integrate_ivp(problem).state[0]


def shooting_determinant(
    mu: complex,
    params: InterpParams,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> complex:
    """Boundary residual psi(1) of the left-to-right shooting solution.

    Analytic in mu; vanishes exactly on the spectrum of the boxed operator.
    """
    return _determinant_raw(complex(mu), params.nu, params.b, params.g, settings)


def _continuation_steps(coupling: float) -> int:
    return max(32, min(360, int(16 + 0.12 * abs(coupling))))


def continued_levels(
    params: InterpParams,
    n_levels: int,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> TrackResult:
    """Continue the lowest ``n_levels`` empty-box modes to full coupling.

    The coupling is ramped linearly from 0 to G; branch k of the result is
    the continuation of empty-box level k+1, so level numbering survives all
    real-to-complex transitions en route.
    """
    seeds = [complex(empty_box_mu(k)) for k in range(1, n_levels + 1)]
    n_steps = _continuation_steps(params.coupling)
    grid = [i / n_steps for i in range(n_steps + 1)]

    def family(mu: complex, t: float) -> complex:
        return _determinant_raw(mu, params.nu, params.b, params.g, settings, scale=t)

    return track_branches(
        family,
        grid,
        seeds,
        parameter_name="coupling_fraction",
        reality_tol=settings.reality_tol,
        pos_tol=settings.newton_pos_tol,
    )


def _certify(
    values: Sequence[complex],
    excluded: Sequence[complex],
    det: Callable[[complex], complex],
    settings: SolverSettings,
) -> None:
    res = [v.real for v in values]
    ims = [v.imag for v in values]
    spread = max(res) - min(res)
    margin = max(1.0, 0.05 * spread)
    right = max(res) + margin
    bigger = [v.real for v in excluded if v.real > max(res) + 1e-9]
    if bigger:
        right = 0.5 * (max(res) + min(bigger))
    lo = complex(min(res) - margin, -(max(abs(v) for v in ims) + margin))
    hi = complex(right, max(abs(v) for v in ims) + margin)
    n = count_roots_in_contour(det, (lo, hi), settings.contour_samples)
    inside = [v for v in values if lo.real < v.real < hi.real and lo.imag < v.imag < hi.imag]
    if n != len(inside):
        raise IncompleteSpectrum(
            f"contour ({lo!r}, {hi!r}) holds {n} roots but {len(inside)} were located"
        )


def eigenvalues(
    params: InterpParams,
    count: int,
    settings: SolverSettings = DEFAULT_SETTINGS,
    certify: bool = True,
) -> list[complex]:
    """The ``count`` eigenvalues mu of smallest modulus.

    Seeded from the empty box and continued in the coupling; conjugate pairs
    are both reported.  Completeness is certified by an argument-principle
    count over an enclosing rectangle unless ``certify`` is disabled.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    track = continued_levels(params, count + 2, settings)
    finals = [br.last() for br in track.branches if br.reached(1.0)]
    if len(finals) < count + 2:
        raise IncompleteSpectrum(
            f"only {len(finals)} of {count + 2} branches survived continuation: "
            + "; ".join(track.diagnostics[:3])
        )
    finals.sort(key=spectral_sort_key)
    kept, rest = finals[:count], finals[count:]
    if certify:
        _certify(
            kept,
            rest,
            lambda mu: shooting_determinant(mu, params, settings),
            settings,
        )
    return kept


def supremum_bound_ks(b: float, nu: float, g: float = 1.0) -> float:
    """Supremum-norm bound: no real-to-complex transitions above this level.

    Valid for nu >= -2, where the supremum of |V| over the box is
    |g| * b**(4 + nu).
    """
    if nu < -2.0:
        raise ValueError("bound is stated for nu >= -2 only")
    return 0.5 * ((8.0 / math.pi**2) * abs(g) * b ** (4.0 + nu) - 1.0)


def critical_level_kc(
    params: InterpParams,
    settings: SolverSettings = DEFAULT_SETTINGS,
    max_depth: int = 64,
) -> int:
    """Lowest level number not involved in real-to-complex transitions.

    Computed as 1 + the highest level index whose eigenvalue sits in a
    complex-conjugate pair at the query (nu, b); levels keep their empty-box
    numbering through the coupling continuation.  The spectrum is deepened
    until three consecutive real levels sit above every complex pair.
    """
    depth = 12
    while True:
        track = continued_levels(params, depth, settings)
        complex_levels = []
        real_levels = []
        for k, br in enumerate(track.branches, start=1):
            if not br.reached(1.0):
                raise InsufficientDepth(f"branch {k} lost during continuation")
            if is_real_eigenvalue(br.last(), settings.reality_tol):
                real_levels.append(k)
            else:
                complex_levels.append(k)
        top = max(complex_levels, default=0)
        gap_ok = all(k in real_levels for k in range(top + 1, top + 4)) and depth >= top + 3
        if gap_ok:
            return top + 1
        if depth >= max_depth:
            raise InsufficientDepth(
                f"no gap of three real levels above the complex pairs within "
                f"{max_depth} levels"
            )
        depth = min(max_depth, max(depth + 6, top + 4))


def nu_sweep(
    b: float,
    g: float,
    nu_grid: Sequence[float],
    n_levels: int,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> TrackResult:
    """Track ``n_levels`` branches over an exponent grid at fixed width.

    Seeds come from the coupling continuation at the first grid point;
    exceptional points encountered along the sweep are refined and reported
    in the result.
    """
    grid = [float(v) for v in nu_grid]
    if not grid or not all(-2.0 <= v <= 0.0 for v in grid):
        raise ValueError("nu grid must lie inside [-2, 0]")
    first = InterpParams(nu=grid[0], b=b, g=g)
    seeds_track = continued_levels(first, n_levels, settings)
    seeds = [br.last() for br in seeds_track.branches if br.points]

    def family(mu: complex, nu: float) -> complex:
        return _determinant_raw(mu, nu, b, g, settings)

    return track_branches(
        family,
        grid,
        seeds,
        parameter_name="nu",
        reality_tol=settings.reality_tol,
        pos_tol=settings.newton_pos_tol,
    )


def eigenfunction(
    params: InterpParams,
    mu: complex,
    n_samples: int = 801,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> Eigenfunction:
    """Shooting solution at eigenvalue ``mu`` sampled on a symmetric grid.

    Normalized to unit maximum modulus; at a converged eigenvalue the
    Dirichlet values at both walls vanish at the solver tolerance.
    """
    if n_samples < 3 or n_samples % 2 == 0:
        raise ValueError("n_samples must be odd and >= 3 for a symmetric grid")
    V = _potential_factory(params.nu, params.b, params.g)

    def rhs(y: float, state: tuple[complex, ...]) -> tuple[complex, complex]:
        psi, dpsi = state
        return (dpsi, (V(y) - mu) * psi)

    ys = [-1.0 + 2.0 * i / (n_samples - 1) for i in range(n_samples)]
    problem = IvpProblem(
        rhs=rhs,
        span=(-1.0, 1.0),
        initial_state=(0.0j, 1.0 + 0.0j),
        rel_tol=settings.rel_tol,
        abs_tol=settings.abs_tol,
    )
    states = integrate_ivp_samples(problem, ys)
    psis = [s[0] for s in states]
    scale = max(abs(p) for p in psis)
    psis = [p / scale for p in psis]
    return Eigenfunction(samples=list(zip(ys, psis)), eigenvalue=complex(mu))


def krein_inner_product_P(psi: Eigenfunction) -> KreinParityProduct:
    """Parity product of an eigenfunction with itself, by trapezoid rule.

    Requires a symmetric sample grid; besides the product itself the result
    reports |product| / norm, the neutrality measure that vanishes on
    isotropic states (exceptional-point eigenfunctions).
    """
    ys = [y for y, _ in psi.samples]
    vals = [v for _, v in psi.samples]
    n = len(ys)
    for i in range(n):
        if abs(ys[i] + ys[n - 1 - i]) > 1e-12:
            raise AsymmetricGrid(f"grid not symmetric about 0 near y={ys[i]!r}")
    acc = 0.0j
    nrm = 0.0
    for i in range(n - 1):
        h = ys[i + 1] - ys[i]
        f0 = vals[i].conjugate() * vals[n - 1 - i]
        f1 = vals[i + 1].conjugate() * vals[n - 2 - i]
        acc += 0.5 * h * (f0 + f1)
        nrm += 0.5 * h * (abs(vals[i]) ** 2 + abs(vals[i + 1]) ** 2)
    return KreinParityProduct(
        value=acc, norm=nrm, neutrality_ratio=abs(acc) / nrm if nrm > 0 else math.inf
    )


def coalescence_point(
    nu_guess: float,
    b_guess: float,
    mu_guess: complex,
    g: float = 1.0,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> ExceptionalPoint:
    """Two-parameter localization of a merger of two exceptional points.

    Solves D = dD/dmu = d2D/dmu2 = 0 over (mu, nu, b): the cusp in the
    (nu, b) plane where the real segment between two exceptional points
    disappears.  PT symmetry makes the shooting determinant real on the
    real-mu slice, so the system is solved as a damped real 3x3 Newton
    there.  ``parameter`` carries nu, ``parameter2`` carries b.
    """
    mu = float(complex(mu_guess).real)
    nu = float(nu_guess)
    b = float(b_guess)
    s_mu = max(1.0, abs(mu))
    h1 = 1e-6 * s_mu
    h2 = 3e-4 * s_mu

    def F(mu_: float, nu_: float, b_: float) -> tuple[float, float, float]:
        d0 = _determinant_raw(complex(mu_), nu_, b_, g, settings).real
        dp = _determinant_raw(complex(mu_ + h1), nu_, b_, g, settings).real
        dm = _determinant_raw(complex(mu_ - h1), nu_, b_, g, settings).real
        dp2 = _determinant_raw(complex(mu_ + h2), nu_, b_, g, settings).real
        dm2 = _determinant_raw(complex(mu_ - h2), nu_, b_, g, settings).real
        return (d0, (dp - dm) / (2.0 * h1), (dp2 - 2.0 * d0 + dm2) / (h2 * h2))

    def norm(v: tuple[float, float, float], scale: tuple[float, float, float]) -> float:
        return max(abs(v[k]) / scale[k] for k in range(3))

    import numpy as np

    f0 = F(mu, nu, b)
    scale = tuple(max(abs(v), 1e-6) for v in f0)
    for _ in range(60):
        steps = (1e-5 * s_mu, 2e-6, 2e-5 * max(1.0, b))
        J = np.empty((3, 3))
        for col, (dmu, dnu, db, h) in enumerate(
            (
                (1.0, 0.0, 0.0, steps[0]),
                (0.0, 1.0, 0.0, steps[1]),
                (0.0, 0.0, 1.0, steps[2]),
            )
        ):
            fp = F(mu + dmu * h, nu + dnu * h, b + db * h)
            fm = F(mu - dmu * h, nu - dnu * h, b - db * h)
            for row in range(3):
                J[row, col] = (fp[row] - fm[row]) / (2.0 * h)
        try:
            delta = np.linalg.solve(J, np.array(f0))
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"cusp Jacobian singular near nu={nu}, b={b}") from exc
        # damped step with per-variable caps
        delta[0] = max(-4.0, min(4.0, delta[0]))
        delta[1] = max(-0.02, min(0.02, delta[1]))
        delta[2] = max(-0.25, min(0.25, delta[2]))
        for damp in (1.0, 0.5, 0.25, 0.125):
            trial = (mu - damp * delta[0], nu - damp * delta[1], b - damp * delta[2])
            f_trial = F(*trial)
            if norm(f_trial, scale) <= norm(f0, scale):
                break
        mu, nu, b = trial
        f0 = f_trial
        if (
            abs(damp * delta[0]) <= 2e-7 * s_mu
            and abs(damp * delta[1]) <= 1e-8
            and abs(damp * delta[2]) <= 1e-8
        ):
            break
    probe = abs(_determinant_raw(complex(mu + 0.1 * s_mu), nu, b, g, settings))
    res_f = abs(f0[0]) / max(probe, 1e-30)
    if res_f > 1e-4:
        raise NoConvergence(
            f"cusp refinement stalled at mu={mu}, nu={nu}, b={b} (residual {res_f:.2e})"
        )
    return ExceptionalPoint(
        parameter=nu,
        eigenvalue=complex(mu),
        residual_f=res_f,
        residual_df=abs(f0[1]) / max(probe, 1e-30),
        parameter2=b,
    )


def herbst_line_crossing(
    b_guess: float,
    mu_guess: complex,
    g: float = 1.0,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> ExceptionalPoint:
    """Double root of the nu = -1 shooting determinant over (mu, b).

    Locates the width at which a pair of levels of the imaginary-linear
    potential box coalesces; ``parameter`` carries b.
    """

    def f(mu: complex, b: complex) -> complex:
        return _determinant_raw(mu, -1.0, b, g, settings)

    return find_double_root(f, mu_guess, b_guess)
