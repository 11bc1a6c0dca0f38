"""Imaginary-linear-potential box, its Airy determinant, and the Wick-rotated
plane-Couette vorticity problem.

The operator -d^2/dy^2 - i b^3 y on [-1, 1] with Dirichlet walls (the nu = -1
member of the box interpolation family, with the coupling normalized away by
the rescaling b -> g^{-1/3} b, E -> g^{2/3} E) is exactly solvable: with

    xi(y) = e^{i pi/3} (-i b y - E),        q = e^{2 pi i/3},

the characteristic determinant

    Delta(E) = A1(xi_+) A2(xi_-) - A1(xi_-) A2(xi_+),
    A1(xi) = Ai(xi),  A2(xi) = Ai(q^2 xi),  xi_pm = xi(+-1)

vanishes exactly on the spectrum.  The same equation rescaled and
Wick-rotated, i*eps*d^2/dy^2 + y with eps = b^{-3}, governs the normal
vorticity of plane Couette flow; its eigenvalues lambda = -i E / b hug a
Y-shaped set: two branches from +-1 meeting at -i/sqrt(3) plus a vertical
ray to -i*infinity.  Pairs of real levels of the box problem collide near
E ~ b/sqrt(3) at widths b_n ~ |s_n| sqrt(3)/2 (s_n the Airy zeros) and turn
into complex-conjugate pairs whose imaginary parts grow linearly in b.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .airy import AIRY_Q, airy_ai_pair, airy_zeros
from .errors import IncompleteSpectrum, NoConvergence, SingularJacobian
from .roots import (
    ExceptionalPoint,
    count_roots_in_contour,
    find_double_root,
    spectral_sort_key,
)
from .settings import DEFAULT_SETTINGS, SolverSettings

__all__ = [
    "HerbstParams",
    "SquireParams",
    "YSegment",
    "YClassification",
    "HerbstModes",
    "xi",
    "herbst_determinant",
    "herbst_determinant_dE",
    "herbst_spectrum",
    "herbst_modes",
    "crossing_estimate",
    "crossing_exact",
    "boundary_symmetry_residuals",
    "lowest_real_mode_bound_ka",
    "squire_from_herbst",
    "herbst_from_squire",
    "squire_spectrum",
    "crossing_epsilon",
    "classify_Y",
]

_W = cmath.exp(1j * math.pi / 3.0)
_Q2 = AIRY_Q * AIRY_Q


@dataclass(frozen=True)
class HerbstParams:
    """Half-width of the box; the coupling is normalized to one."""

    b: float

    def __post_init__(self) -> None:
        if self.b <= 0.0:
            raise ValueError("half-width b must be positive")


@dataclass(frozen=True)
class SquireParams:
    """Viscosity parameter; optionally derived from wave number and Reynolds.

    ``epsilon = 1 / (alpha_tilde * reynolds)`` when the physical pair is
    given; supplying all three requires them to be consistent.
    """

    epsilon: float
    alpha_tilde: Optional[float] = None
    reynolds: Optional[float] = None

    def __post_init__(self) -> None:
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if (self.alpha_tilde is None) != (self.reynolds is None):
            raise ValueError("alpha_tilde and reynolds must be given together")
        if self.alpha_tilde is not None:
            if self.alpha_tilde < 1.0 or self.reynolds <= 0.0:
                raise ValueError("need alpha_tilde >= 1 and reynolds > 0")
            if abs(self.epsilon * self.alpha_tilde * self.reynolds - 1.0) > 1e-9:
                raise ValueError("epsilon * alpha_tilde * reynolds must equal 1")

    @classmethod
    def from_flow(cls, alpha_tilde: float, reynolds: float) -> "SquireParams":
        return cls(
            epsilon=1.0 / (alpha_tilde * reynolds),
            alpha_tilde=alpha_tilde,
            reynolds=reynolds,
        )

    @property
    def box_width(self) -> float:
        return self.epsilon ** (-1.0 / 3.0)


class YSegment(str, Enum):
    PLUS_BRANCH = "PlusBranch"
    MINUS_BRANCH = "MinusBranch"
    VERTICAL_RAY = "VerticalRay"


@dataclass(frozen=True)
class YClassification:
    segment: YSegment
    distance: float


@dataclass
class HerbstModes:
    """Indexed spectrum: complex-conjugate pairs and surviving real modes."""

    b: float
    pairs: list[tuple[int, complex, complex]]  # (pair index n, E_n^+, E_n^-)
    reals: list[tuple[int, float]]  # (box level k, E_k)

    def all_values(self) -> list[complex]:
        vals = [complex(e) for _, e in self.reals]
        for _, ep, em in self.pairs:
            vals.extend((ep, em))
        return vals


def xi(y: float, b: float, E: complex) -> complex:
    """Rotated Airy argument e^{i pi/3} (-i b y - E)."""
    return _W * (-1j * b * y - E)


def _scaled_factor(u: complex) -> tuple[complex, complex, complex, complex]:
    """(P, dP, zeta, sqrt(u)) with Ai(u) = P exp(-zeta), P slowly varying."""
    a, da = airy_ai_pair(u)
    su = cmath.sqrt(u)
    zeta = (2.0 / 3.0) * u * su
    ez = cmath.exp(zeta)
    return a * ez, (da + su * a) * ez, zeta, su


# The three-sector identity turns the determinant built on the solution pair
# (Ai(xi), Ai(q^2 xi)) into two exactly equivalent forms built on
# (Ai(xi), Ai(q xi)) and (Ai(q xi), Ai(q^2 xi)):
#
#   Delta = Delta_{0,2} = -q^2 Delta_{0,1} = -q Delta_{1,2}.
#
# Any single pair multiplies two exponentially large Airy values whose
# products cancel almost completely in parts of the (E, b) range (14 digits
# are lost already at |xi| ~ 9), so the evaluator picks, per point, the pair
# whose terms carry the smallest exponentials and maps the result back with
# the exact constant.
_PAIRS = ((0, 2, 1.0 + 0.0j), (0, 1, -AIRY_Q * AIRY_Q), (1, 2, -AIRY_Q))


def _det_and_derivative(E: complex, b: float) -> tuple[complex, complex]:
    xp = xi(1.0, b, E)
    xm = xi(-1.0, b, E)
    rot = (1.0 + 0.0j, AIRY_Q, _Q2)
    fp = [_scaled_factor(rot[k] * xp) for k in range(3)]
    fm = [_scaled_factor(rot[k] * xm) for k in range(3)]

    best = None
    for i, j, const in _PAIRS:
        expo = max(
            -(fp[i][2] + fm[j][2]).real,
            -(fm[i][2] + fp[j][2]).real,
        )
        if best is None or expo < best[0]:
            best = (expo, i, j, const)
    _, i, j, const = best

    p_ip, dp_ip, z_ip, s_ip = fp[i]
    p_im, dp_im, z_im, s_im = fm[i]
    p_jp, dp_jp, z_jp, s_jp = fp[j]
    p_jm, dp_jm, z_jm, s_jm = fm[j]
    # d(q^k xi_pm)/dE = -W q^k
    ri, rj = -_W * rot[i], -_W * rot[j]
    e1 = cmath.exp(-(z_ip + z_jm))
    e2 = cmath.exp(-(z_im + z_jp))
    t1 = p_ip * p_jm * e1
    t2 = p_im * p_jp * e2
    dt1 = e1 * (
        dp_ip * p_jm * ri + p_ip * dp_jm * rj - (s_ip * ri + s_jm * rj) * p_ip * p_jm
    )
    dt2 = e2 * (
        dp_im * p_jp * ri + p_im * dp_jp * rj - (s_im * ri + s_jp * rj) * p_im * p_jp
    )
    return const * (t1 - t2), const * (dt1 - dt2)


def herbst_determinant(E: complex, b: float) -> complex:
    """Characteristic determinant of the imaginary-linear-potential box.

    Values are those of the pair (Ai(xi), Ai(q^2 xi)); real on the real E
    axis, and zero exactly on the spectrum.
    """
    return _det_and_derivative(complex(E), b)[0]


def herbst_determinant_dE(E: complex, b: float) -> complex:
    """Analytic dDelta/dE, used by the level-crossing refinement."""
    return _det_and_derivative(complex(E), b)[1]


def crossing_estimate(n: int) -> tuple[float, float]:
    """Asymptotic location (b_n, E_n) of the n-th pairwise level crossing.

    b_n ~ |s_n| sqrt(3)/2 and E_n ~ |s_n|/2 with s_n the n-th Airy zero.
    """
    if n < 1:
        raise ValueError("crossing index must be >= 1")
    s = abs(airy_zeros(n)[-1])
    return s * math.sqrt(3.0) / 2.0, s / 2.0


def crossing_epsilon(n: int) -> float:
    """Viscosity at which the n-th pair of vorticity eigenvalues merges."""
    if n < 1:
        raise ValueError("crossing index must be >= 1")
    s = abs(airy_zeros(n)[-1])
    return (2.0 / (s * math.sqrt(3.0))) ** 3


def lowest_real_mode_bound_ka(b: float) -> float:
    """Estimate of the lowest box level that stays real at half-width b.

    Scales like b^{3/2}, half the scaling dimension of the supremum-norm
    bound of the interpolation family.
    """
    if b <= 0.0:
        raise ValueError("half-width b must be positive")
    return (4.0 / (3.0 * math.pi)) * (2.0 * b / math.sqrt(3.0)) ** 1.5 + 0.5


def crossing_exact(n: int, tol: float = 1e-10) -> ExceptionalPoint:
    """Exact n-th level crossing: double root of the determinant over (E, b).

    2D Newton on (Delta, dDelta/dE) with the analytic E-derivative, seeded
    from the asymptotic estimate.  The eigenvalue at the crossing is real.
    """
    b0, e0 = crossing_estimate(n)
    E = complex(e0)
    b = complex(b0 * 1.02)  # the estimate sits consistently a bit low
    for _ in range(60):
        F1 = herbst_determinant(E, b.real)
        F2 = herbst_determinant_dE(E, b.real)
        hE = 1e-6 * max(1.0, abs(E))
        hb = 1e-6 * max(1.0, abs(b))
        d11 = F2
        d12 = (herbst_determinant(E, b.real + hb) - herbst_determinant(E, b.real - hb)) / (
            2.0 * hb
        )
        d21 = (herbst_determinant_dE(E + hE, b.real) - herbst_determinant_dE(E - hE, b.real)) / (
            2.0 * hE
        )
        d22 = (
            herbst_determinant_dE(E, b.real + hb) - herbst_determinant_dE(E, b.real - hb)
        ) / (2.0 * hb)
        det = d11 * d22 - d12 * d21
        if abs(det) < 1e-300:
            raise SingularJacobian("degenerate crossing configuration")
        dE = (F1 * d22 - F2 * d12) / det
        db = (d11 * F2 - d21 * F1) / det
        E -= dE
        b -= db
        if abs(dE) <= 1e-13 * max(1.0, abs(E)) and abs(db) <= 1e-13 * max(1.0, abs(b)):
            break
    b_r = b.real
    scale = max(abs(herbst_determinant(E + 0.1, b_r)), 1e-30)
    res_f = abs(herbst_determinant(E, b_r)) / scale
    res_df = abs(herbst_determinant_dE(E, b_r)) / scale * 0.1
    if res_f > tol:
        raise NoConvergence(f"crossing {n} refinement stalled (residual {res_f:.2e})")
    return ExceptionalPoint(
        parameter=b_r, eigenvalue=E, residual_f=res_f, residual_df=res_df
    )


def boundary_symmetry_residuals(E: complex, b: float) -> dict[str, float]:
    """Normalized residuals of A_{1,2}(xi_+) = +-A_{1,2}(xi_-).

    At a level crossing the '+' pair of conditions holds and the '-' pair is
    violated; both residuals are scaled by the function magnitudes.
    """
    xp = xi(1.0, b, E)
    xm = xi(-1.0, b, E)
    a1p = airy_ai_pair(xp)[0]
    a1m = airy_ai_pair(xm)[0]
    a2p = airy_ai_pair(_Q2 * xp)[0]
    a2m = airy_ai_pair(_Q2 * xm)[0]
    s1 = max(abs(a1p), abs(a1m), 1e-300)
    s2 = max(abs(a2p), abs(a2m), 1e-300)
    return {
        "plus": max(abs(a1p - a1m) / s1, abs(a2p - a2m) / s2),
        "minus": max(abs(a1p + a1m) / s1, abs(a2p + a2m) / s2),
    }


_crossing_cache: dict[int, ExceptionalPoint] = {}


def _crossing(n: int) -> ExceptionalPoint:
    ep = _crossing_cache.get(n)
    if ep is None:
        ep = crossing_exact(n)
        _crossing_cache[n] = ep
    return ep


def _newton_root(
    E0: complex, b: float, pos_tol: float, max_iter: int = 40
) -> complex:
    E = complex(E0)
    prev_step = math.inf
    stagnant = 0
    for _ in range(max_iter):
        step = herbst_determinant(E, b) / herbst_determinant_dE(E, b)
        E -= step
        scale = max(1.0, abs(E))
        if abs(step) <= pos_tol * scale:
            return E
        if abs(step) <= 1e-9 * scale and abs(step) >= 0.25 * prev_step:
            stagnant += 1  # hovering at the evaluation noise floor
            if stagnant >= 2:
                return E
        else:
            stagnant = 0
        prev_step = abs(step)
    raise NoConvergence(f"determinant root did not converge from {E0!r}")


def _pair_values(n: int, b: float, pos_tol: float) -> Optional[tuple[complex, complex]]:
    """The n-th conjugate pair at half-width b, or None while it is real."""
    ep = _crossing(n)
    if b <= ep.parameter:
        return None
    if b - ep.parameter <= 0.7:
        # local square-root split of the double root
        E0, b0 = ep.eigenvalue, ep.parameter
        hE = 1e-4 * max(1.0, abs(E0))
        hb = 1e-5 * max(1.0, b0)
        f_EE = (
            herbst_determinant(E0 + hE, b0)
            - 2.0 * herbst_determinant(E0, b0)
            + herbst_determinant(E0 - hE, b0)
        ) / (hE * hE)
        f_b = (herbst_determinant(E0, b0 + hb) - herbst_determinant(E0, b0 - hb)) / (
            2.0 * hb
        )
        dE = cmath.sqrt(-2.0 * f_b * (b - b0) / f_EE)
        if dE.imag < 0:
            dE = -dE
        seed_plus = E0 + dE
    else:
        s = -abs(airy_zeros(n)[-1])
        seed_plus = 1j * b + 1j * s * cmath.exp(1j * math.pi / 6.0)
    E_plus = _newton_root(seed_plus, b, pos_tol)
    if abs(E_plus.imag) <= 1e-10 * max(1.0, abs(E_plus)):
        return None  # refined back onto the real axis: not crossed yet
    if E_plus.imag < 0:
        E_plus = E_plus.conjugate()
    return E_plus, E_plus.conjugate()


def _real_modes_by_scan(
    b: float, k_start: int, k_stop: int, pos_tol: float
) -> list[float]:
    """All real roots with mu = b^2 E in the band of box levels k_start..k_stop.

    The determinant is real on the real axis, so a sign scan uniform in
    sqrt(mu) cannot miss a simple root; each bracket is polished by Newton.
    """
    mu_lo = (max(k_start, 0.5) * math.pi / 2.0) ** 2 * 0.55
    mu_hi = ((k_stop + 0.45) * math.pi / 2.0) ** 2
    n_grid = max(60, 8 * (k_stop + 2))
    roots: list[float] = []
    prev_mu = mu_lo
    prev_val = herbst_determinant(complex(mu_lo / (b * b)), b).real
    for i in range(1, n_grid + 1):
        smu = math.sqrt(mu_lo) + (math.sqrt(mu_hi) - math.sqrt(mu_lo)) * i / n_grid
        mu = smu * smu
        val = herbst_determinant(complex(mu / (b * b)), b).real
        if prev_val == 0.0:
            roots.append(prev_mu / (b * b))
        elif (val < 0.0) != (prev_val < 0.0):
            lo, hi = prev_mu, mu
            flo = prev_val
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                fm = herbst_determinant(complex(mid / (b * b)), b).real
                if (fm < 0.0) == (flo < 0.0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            root_E = _newton_root(complex(0.5 * (lo + hi) / (b * b)), b, pos_tol).real
            roots.append(root_E)
        prev_mu, prev_val = mu, val
    out: list[float] = []
    for r in sorted(roots):
        if not out or abs(r - out[-1]) > 1e-9 * max(1.0, abs(r)):
            out.append(r)
    return out


def herbst_modes(
    b: float,
    count: int,
    settings: SolverSettings = DEFAULT_SETTINGS,
    certify: bool = True,
) -> HerbstModes:
    """Indexed box spectrum: crossed pairs plus enough surviving real modes.

    Pairs are seeded from the spectral-skeleton asymptotics (or the local
    square-root split near a fresh crossing) and real modes are recovered by
    a sign scan along the real axis, where the determinant is real-valued.
    Completeness of the returned window is certified by an
    argument-principle count unless ``certify`` is off.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    pos_tol = settings.newton_pos_tol
    pairs: list[tuple[int, complex, complex]] = []
    n = 1
    while True:
        est_b, _ = crossing_estimate(n)
        if est_b > b + 0.6:
            break
        pv = _pair_values(n, b, pos_tol) if b > _crossing(n).parameter else None
        if pv is not None:
            pairs.append((n, pv[0], pv[1]))
        n += 1
        if n > 4 * count + 8:
            break
    n_crossed = len(pairs)
    k_start = 2 * n_crossed + 1
    k_stop = max(k_start + count, 2 * n_crossed + count)
    real_E = _real_modes_by_scan(b, k_start, k_stop, pos_tol)
    reals = [(k_start + i, e) for i, e in enumerate(real_E)]
    modes = HerbstModes(b=b, pairs=pairs, reals=reals)

    if certify:
        vals = modes.all_values()
        if vals:
            res = [v.real for v in vals]
            ims = [v.imag for v in vals]
            margin_re = 0.35 * math.pi**2 * (k_stop + 0.5) / (b * b)  # half a level gap
            lo = complex(min(res) - 1.0, min(ims) - 1.0)
            hi = complex(max(res) + margin_re, max(ims) + 1.0)
            found = count_roots_in_contour(
                lambda E: herbst_determinant(E, b),
                (lo, hi),
                settings.contour_samples,
            )
            inside = [
                v
                for v in vals
                if lo.real < v.real < hi.real and lo.imag < v.imag < hi.imag
            ]
            if found != len(inside):
                raise IncompleteSpectrum(
                    f"contour ({lo!r}, {hi!r}) holds {found} roots, located "
                    f"{len(inside)}"
                )
    return modes


def herbst_spectrum(
    b: float,
    count: int,
    settings: SolverSettings = DEFAULT_SETTINGS,
    certify: bool = True,
) -> list[complex]:
    """The ``count`` eigenvalues of smallest modulus at half-width b."""
    modes = herbst_modes(b, count, settings, certify)
    vals = modes.all_values()
    vals.sort(key=spectral_sort_key)
    if len(vals) < count:
        raise IncompleteSpectrum(f"located only {len(vals)} of {count} eigenvalues")
    return vals[:count]


def squire_from_herbst(E: complex, b: float) -> tuple[complex, float]:
    """Map a box eigenvalue to the vorticity eigenvalue and viscosity.

    lambda = -i E / b and epsilon = b^{-3}; exact inverse of
    :func:`herbst_from_squire`.
    """
    if b <= 0.0:
        raise ValueError("half-width b must be positive")
    return -1j * E / b, b**-3


def herbst_from_squire(lam: complex, epsilon: float) -> tuple[complex, float]:
    """Inverse map: E = i b lambda with b = epsilon^{-1/3}."""
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    b = epsilon ** (-1.0 / 3.0)
    return 1j * b * lam, b


def squire_spectrum(
    params: SquireParams,
    count: int,
    settings: SolverSettings = DEFAULT_SETTINGS,
    certify: bool = True,
) -> list[complex]:
    """The ``count`` vorticity eigenvalues of smallest |lambda|."""
    b = params.box_width
    vals = [squire_from_herbst(E, b)[0] for E in herbst_spectrum(b, count, settings, certify)]
    vals.sort(key=spectral_sort_key)
    return vals


_Y_TIP = -1j / math.sqrt(3.0)


def _segment_distance(z: complex, a: complex, bpt: complex) -> float:
    d = bpt - a
    t = ((z - a).real * d.real + (z - a).imag * d.imag) / (abs(d) ** 2)
    t = min(1.0, max(0.0, t))
    return abs(z - (a + t * d))


def classify_Y(lam: complex) -> YClassification:
    """Nearest segment of the Y-shaped limiting spectrum and the distance.

    Segments: the branch from +1 to -i/sqrt(3), its mirror from -1, and the
    vertical ray down from -i/sqrt(3).  Ties resolve to the vertical ray.
    """
    if lam.imag <= _Y_TIP.imag:
        d_v = abs(lam.real)
    else:
        d_v = abs(lam - _Y_TIP)
    d_p = _segment_distance(lam, complex(1.0), _Y_TIP)
    d_m = _segment_distance(lam, complex(-1.0), _Y_TIP)
    if d_v <= d_p and d_v <= d_m:
        return YClassification(YSegment.VERTICAL_RAY, d_v)
    if d_p <= d_m:
        return YClassification(YSegment.PLUS_BRANCH, d_p)
    return YClassification(YSegment.MINUS_BRANCH, d_m)
