"""Adaptive integration of complex-valued initial value problems.

The stepper is an explicit Dormand-Prince 5(4) embedded pair with PI step
control.  State vectors are small (two to four complex components for the
shooting problems served here), so the hot loop works on plain Python tuples
of complex scalars; internally each complex component is error-controlled
through its real and imaginary parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import NonFiniteState, StepSizeUnderflow

__all__ = ["IvpProblem", "IvpResult", "integrate_ivp", "integrate_ivp_samples"]

# Dormand-Prince 5(4) tableau.  Row 7 equals the 5th-order weights (FSAL).
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# b5 - b4: coefficients of the embedded error estimate
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
# PI controller exponents for a 5th-order scheme
_ALPHA = 0.7 / 5.0
_BETA = 0.4 / 5.0


@dataclass
class IvpProblem:
    """A complex linear-or-nonlinear IVP on a finite span.

    ``rhs(t, y)`` maps a real independent variable and a state tuple to the
    state derivative.  Reverse integration is selected by ``span[0] > span[1]``.
    """

    rhs: Callable[[float, tuple[complex, ...]], Sequence[complex]]
    span: tuple[float, float]
    initial_state: Sequence[complex]
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12

    def __post_init__(self) -> None:
        a, b = self.span
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("span endpoints must be finite")
        if a == b:
            raise ValueError("span must have nonzero length")
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be strictly positive")
        self.initial_state = tuple(complex(v) for v in self.initial_state)


@dataclass
class IvpResult:
    state: tuple[complex, ...]
    steps: int
    rejected: int
    final_t: float = field(default=0.0)


def _error_norm(err, y_old, y_new, rel_tol, abs_tol) -> float:
    # RMS over real components, scaled per component
    acc = 0.0
    n = 0
    for e, yo, yn in zip(err, y_old, y_new):
        sc = abs_tol + rel_tol * max(abs(yo), abs(yn))
        acc += (e.real / sc) ** 2 + (e.imag / sc) ** 2
        n += 2
    return math.sqrt(acc / n)


def integrate_ivp(problem: IvpProblem) -> IvpResult:
    """Integrate ``problem`` across its span and return the final state.

    Local error per step is held to the embedded 4th-order estimate against
    ``rel_tol``/``abs_tol``.  Raises :class:`StepSizeUnderflow` when the
    controller demands steps below the representable floor (a singularity in
    the span) and :class:`NonFiniteState` on overflow/NaN.
    """
    rhs = problem.rhs
    t, t_end = problem.span
    direction = 1.0 if t_end > t else -1.0
    y = tuple(problem.initial_state)
    dim = len(y)
    rel_tol, abs_tol = problem.rel_tol, problem.abs_tol

    k1 = tuple(complex(v) for v in rhs(t, y))
    if len(k1) != dim:
        raise ValueError("rhs dimension does not match the state")

    # initial step from the scale of y and y'
    span_len = abs(t_end - t)
    d0 = max((abs(v) for v in y), default=0.0)
    d1 = max((abs(v) for v in k1), default=0.0)
    h = 0.01 * d0 / d1 if (d0 > 1e-12 and d1 > 1e-12) else 1e-3 * span_len
    h = direction * min(h, 0.1 * span_len)

    steps = 0
    rejected = 0
    err_prev = 1.0
    max_steps = 1_000_000

    while (t_end - t) * direction > 0.0:
        if abs(h) <= 16.0 * abs(t) * 2.220446049250313e-16 + 5e-308:
            raise StepSizeUnderflow(
                f"step size underflow at t={t!r} (h={h!r}); "
                "singular point inside the span?"
            )
        if steps > max_steps:
            raise NonFiniteState(f"step budget exhausted at t={t!r}")
        if (t + h - t_end) * direction > 0.0:
            h = t_end - t

        ks = [k1]
        for i in range(1, 7):
            ai = _A[i]
            yi = list(y)
            for j, aij in enumerate(ai):
                if aij == 0.0:
                    continue
                kj = ks[j]
                fac = h * aij
                for m in range(dim):
                    yi[m] += fac * kj[m]
            ks.append(tuple(complex(v) for v in rhs(t + _C[i] * h, tuple(yi))))

        y_new = list(y)
        for j, bj in enumerate(_B5):
            if bj == 0.0:
                continue
            kj = ks[j]
            fac = h * bj
            for m in range(dim):
                y_new[m] += fac * kj[m]
        y_new = tuple(y_new)

        err_vec = []
        for m in range(dim):
            e = 0.0 + 0.0j
            for j, ej in enumerate(_E):
                if ej != 0.0:
                    e += ej * ks[j][m]
            err_vec.append(h * e)

        finite = all(
            math.isfinite(v.real) and math.isfinite(v.imag) for v in y_new
        )
        if not finite:
            raise NonFiniteState(f"non-finite state at t={t + h!r}")

        err = _error_norm(err_vec, y, y_new, rel_tol, abs_tol)
        if err <= 1.0:
            t += h
            y = y_new
            k1 = ks[6]  # FSAL
            steps += 1
            err = max(err, 1e-10)
            factor = _SAFETY * err ** (-_ALPHA) * err_prev ** _BETA
            err_prev = err
            h *= min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        else:
            rejected += 1
            h *= min(1.0, max(_MIN_FACTOR, _SAFETY * err ** (-0.2)))

    return IvpResult(state=y, steps=steps, rejected=rejected, final_t=t)


def integrate_ivp_samples(
    problem: IvpProblem, sample_points: Sequence[float]
) -> list[tuple[complex, ...]]:
    """States of ``problem`` at the given monotone interior sample points.

    Convenience wrapper used for eigenfunction sampling: integrates segment by
    segment so each requested point is hit exactly.  The points must progress
    from ``span[0]`` toward ``span[1]`` and include neither more than once.
    """
    a, b = problem.span
    direction = 1.0 if b > a else -1.0
    out: list[tuple[complex, ...]] = []
    t = a
    y = tuple(problem.initial_state)
    for s in sample_points:
        if (s - t) * direction < 0.0 or (s - b) * direction > 0.0:
            raise ValueError("sample points must be monotone inside the span")
        if s != t:
            seg = IvpProblem(
                rhs=problem.rhs,
                span=(t, s),
                initial_state=y,
                rel_tol=problem.rel_tol,
                abs_tol=problem.abs_tol,
            )
            y = integrate_ivp(seg).state
            t = s
        out.append(y)
    return out
