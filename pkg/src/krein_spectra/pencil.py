"""Scalar quadratic-pencil branching and the schematic two-level model.

Both capture the square-root branching mechanism behind every real-to-complex
spectral transition in this package: two roots collide when the discriminant
vanishes and depart as a complex-conjugate pair.
"""

from __future__ import annotations

import cmath

from .errors import DegeneratePencil

__all__ = ["quadratic_pencil_roots", "two_level_spectrum"]


def _ordered(z1: complex, z2: complex) -> tuple[complex, complex]:
    if (z1.real, z1.imag) <= (z2.real, z2.imag):
        return z1, z2
    return z2, z1


def quadratic_pencil_roots(a2: complex, a1: complex, a0: complex) -> tuple[complex, complex]:
    """Roots of a2*z**2 + a1*z + a0, ordered by (Re, Im).

    The two roots coincide exactly when the discriminant a1**2 - 4*a0*a2
    vanishes.  Raises :class:`DegeneratePencil` for a2 = 0.
    """
    if a2 == 0:
        raise DegeneratePencil("leading pencil coefficient a2 is zero")
    disc = cmath.sqrt(a1 * a1 - 4.0 * a0 * a2)
    inv = 1.0 / (2.0 * a2)
    return _ordered((-a1 - disc) * inv, (-a1 + disc) * inv)


def two_level_spectrum(a: float, b: complex, c: float) -> tuple[complex, complex]:
    """Eigenvalues c +- sqrt(a**2 - |b|**2) of the 2x2 two-level matrix.

    Real for |a| >= |b|; a complex-conjugate pair for |a| < |b|; the double
    (exceptional) value c exactly at |a| = |b|.  Ordered by (Re, Im).
    """
    s = cmath.sqrt(a * a - abs(b) ** 2)
    return _ordered(c - s, c + s)
