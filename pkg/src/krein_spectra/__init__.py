"""Spectra, exceptional points and phase transitions of three related
non-self-adjoint boundary-value problems: a PT-symmetric interpolation
Hamiltonian in a box, the Airy-solvable imaginary-linear-potential box and
its Wick-rotated plane-Couette vorticity counterpart, and the spherically
symmetric mean-field alpha^2-dynamo.
"""

from __future__ import annotations

__version__ = "0.1.0"

from . import errors
from .airy import airy_ai, airy_ai_prime, airy_zero_asymptotic, airy_zeros
from .branches import SegmentLabel, SpectralBranch, TrackResult, track_branches
from .integrate import IvpProblem, IvpResult, integrate_ivp, integrate_ivp_samples
from .pencil import quadratic_pencil_roots, two_level_spectrum
from .roots import (
    ExceptionalPoint,
    RootResult,
    count_roots_in_contour,
    find_coalescence,
    find_double_root,
    find_root_complex,
    refine_eigenvalue,
)

__all__ = [
    "__version__",
    "errors",
    "airy_ai",
    "airy_ai_prime",
    "airy_zero_asymptotic",
    "airy_zeros",
    "SegmentLabel",
    "SpectralBranch",
    "TrackResult",
    "track_branches",
    "IvpProblem",
    "IvpResult",
    "integrate_ivp",
    "integrate_ivp_samples",
    "quadratic_pencil_roots",
    "two_level_spectrum",
    "ExceptionalPoint",
    "RootResult",
    "count_roots_in_contour",
    "find_coalescence",
    "find_double_root",
    "find_root_complex",
    "refine_eigenvalue",
]
