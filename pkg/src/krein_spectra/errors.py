"""Exception hierarchy shared by all solvers.

Every failure mode of the numerical core gets its own class so that callers
(and the CLI exit-code mapping) can react to exactly the condition they care
about.  All of them derive from :class:`KreinSpectraError`.
"""

from __future__ import annotations


class KreinSpectraError(Exception):
    """Base class for every error raised by this package."""


# --- ODE integration -------------------------------------------------------

class IntegrationError(KreinSpectraError):
    pass


class StepSizeUnderflow(IntegrationError):
    """Required step fell below the machine-representable floor.

    Usually signals a singularity inside the integration span.
    """


class NonFiniteState(IntegrationError):
    """State overflowed or turned into NaN during integration."""


# --- root finding -----------------------------------------------------------

class RootFindingError(KreinSpectraError):
    pass


class NoConvergence(RootFindingError):
    """Newton iteration exhausted its iteration budget."""


class DerivativeVanished(RootFindingError):
    """|f'| dropped below the floor: candidate double root.

    Callers should escalate to the double-root solver.
    """


class SingularJacobian(RootFindingError):
    """Degenerate configuration in a multi-dimensional Newton system."""


# --- contour counting --------------------------------------------------------

class ContourError(KreinSpectraError):
    pass


class RootOnContour(ContourError):
    """|f| vanished on the integration contour itself."""


class InsufficientSampling(ContourError):
    """Phase increment per contour segment stayed above pi/2 after refinement."""


# --- branch tracking ----------------------------------------------------------

class BranchLost(KreinSpectraError):
    """Corrector diverged while continuing a branch."""


class DuplicateRoot(KreinSpectraError):
    """Two branches converged to one root without a detected coalescence."""


# --- model-level failures ------------------------------------------------------

class DegeneratePencil(KreinSpectraError):
    """Leading coefficient of a quadratic pencil vanished."""


class IncompleteSpectrum(KreinSpectraError):
    """Contour count exceeds the number of located eigenvalues."""


class InsufficientDepth(KreinSpectraError):
    """Spectrum not computed deep enough to classify the critical level."""


class AccuracyLoss(KreinSpectraError):
    """A special-function evaluation cannot meet its accuracy contract."""


class RadiusAtZero(KreinSpectraError):
    """The dynamo system was evaluated at the singular origin r = 0."""


class AsymmetricGrid(KreinSpectraError):
    """A parity-type inner product was requested on a non-symmetric grid."""


class GridMismatch(KreinSpectraError):
    """Sampled functions do not share a common radial grid."""
