"""Solver tolerance bundles.

The underlying papers on these models never state shooting tolerances or
step-size policies, so the defaults here are our own and travel with every
result inside the output metadata.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class SolverSettings:
    rel_tol: float = 1e-10          # integrator relative tolerance
    abs_tol: float = 1e-12          # integrator absolute tolerance
    newton_pos_tol: float = 1e-12   # eigenvalue position tolerance
    reality_tol: float = 1e-8       # |Im|/max(1, |z|) below this counts as real
    contour_samples: int = 96       # base samples per rectangle edge

    @classmethod
    def tight(cls) -> "SolverSettings":
        return cls(rel_tol=1e-12, abs_tol=1e-14, newton_pos_tol=1e-13)

    def metadata(self) -> dict:
        return asdict(self)


DEFAULT_SETTINGS = SolverSettings()
