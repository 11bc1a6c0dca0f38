"""Continuation of eigenvalue branches over a real parameter grid.

Each branch is predicted by linear extrapolation and corrected by a damped
Newton iteration on the characteristic function.  Between grid nodes the
tracker sub-steps adaptively; a failed or inconsistent correction shrinks
the sub-step.

Colliding roots get structural treatment.  Branches whose predictions
cluster are resolved together: a two-cluster goes through the local
quadratic model of the characteristic function (Newton on f' finds the
critical point between the roots, f ~ f* + f''(z - z*)^2/2 places both
roots), which works uniformly before, at and after a collision; larger
clusters are peeled off by Newton with deflation of already-found roots,
using imaginary-perturbed seeds because on PT-symmetric families a real
seed can never leave the real axis.  When a resolved pair flips between
real and complex across a step, the underlying double root is refined into
an :class:`ExceptionalPoint` record and the branches are linked as a
conjugate pair.  Committed branch points always lie on the caller's grid.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

from .errors import DerivativeVanished, NoConvergence, RootFindingError, SingularJacobian
from .roots import ExceptionalPoint, find_double_root

__all__ = ["SegmentLabel", "SpectralBranch", "TrackResult", "track_branches"]

REALITY_TOL = 1e-8
# separation below this fraction of the distance to the other roots places
# two branches in a common cluster
COALESCENCE_FACTOR = 1e-4
_CLUSTER_FACTOR = 0.45
_MAX_BISECT = 12
_DISTINCT = 1e-7


class SegmentLabel(str, Enum):
    REAL = "Real"
    COMPLEX_PAIR = "ComplexPair"


def is_real_eigenvalue(z: complex, reality_tol: float = REALITY_TOL) -> bool:
    return abs(z.imag) <= reality_tol * max(1.0, abs(z))


@dataclass
class SpectralBranch:
    parameter_name: str
    points: list[tuple[float, complex]] = field(default_factory=list)
    segment_labels: list[SegmentLabel] = field(default_factory=list)
    branch_id: int = 0
    partner_id: Optional[int] = None
    diagnostics: list[str] = field(default_factory=list)

    def append(self, parameter: float, value: complex, reality_tol: float) -> None:
        self.points.append((parameter, value))
        self.segment_labels.append(
            SegmentLabel.REAL
            if is_real_eigenvalue(value, reality_tol)
            else SegmentLabel.COMPLEX_PAIR
        )

    def last(self) -> complex:
        return self.points[-1][1]

    def reached(self, parameter: float) -> bool:
        return bool(self.points) and self.points[-1][0] == parameter


@dataclass
class TrackResult:
    branches: list[SpectralBranch]
    exceptional_points: list[ExceptionalPoint]
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class _Live:
    """Continuation state of one branch between committed grid nodes."""

    branch: SpectralBranch
    hist: list[tuple[float, complex]]
    alive: bool = True

    def predict(self, p_new: float) -> complex:
        if len(self.hist) == 1:
            return self.hist[-1][1]
        (p1, z1), (p2, z2) = self.hist[-2], self.hist[-1]
        if p2 == p1:
            return z2
        return z2 + (z2 - z1) * (p_new - p2) / (p2 - p1)

    def push(self, p: float, z: complex) -> None:
        self.hist.append((p, z))
        if len(self.hist) > 2:
            self.hist.pop(0)


def _newton(
    f: Callable[[complex], complex],
    guess: complex,
    pos_tol: float,
    max_step: float,
    max_iter: int = 25,
) -> complex:
    """Damped Newton with finite-difference derivative and step clipping.

    Steps that stop shrinking while already tiny indicate the evaluation
    noise floor of the characteristic function, which can sit above the
    requested position tolerance; such roots are accepted rather than
    re-polished forever.
    """
    z = complex(guess)
    prev_step = math.inf
    stagnant = 0
    for _ in range(max_iter):
        fz = f(z)
        h = max(1e-7, 1e-7 * abs(z))
        df = (f(z + h) - f(z - h)) / (2.0 * h)
        if abs(df) <= 1e-300:
            raise DerivativeVanished(f"flat characteristic function near {z!r}")
        step = fz / df
        if abs(step) > max_step:
            step *= max_step / abs(step)
        z = z - step
        scale = max(1.0, abs(z))
        if abs(step) <= pos_tol * scale:
            return z
        if abs(step) <= 1e4 * pos_tol * scale and abs(step) >= 0.25 * prev_step:
            stagnant += 1
            if stagnant >= 3:
                return z
        else:
            stagnant = 0
        prev_step = abs(step)
    raise NoConvergence(f"corrector did not settle from {guess!r}")


def _pair_resolve(
    f: Callable[[complex], complex],
    mid: complex,
    pos_tol: float,
    trust: float,
) -> Optional[tuple[complex, complex, complex]]:
    """Resolve a close root pair via the critical point of f between them.

    Returns (z_star, root_a, root_b) or None when the local quadratic
    picture does not apply (no critical point nearby).
    """
    z = complex(mid)
    scale = max(1.0, abs(z))
    for _ in range(30):
        h1 = 1e-7 * scale
        h2 = 1e-4 * scale
        fp = (f(z + h1) - f(z - h1)) / (2.0 * h1)
        fpp = (f(z + h2) - 2.0 * f(z) + f(z - h2)) / (h2 * h2)
        if abs(fpp) <= 1e-300:
            return None
        step = fp / fpp
        if abs(step) > trust:
            step *= trust / abs(step)
        z = z - step
        if abs(step) <= pos_tol * scale:
            break
    else:
        return None
    if abs(z - mid) > 2.0 * trust:
        return None
    h2 = 1e-4 * scale
    f0 = f(z)
    fpp = (f(z + h2) - 2.0 * f0 + f(z - h2)) / (h2 * h2)
    if abs(fpp) <= 1e-300:
        return None
    delta = cmath.sqrt(-2.0 * f0 / fpp)
    floor = 1e-12 * scale
    if abs(delta) < floor:
        delta = floor
    r_a, r_b = z - delta, z + delta
    try:
        r_a = _newton(f, r_a, pos_tol, max_step=2.0 * abs(delta) + 0.05 * trust)
        r_b = _newton(f, r_b, pos_tol, max_step=2.0 * abs(delta) + 0.05 * trust)
    except RootFindingError:
        pass  # quadratic-model seeds are already good near a collision
    return z, r_a, r_b


class _Tracker:
    def __init__(
        self,
        family: Callable[[complex, float], complex],
        parameter_name: str,
        reality_tol: float,
        pos_tol: float,
    ) -> None:
        self.family = family
        self.name = parameter_name
        self.reality_tol = reality_tol
        self.pos_tol = pos_tol
        self.eps: list[ExceptionalPoint] = []
        self.notes: list[str] = []

    def known_ep(self, z: complex, p: float) -> bool:
        for e in self.eps:
            if abs(e.parameter - p) <= 1e-4 * max(1.0, abs(p)) and abs(
                e.eigenvalue - z
            ) <= 1e-3 * max(1.0, abs(z)):
                return True
        return False

    def _record_transition(self, z_seed: complex, p0: float, p1: float) -> None:
        """Refine and record the double root behind a real<->complex flip.

        Semisimple degeneracies (two branches crossing without a phase
        transition, e.g. the decoupled dynamo at zero profile scale) also
        satisfy f = f_z = 0 but carry a vanishing parameter derivative, so
        the local square-root coefficient separates them from genuine
        exceptional points.
        """
        try:
            cand = find_double_root(self.family, z_seed, 0.5 * (p0 + p1), tol=1e-6)
        except (RootFindingError, SingularJacobian):
            return
        lo, hi = min(p0, p1), max(p0, p1)
        pad = 2.0 * (hi - lo) + 1e-12
        if not (lo - pad <= cand.parameter <= hi + pad):
            return
        z0, q0 = cand.eigenvalue, cand.parameter
        hz = 1e-3 * max(1.0, abs(z0))
        hp = 1e-5 * max(1.0, abs(q0))
        f_zz = (
            self.family(z0 + hz, q0)
            - 2.0 * self.family(z0, q0)
            + self.family(z0 - hz, q0)
        ) / (hz * hz)
        f_p = (self.family(z0, q0 + hp) - self.family(z0, q0 - hp)) / (2.0 * hp)
        if abs(f_zz) <= 1e-300:
            return
        split = abs(-2.0 * f_p / f_zz) * (hi - lo + 1e-12)
        if split <= (1e-5 * max(1.0, abs(z0))) ** 2:
            return  # semisimple crossing, not a spectral phase transition
        if not self.known_ep(cand.eigenvalue, cand.parameter):
            self.eps.append(cand)

    # -- cluster machinery -------------------------------------------------

    def _solve_cluster(
        self,
        f_at: Callable[[complex], complex],
        members: list[int],
        preds: dict[int, complex],
        radius: float,
        spacing: float,
    ) -> Optional[dict[int, complex]]:
        """Peel the roots of a prediction cluster by deflated Newton.

        Seeds are imaginary-perturbed: on PT-symmetric families the
        characteristic function is real on the real axis and Newton started
        on the axis can never leave it, so a conjugate pair would be
        unreachable from purely real seeds.
        """
        found: list[complex] = []
        r = max(radius, _DISTINCT)
        max_step = 2.5 * r + 0.25 * spacing

        def deflated(z: complex) -> complex:
            val = f_at(z)
            for w in found:
                val /= z - w
            return val

        centroid = sum(preds[i] for i in members) / len(members)
        for i in members:
            seeds = [
                preds[i],
                preds[i] + 0.7j * r,
                preds[i] - 0.7j * r,
                centroid + 1.3 * r * cmath.exp(0.5j + 2j * math.pi * i / len(members)),
            ]
            root: Optional[complex] = None
            for seed in seeds:
                try:
                    cand = _newton(deflated, seed, self.pos_tol, max_step)
                except RootFindingError:
                    continue
                if abs(cand - centroid) > 2.5 * r + 0.5 * spacing:
                    continue
                if all(abs(cand - w) > _DISTINCT * max(1.0, abs(cand)) for w in found):
                    root = cand
                    break
            if root is None:
                return None
            found.append(root)

        # minimal-total-distance assignment, greedy over sorted distances
        out: dict[int, complex] = {}
        taken: set[int] = set()
        options = sorted(
            (abs(found[k] - preds[i]), i, k) for i in members for k in range(len(found))
        )
        for _, i, k in options:
            if i in out or k in taken:
                continue
            out[i] = found[k]
            taken.add(k)
        return out

    def _clusters(self, ids: list[int], preds: dict[int, complex]) -> list[list[int]]:
        """Connected components of the close-prediction relation."""
        n = len(ids)
        parent = {i: i for i in ids}

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        def union(i: int, j: int) -> None:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)

        for a_idx in range(n):
            for b_idx in range(a_idx + 1, n):
                ia, ib = ids[a_idx], ids[b_idx]
                d = abs(preds[ia] - preds[ib])
                others = [
                    min(abs(preds[ia] - preds[j]), abs(preds[ib] - preds[j]))
                    for j in ids
                    if j not in (ia, ib)
                ]
                spacing = min(others) if others else max(1.0, abs(preds[ia]))
                if d <= _CLUSTER_FACTOR * spacing:
                    union(ia, ib)
        groups: dict[int, list[int]] = {}
        for i in ids:
            groups.setdefault(find(i), []).append(i)
        return [sorted(g) for _, g in sorted(groups.items())]

    # -- one tentative sub-step --------------------------------------------

    def _attempt(
        self, live: list[_Live], p0: float, p1: float
    ) -> Optional[dict[int, complex]]:
        """Correct every live branch at p1; None means the step must shrink."""
        fam = self.family

        def f_at(z: complex) -> complex:
            return fam(z, p1)

        preds = {lv.branch.branch_id: lv.predict(p1) for lv in live}
        by_id = {lv.branch.branch_id: lv for lv in live}
        ids = sorted(preds)
        if not ids:
            return {}
        out: dict[int, complex] = {}

        clusters = self._clusters(ids, preds)
        for members in clusters:
            others = [preds[j] for j in ids if j not in members]
            spacing = (
                min(
                    abs(preds[i] - w)
                    for i in members
                    for w in others
                )
                if others
                else max(1.0, abs(preds[members[0]]))
            )
            if len(members) == 1:
                i = members[0]
                lv = by_id[i]
                pred = preds[i]
                motion = abs(pred - lv.hist[-1][1])
                # the floor keeps the trust radius above root-position noise
                trust = max(
                    0.45 * spacing, 4.0 * motion, 1e-6 * max(1.0, abs(pred))
                )
                try:
                    z = _newton(f_at, pred, self.pos_tol, trust)
                except RootFindingError:
                    return None
                if abs(z - pred) > trust:
                    return None
                out[i] = z
                continue

            ia, ib = members[0], members[-1]
            la, lb = by_id[ia], by_id[ib]
            d_pred = abs(preds[ia] - preds[ib])
            d_prev = abs(la.hist[-1][1] - lb.hist[-1][1])
            resolved: Optional[dict[int, complex]] = None
            pair_center: Optional[complex] = None
            if len(members) == 2:
                stable = d_pred >= 0.85 * d_prev and d_pred > 0.02 * spacing
                if stable:
                    # settled conjugate pair or avoided crossing: plain
                    # correction, validated by the duplicate check below
                    ok = True
                    for i in members:
                        lv = by_id[i]
                        pred = preds[i]
                        motion = abs(pred - lv.hist[-1][1])
                        trust = max(
                            2.0 * d_pred, 4.0 * motion, 1e-6 * max(1.0, abs(pred))
                        )
                        try:
                            z = _newton(f_at, pred, self.pos_tol, trust)
                        except RootFindingError:
                            ok = False
                            break
                        out[i] = z
                    za, zb = out.get(ia), out.get(ib)
                    if (
                        ok
                        and za is not None
                        and zb is not None
                        and abs(za - zb) > _DISTINCT * max(1.0, abs(za))
                    ):
                        continue
                mid = 0.5 * (preds[ia] + preds[ib])
                pr = _pair_resolve(f_at, mid, self.pos_tol, trust=0.6 * spacing)
                if pr is not None:
                    z_star, r1, r2 = pr
                    if (
                        abs(r1 - mid) <= 0.9 * spacing
                        and abs(r2 - mid) <= 0.9 * spacing
                        and abs(r1 - r2) > 1e-11 * max(1.0, abs(r1))
                    ):
                        d_direct = abs(r1 - preds[ia]) + abs(r2 - preds[ib])
                        d_cross = abs(r2 - preds[ia]) + abs(r1 - preds[ib])
                        resolved = (
                            {ia: r1, ib: r2}
                            if d_direct <= d_cross
                            else {ia: r2, ib: r1}
                        )
                        pair_center = z_star
            if resolved is None:
                radius = max(abs(preds[i] - preds[j]) for i in members for j in members)
                resolved = self._solve_cluster(f_at, members, preds, radius, spacing)
            if resolved is None:
                return None

            flipped = [
                i
                for i in members
                if is_real_eigenvalue(by_id[i].hist[-1][1], self.reality_tol)
                != is_real_eigenvalue(resolved[i], self.reality_tol)
            ]
            if flipped:
                seed = pair_center
                if seed is None:
                    seed = sum(resolved[i] for i in flipped) / len(flipped)
                    seed = complex(seed.real, 0.0)
                self._record_transition(seed, p0, p1)
                # link conjugate partners among the flipped members
                for i in flipped:
                    for j in flipped:
                        if j <= i:
                            continue
                        if abs(
                            resolved[i] - resolved[j].conjugate()
                        ) <= 1e-6 * max(1.0, abs(resolved[i])):
                            by_id[i].branch.partner_id = j
                            by_id[j].branch.partner_id = i
            out.update(resolved)

        # global distinctness: collapsed roots mean the step was too greedy
        for na, ia in enumerate(ids):
            for ib in ids[na + 1 :]:
                if abs(out[ia] - out[ib]) <= _DISTINCT * max(1.0, abs(out[ia])):
                    return None
        return out

    def _force_step(self, live: list[_Live], p1: float) -> None:
        """Best-effort correction at p1; truncate branches that resist."""
        for lv in live:
            if not lv.alive:
                continue
            pred = lv.predict(p1)
            try:
                z = _newton(
                    lambda zz: self.family(zz, p1),
                    pred,
                    self.pos_tol,
                    max(1.0, abs(pred)),
                )
                lv.push(p1, z)
            except RootFindingError as exc:
                lv.alive = False
                msg = f"lost at {self.name}={p1!r}: {exc}"
                lv.branch.diagnostics.append(msg)
                self.notes.append(f"branch {lv.branch.branch_id} truncated: {msg}")

    def advance(self, live: list[_Live], p0: float, p1: float) -> None:
        """Move every live branch from p0 to p1 with adaptive sub-steps."""
        if p1 == p0:
            return
        span = p1 - p0
        h_min = abs(span) / 2.0**_MAX_BISECT
        p = p0
        h = span
        budget = 400
        while (p1 - p) * math.copysign(1.0, span) > 0.0:
            active = [lv for lv in live if lv.alive]
            if not active:
                return
            if abs(h) > abs(p1 - p):
                h = p1 - p
            out = self._attempt(active, p, p + h)
            budget -= 1
            if out is not None:
                for lv in active:
                    lv.push(p + h, out[lv.branch.branch_id])
                p = p + h
                h = 2.0 * h
                continue
            if abs(h) <= 2.0 * h_min or budget <= 0:
                self._force_step(live, p + h)
                p = p + h
                h = 2.0 * h
                continue
            h = 0.5 * h


def track_branches(
    determinant_family: Callable[[complex, float], complex],
    parameter_grid: Sequence[float],
    seeds: Sequence[complex],
    parameter_name: str = "p",
    reality_tol: float = REALITY_TOL,
    pos_tol: float = 1e-12,
) -> TrackResult:
    """Track every seed of ``determinant_family`` across ``parameter_grid``.

    ``seeds`` must be converged roots at the first grid point.  Lost branches
    are truncated with a diagnostic, never dropped silently; coalescences are
    refined into :class:`ExceptionalPoint` records and the transitioning pair
    is linked by ``partner_id``.  Output is deterministic and sorted by
    ``branch_id``.
    """
    grid = [float(p) for p in parameter_grid]
    if not grid:
        raise ValueError("parameter grid must be nonempty")

    tracker = _Tracker(determinant_family, parameter_name, reality_tol, pos_tol)
    live: list[_Live] = []
    for i, s in enumerate(seeds):
        br = SpectralBranch(parameter_name=parameter_name, branch_id=i)
        br.append(grid[0], complex(s), reality_tol)
        live.append(_Live(branch=br, hist=[(grid[0], complex(s))]))

    for j in range(1, len(grid)):
        tracker.advance(live, grid[j - 1], grid[j])
        for lv in live:
            if lv.alive:
                lv.branch.append(grid[j], lv.hist[-1][1], reality_tol)

    # authoritative conjugation pairing from the end state; transient links
    # made during intermediate transitions may be stale
    branches = [lv.branch for lv in live]
    for b in branches:
        b.partner_id = None
    for b in branches:
        if b.partner_id is not None or not b.points:
            continue
        z_last = b.last()
        if is_real_eigenvalue(z_last, reality_tol):
            continue
        best = None
        for other in branches:
            if other.branch_id == b.branch_id or other.partner_id is not None:
                continue
            if not other.points:
                continue
            d = abs(other.last() - z_last.conjugate())
            if best is None or d < best[0]:
                best = (d, other)
        if best is not None and best[0] <= 1e-6 * max(1.0, abs(z_last)):
            b.partner_id = best[1].branch_id
            best[1].partner_id = b.branch_id

    branches.sort(key=lambda br: br.branch_id)
    return TrackResult(
        branches=branches,
        exceptional_points=tracker.eps,
        diagnostics=tracker.notes,
    )
