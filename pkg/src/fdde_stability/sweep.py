"""Stability maps over a parameter grid from three independent verdict sources.

Every grid cell is classified by the closed-form theorems, by characteristic
root analysis and by simulation. Cells close to a region boundary are flagged
because a finite-horizon simulation cannot resolve marginal dynamics there.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .model import LinearSingleDelay, ModelParams, Nonlinearity, StabilityVerdict, Status, linearize
from .roots import CharFn, verdict_from_roots
from .solver import SolverConfig, aligned_step, confirmed_verdict, solve, solve_linear_single
from .theorems import (
    classify_case1,
    classify_case2,
    classify_single_delay,
    k_star,
    tau1_star,
    tau2_star,
    tau_cr,
)

BOUNDARY_RTOL = 0.01
DEFAULT_H_MAX = 0.01


class Case(str, enum.Enum):
    SINGLE_DELAY = "single"
    CASE1 = "case1"
    CASE2 = "case2"


class Source(str, enum.Enum):
    THEOREM = "theorem"
    ROOTS = "roots"
    SIMULATION = "simulation"


ALL_SOURCES = (Source.THEOREM, Source.ROOTS, Source.SIMULATION)


@dataclass(frozen=True)
class SweepSpec:
    """Grid over (k, gamma), or over (a, b) when ``case`` is SINGLE_DELAY."""

    k_range: tuple[float, float, int]
    gamma_range: tuple[float, float, int]
    alpha: float
    tau: float
    case: Case = Case.CASE1
    verdict_sources: tuple[Source, ...] = ALL_SOURCES

    def __post_init__(self) -> None:
        for name in ("k_range", "gamma_range"):
            lo, hi, n = getattr(self, name)
            if int(n) < 2:
                raise ValueError(f"{name} needs at least 2 grid points")
            if not lo < hi:
                raise ValueError(f"{name} must be a nonempty interval")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        object.__setattr__(self, "case", Case(self.case))
        object.__setattr__(self, "verdict_sources", tuple(Source(s) for s in self.verdict_sources))

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        k0, k1, nk = self.k_range
        g0, g1, ng = self.gamma_range
        return np.linspace(k0, k1, int(nk)), np.linspace(g0, g1, int(ng))


@dataclass(frozen=True)
class Cell:
    k: float
    gamma: float
    tau: float
    verdicts: dict[Source, StabilityVerdict]
    boundary: bool
    error: str = ""

    @property
    def agreement(self) -> bool:
        """All non-Unknown verdicts coincide."""
        decided = {v.status for v in self.verdicts.values() if v.status is not Status.UNKNOWN}
        return len(decided) <= 1

    def conflict(self, a: Source, b: Source) -> bool:
        """The two sources give opposite Stable/Unstable verdicts."""
        if a not in self.verdicts or b not in self.verdicts:
            return False
        return self.verdicts[a].status.opposes(self.verdicts[b].status)

    @property
    def clause(self) -> str:
        v = self.verdicts.get(Source.THEOREM)
        return v.clause if v is not None else ""


@dataclass(frozen=True)
class RegionMap:
    spec: SweepSpec
    cells: list[Cell] = field(default_factory=list)

    def cell(self, k: float, gamma: float) -> Cell:
        return min(self.cells, key=lambda c: (c.k - k) ** 2 + (c.gamma - gamma) ** 2)

    def conflicts(self, a: Source, b: Source, include_boundary: bool = True) -> list[Cell]:
        return [c for c in self.cells if c.conflict(a, b) and (include_boundary or not c.boundary)]


def default_solver_config(tau1: float, tau2: float, h_max: float = DEFAULT_H_MAX) -> SolverConfig:
    """Horizon 50 (tau1 + tau2 + 1) on the largest grid-aligned step <= h_max.

    The implicit corrector is used because strongly damped cells at small
    alpha make the explicit PECE step unstable at h = 0.01.
    """
    return SolverConfig(
        aligned_step(h_max, tau1, tau2), 50.0 * (tau1 + tau2 + 1.0), corrector="implicit"
    )


def _near(x: float, y: float, scale: float) -> bool:
    return abs(x - y) <= BOUNDARY_RTOL * scale


def near_boundary(case: Case, k: float, gamma: float, tau: float, alpha: float) -> bool:
    """Within 1% relative distance of any curve where a theorem's verdict changes."""
    s = max(abs(k), abs(gamma))
    if case is Case.SINGLE_DELAY:
        a, b = k, gamma
        if _near(b, -abs(a), s) or _near(b, a, s) or _near(b, -a, s):
            return True
        if b < -abs(a):
            try:
                tc = tau_cr(a, b, alpha)
            except DomainError:
                return False
            return _near(tau, tc, tc)
        return False
    if _near(k, 0, s) or _near(gamma, 0, s) or _near(gamma, 2 * k, s) or _near(k, gamma, s):
        return True
    if case is Case.CASE2:
        if _near(gamma, -2 * k, s):
            return True
        if k > 0 > gamma and tau > 0:
            ks = k_star(alpha, gamma, tau).value
            return _near(k, ks, abs(ks))
        return False
    try:
        t2 = tau2_star(k, gamma)
        if _near(tau, t2, abs(t2)):
            return True
    except DomainError:
        pass
    try:
        t1 = tau1_star(ModelParams(alpha, gamma, k), tau)
        return _near(tau, t1, t1)
    except DomainError:
        return False


def theorem_verdict(case: Case, k: float, gamma: float, tau: float, alpha: float) -> StabilityVerdict:
    if case is Case.SINGLE_DELAY:
        return classify_single_delay(LinearSingleDelay(alpha, k, gamma, tau))
    if case is Case.CASE1:
        return classify_case1(ModelParams(alpha, gamma, k, 0.0, tau))
    return classify_case2(ModelParams(alpha, gamma, k, 1.0, tau))


def roots_verdict(case: Case, k: float, gamma: float, tau: float, alpha: float) -> StabilityVerdict:
    if case is Case.SINGLE_DELAY:
        return verdict_from_roots(CharFn.single_delay(LinearSingleDelay(alpha, k, gamma, tau)))
    tau1 = 0.0 if case is Case.CASE1 else 1.0
    return verdict_from_roots(CharFn(alpha, gamma, k, tau1, tau))


def simulation_verdict(case: Case, k: float, gamma: float, tau: float, alpha: float) -> StabilityVerdict:
    if case is Case.SINGLE_DELAY:
        sys = LinearSingleDelay(alpha, k, gamma, tau)
        return confirmed_verdict(lambda c: solve_linear_single(sys, c), default_solver_config(tau, 0.0))
    tau1 = 0.0 if case is Case.CASE1 else 1.0
    params = ModelParams(alpha, gamma, k, tau1, tau)
    return confirmed_verdict(lambda c: solve(params, c), default_solver_config(tau1, tau))


_SOURCE_FNS = {
    Source.THEOREM: theorem_verdict,
    Source.ROOTS: roots_verdict,
    Source.SIMULATION: simulation_verdict,
}


def _error_verdict(exc: Exception) -> StabilityVerdict:
    return StabilityVerdict(Status.UNKNOWN, clause=f"error:{type(exc).__name__}", note=str(exc))


def evaluate_cell(
    case: Case, k: float, gamma: float, tau: float, alpha: float, sources: Sequence[Source]
) -> Cell:
    """All requested verdicts for one cell; exceptions become error verdicts."""
    verdicts: dict[Source, StabilityVerdict] = {}
    errors = []
    for src in sources:
        try:
            verdicts[src] = _SOURCE_FNS[src](case, k, gamma, tau, alpha)
        except Exception as exc:  # one bad cell must not abort a sweep
            verdicts[src] = _error_verdict(exc)
            errors.append(f"{src.value}: {exc}")
    try:
        boundary = near_boundary(case, k, gamma, tau, alpha)
    except Exception as exc:
        boundary = True
        errors.append(f"boundary: {exc}")
    return Cell(k, gamma, tau, verdicts, boundary, "; ".join(errors))


def _cell_job(args) -> Cell:
    return evaluate_cell(*args)


def sweep(spec: SweepSpec, workers: int = 1) -> RegionMap:
    """Evaluate every cell; output order is gamma-major, k-minor regardless of ``workers``."""
    ks, gammas = spec.axes()
    jobs = [
        (spec.case, float(k), float(g), spec.tau, spec.alpha, spec.verdict_sources)
        for g in gammas
        for k in ks
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_cell_job, jobs, chunksize=8))
    else:
        cells = [_cell_job(j) for j in jobs]
    return RegionMap(spec, cells)


def delay_profile(
    params: ModelParams,
    tau_values: Iterable[float],
    sources: Sequence[Source] = ALL_SOURCES,
) -> list[tuple[float, dict[Source, StabilityVerdict]]]:
    """Verdicts along tau2 for fixed (alpha, k, gamma, tau1), tau1 in {0, 1}.

    The simulation source integrates ``params`` with its own nonlinearity; the
    theorem and root sources use the linearization.
    """
    if params.tau1 not in (0.0, 1.0):
        raise ValueError("delay profiles need tau1 = 0 or tau1 = 1")
    case = Case.CASE1 if params.tau1 == 0.0 else Case.CASE2
    lin = linearize(params)
    out = []
    for tau in tau_values:
        tau = float(tau)
        verdicts: dict[Source, StabilityVerdict] = {}
        for src in sources:
            try:
                if src is Source.SIMULATION and params.nonlinearity is not Nonlinearity.LINEAR:
                    at_tau = params.with_tau(tau)
                    cfg = default_solver_config(params.tau1, tau)
                    verdicts[src] = confirmed_verdict(lambda c: solve(at_tau, c), cfg)
                else:
                    verdicts[src] = _SOURCE_FNS[src](case, lin.k, lin.gamma, tau, lin.alpha)
            except Exception as exc:
                verdicts[src] = _error_verdict(exc)
        out.append((tau, verdicts))
    return out


def stability_switches(profile: list[tuple[float, dict[Source, StabilityVerdict]]], source: Source) -> list[float]:
    """Values of tau where ``source`` flips between Stable and Unstable."""
    switches = []
    last: tuple[float, Status] | None = None
    for tau, verdicts in profile:
        status = verdicts[source].status
        if status not in (Status.STABLE, Status.UNSTABLE):
            continue
        if last is not None and last[1] is not status:
            switches.append(0.5 * (last[0] + tau))
        last = (tau, status)
    return switches


__all__ = [
    "Case",
    "Cell",
    "RegionMap",
    "Source",
    "SweepSpec",
    "default_solver_config",
    "delay_profile",
    "evaluate_cell",
    "near_boundary",
    "stability_switches",
    "sweep",
]
