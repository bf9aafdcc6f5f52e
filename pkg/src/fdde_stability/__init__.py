"""Stability analysis of a fractional delay differential equation with a
delay-dependent coefficient.

    D^alpha x = -gamma x + g(x(t - tau1)) - exp(-gamma tau2) g(x(t - tau1 - tau2))

Three independent verdict sources are provided: closed-form classifiers
(:mod:`.theorems`), characteristic root analysis (:mod:`.roots`) and
simulation with a fractional predictor-corrector (:mod:`.solver`).
"""

from __future__ import annotations

from .errors import (
    BranchPointError,
    ContourRootError,
    DelayGridMisaligned,
    DomainError,
    FDDEError,
    HistoryDomainTooShort,
    NonFiniteState,
    PreconditionError,
    TrajectoryTooShort,
)
from .model import (
    CrossingPoint,
    LinearSingleDelay,
    ModelParams,
    Nonlinearity,
    StabilityVerdict,
    Status,
    Trajectory,
    linearize,
    reduce_case1,
)
from .roots import (
    CharFn,
    count_rhp_roots,
    find_imaginary_crossing,
    find_positive_real_root,
    verdict_from_roots,
)
from .solver import SolverConfig, aligned_step, confirmed_verdict, empirical_verdict, solve, solve_linear_single
from .sweep import Case, RegionMap, Source, SweepSpec, delay_profile, sweep
from .theorems import (
    classify,
    classify_case1,
    classify_case2,
    classify_single_delay,
    critical_values,
    k_star,
    tau1_star,
    tau2_star,
    tau_cr,
)

__version__ = "0.1.0"

__all__ = [
    "BranchPointError",
    "Case",
    "CharFn",
    "ContourRootError",
    "CrossingPoint",
    "DelayGridMisaligned",
    "DomainError",
    "FDDEError",
    "HistoryDomainTooShort",
    "LinearSingleDelay",
    "ModelParams",
    "NonFiniteState",
    "Nonlinearity",
    "PreconditionError",
    "RegionMap",
    "SolverConfig",
    "Source",
    "StabilityVerdict",
    "Status",
    "SweepSpec",
    "Trajectory",
    "TrajectoryTooShort",
    "aligned_step",
    "classify",
    "classify_case1",
    "classify_case2",
    "classify_single_delay",
    "count_rhp_roots",
    "critical_values",
    "delay_profile",
    "confirmed_verdict",
    "empirical_verdict",
    "find_imaginary_crossing",
    "find_positive_real_root",
    "k_star",
    "linearize",
    "reduce_case1",
    "solve",
    "solve_linear_single",
    "sweep",
    "tau1_star",
    "tau2_star",
    "tau_cr",
    "verdict_from_roots",
]
