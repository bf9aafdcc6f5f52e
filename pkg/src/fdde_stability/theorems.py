"""Closed-form stability classifiers and critical values.

Clause labels (``"Thm2.1(1)"``, ``"Thm4.1(c)(i)"``, ...) record which
sufficient condition produced a verdict. Wherever no proven condition
applies, including every boundary of strict inequalities, the classifiers
return ``Status.UNKNOWN`` instead of guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable

import numpy as np

from .errors import DomainError, PreconditionError
from .model import (
    LinearSingleDelay,
    ModelParams,
    StabilityVerdict,
    Status,
    linearize,
    reduce_case1,
)

#: Relative tolerance for treating tau as equal to a critical delay.
CRITICAL_RTOL = 1e-12


@dataclass(frozen=True)
class CriticalValues:
    tau_cr: float | None = None
    tau1_star: float | None = None
    tau2_star: float | None = None
    k_star: float | None = None
    lambda_star: float | None = None

    def items(self) -> list[tuple[str, float]]:
        return [(f.name, getattr(self, f.name)) for f in fields(self) if getattr(self, f.name) is not None]


#: Value printed for (alpha, gamma, tau) = (0.8, -0.4, 1.6) in the source example;
#: the closed form gives about 2.633 there.
PUBLISHED_K_STAR = {(0.8, -0.4, 1.6): 5.675449}


@dataclass(frozen=True)
class KStar:
    """Critical gain together with the tangency abscissa.

    ``note`` is a diagnostic: it flags a published value that the closed form
    does not reproduce, and the case k* <= 0 where R has a local minimum (not
    a maximum) at ``lambda_star``.
    """

    value: float
    lambda_star: float
    note: str = ""


def _hopf_modulus(a: float, b: float, alpha: float) -> float:
    """w = a cos(theta) + sqrt(b^2 - a^2 sin^2(theta)), the value of v^alpha at the crossing."""
    theta = alpha * math.pi / 2
    s = abs(a * math.sin(theta))
    if abs(b) < s:
        raise DomainError(f"negative radicand b^2 - a^2 sin^2 for a={a}, b={b}")
    w = a * math.cos(theta) + math.sqrt((abs(b) - s) * (abs(b) + s))
    if w <= 0:
        raise DomainError("crossing modulus is not positive")
    return w


def hopf_frequency(a: float, b: float, alpha: float) -> float:
    """Crossing frequency (a cos(theta) + sqrt(b^2 - a^2 sin^2(theta)))^(1/alpha)."""
    w = _hopf_modulus(a, b, alpha)
    log_v = math.log(w) / alpha
    if not -745.0 < log_v < 709.0:
        raise DomainError(f"crossing frequency w^(1/alpha) is not representable for w = {w}")
    return math.exp(log_v)


def tau_cr(a: float, b: float, alpha: float) -> float:
    """Hopf delay of D^alpha x = a x + b x(t - tau), valid for b < -|a|."""
    if not b < -abs(a):
        raise DomainError(f"Hopf delay needs b < -|a|, got a={a}, b={b}")
    w = _hopf_modulus(a, b, alpha)
    arg = (w * math.cos(alpha * math.pi / 2) - a) / b
    if abs(arg) > 1 + 1e-12:
        raise DomainError(f"arccos argument {arg} outside [-1, 1]")
    # acos(arg) / v with v = w^(1/alpha), in log form so huge v gives a tiny delay
    log_v = math.log(w) / alpha
    if log_v < -700.0:
        raise DomainError(f"crossing frequency underflows for w = {w}")
    return math.acos(min(1.0, max(-1.0, arg))) * math.exp(-log_v)


def tau2_star(k: float, gamma: float) -> float:
    """Delay at which b(tau) = -k exp(-gamma tau) meets the line b = -|a|."""
    if k == gamma:
        raise DomainError("tau2_star is undefined for k = gamma")
    if gamma == 0:
        raise DomainError("tau2_star is undefined for gamma = 0")
    if k == 0:
        raise DomainError("tau2_star is undefined for k = 0")
    ratio = abs(k - gamma) / k
    if not ratio > 0:
        raise DomainError(f"log argument |k - gamma| / k = {ratio} is not positive")
    q = gamma / k
    # log1p keeps the limit 1/k as gamma -> 0 with gamma < k
    log_ratio = math.log1p(-q) if 0 < q < 1 else math.log(ratio)
    return -log_ratio / gamma


def tau1_star(params: ModelParams, tau: float) -> float:
    """tau_cr evaluated on the tau1 = 0 reduction at second delay ``tau``."""
    sys = reduce_case1(params.with_tau(tau))
    return tau_cr(sys.a, sys.b, sys.alpha)


def k_star(alpha: float, gamma: float, tau: float) -> KStar:
    """Gain above which the tau1 = 1 characteristic function has a positive real root."""
    if tau <= 0:
        raise DomainError("k_star needs tau > 0")
    if alpha <= 0:
        raise DomainError("k_star needs alpha > 0")
    if gamma >= 0:
        raise DomainError("k_star is defined for gamma < 0")
    lam = math.log1p(tau) / tau - gamma
    scale = (1.0 + tau) ** (1.0 + 1.0 / tau) / (tau * math.exp(gamma))
    value = scale * (lam**alpha + gamma)
    notes = []
    for (a, g, t), published in PUBLISHED_K_STAR.items():
        if math.isclose(alpha, a) and math.isclose(gamma, g) and math.isclose(tau, t):
            notes.append(f"published value {published} is not reproduced by the closed form ({value:.6g})")
    if value <= 0:
        notes.append("k_star <= 0: lambda_star^alpha + gamma <= 0, so R has no positive local maximum there")
    return KStar(value, lam, "; ".join(notes))


def tangency_split(alpha: float, gamma: float, k: float, tau: float) -> tuple[Callable, Callable]:
    """L(lam) = lam^alpha + gamma and R(lam) = k e^-lam (1 - e^-(lam+gamma) tau), so F = L - R."""

    def left(lam):
        return np.power(lam, alpha) + gamma

    def right(lam):
        return k * np.exp(-lam) * (1.0 - np.exp(-(lam + gamma) * tau))

    return left, right


def _unknown(note: str, critical=()) -> StabilityVerdict:
    return StabilityVerdict(Status.UNKNOWN, clause="none", critical_values=tuple(critical), note=note)


def _compare_hopf(tau: float, tcr: float) -> Status:
    if math.isclose(tau, tcr, rel_tol=CRITICAL_RTOL):
        return Status.BIFURCATION
    return Status.STABLE if tau < tcr else Status.UNSTABLE


def classify_single_delay(sys: LinearSingleDelay) -> StabilityVerdict:
    a, b, tau = sys.a, sys.b, sys.tau
    if b < -abs(a):
        try:
            tcr = tau_cr(a, b, sys.alpha)
        except DomainError as exc:
            return _unknown(f"tau_cr undefined: {exc}")
        return StabilityVerdict(
            _compare_hopf(tau, tcr), False, "Thm2.1(1)", (("tau_cr", tcr),)
        )
    if b > -a:
        return StabilityVerdict(Status.UNSTABLE, True, "Thm2.1(2)")
    if a < 0 and a < b < -a:
        return StabilityVerdict(Status.STABLE, True, "Thm2.1(3)")
    return _unknown(f"(a, b) = ({a}, {b}) lies on a region boundary")


def classify_case1(params: ModelParams) -> StabilityVerdict:
    """Verdict for tau1 = 0 in the (k, gamma) plane at second delay tau2."""
    if params.tau1 != 0.0:
        raise PreconditionError(f"classify_case1 needs tau1 = 0, got {params.tau1}")
    k, gamma, tau = params.k, params.gamma, params.tau2

    if k < 0 and gamma < 0:
        if gamma < k:
            return StabilityVerdict(Status.UNSTABLE, True, "Thm4.1(a)(i)")
        if k < gamma:
            return StabilityVerdict(Status.UNSTABLE, True, "Thm4.1(a)(ii)")
        return _unknown("k = gamma is not covered by a strict clause")
    if gamma > 2 * k > 0:
        return StabilityVerdict(Status.STABLE, True, "Thm4.1(b)(i)")
    if gamma > 0 and k < 0:
        return StabilityVerdict(Status.STABLE, True, "Thm4.1(b)(ii)")

    if 0 < gamma < 2 * k:
        if k == gamma:
            return _unknown("tau2_star is undefined for k = gamma")
        t2 = tau2_star(k, gamma)
        crit = [("tau2_star", t2)]
        if tau > t2 and not math.isclose(tau, t2, rel_tol=CRITICAL_RTOL):
            if gamma < k:
                return StabilityVerdict(Status.UNSTABLE, False, "Thm4.1(c)(i)", tuple(crit),
                                        "tau > tau2_star with 0 < gamma < k")
            return StabilityVerdict(Status.STABLE, False, "Thm4.1(c)(i)", tuple(crit),
                                    "tau > tau2_star with k < gamma < 2k")
        if tau < t2 and not math.isclose(tau, t2, rel_tol=CRITICAL_RTOL):
            try:
                t1 = tau1_star(params, tau)
            except DomainError as exc:
                return _unknown(f"tau1_star undefined: {exc}", crit)
            crit.append(("tau1_star", t1))
            return StabilityVerdict(_compare_hopf(tau, t1), False, "Thm4.1(c)(i)", tuple(crit),
                                    "tau < tau2_star, compared with tau1_star(tau)")
        return _unknown("tau = tau2_star", crit)

    if k > 0 and gamma < 0:
        t2 = tau2_star(k, gamma)
        crit = [("tau2_star", t2)]
        if math.isclose(tau, t2, rel_tol=CRITICAL_RTOL):
            return _unknown("tau = tau2_star", crit)
        if tau < t2:
            return StabilityVerdict(Status.UNSTABLE, False, "Thm4.1(c)(ii)", tuple(crit),
                                    "tau < tau2_star")
        try:
            t1 = tau1_star(params, tau)
        except DomainError as exc:
            return _unknown(f"tau1_star undefined: {exc}", crit)
        crit.append(("tau1_star", t1))
        return StabilityVerdict(_compare_hopf(tau, t1), False, "Thm4.1(c)(ii)", tuple(crit),
                                "tau > tau2_star, compared with tau1_star(tau)")

    return _unknown(f"(k, gamma) = ({k}, {gamma}) lies on a region boundary")


def classify_case2(params: ModelParams) -> StabilityVerdict:
    """Verdict for tau1 = 1 in the (k, gamma) plane at second delay tau2."""
    if params.tau1 != 1.0:
        raise PreconditionError(f"classify_case2 needs tau1 = 1, got {params.tau1}")
    k, gamma, tau, alpha = params.k, params.gamma, params.tau2, params.alpha

    if gamma > 2 * k > 0:
        return StabilityVerdict(Status.STABLE, True, "Thm5.1(a)(i)")
    if gamma > -2 * k > 0:
        return StabilityVerdict(Status.STABLE, True, "Thm5.1(a)(ii)")
    if k < 0 and gamma < 0:
        return StabilityVerdict(Status.UNSTABLE, True, "Thm5.1(b)(i)")
    if k > 0 and gamma < 0:
        if alpha == 1.0:
            return StabilityVerdict(Status.UNSTABLE, True, "Thm5.1(b)(ii)")
        if tau > 0:
            ks = k_star(alpha, gamma, tau)
            crit = (("k_star", ks.value), ("lambda_star", ks.lambda_star))
            if k > ks.value:
                return StabilityVerdict(Status.UNSTABLE, False, "Thm5.2", crit, "k > k_star")
            return _unknown("fourth quadrant with k <= k_star", crit)
        return _unknown("fourth quadrant at tau = 0")
    return _unknown(f"(k, gamma) = ({k}, {gamma}) is outside every proven region")


def classify(params: ModelParams) -> StabilityVerdict:
    """Dispatch on tau1 after linearizing."""
    lin = linearize(params)
    if lin.tau1 == 0.0:
        return classify_case1(lin)
    if lin.tau1 == 1.0:
        return classify_case2(lin)
    return _unknown(f"no closed-form result for tau1 = {lin.tau1}")


def critical_values(params: ModelParams) -> CriticalValues:
    """Every critical value that is defined for ``params``; the rest stay None."""
    lin = linearize(params)
    k, gamma, tau, alpha = lin.k, lin.gamma, lin.tau2, lin.alpha
    out: dict[str, float] = {}
    if lin.tau1 == 0.0:
        sys = reduce_case1(lin)
        try:
            out["tau_cr"] = tau_cr(sys.a, sys.b, alpha)
            out["tau1_star"] = out["tau_cr"]
        except DomainError:
            pass
        try:
            out["tau2_star"] = tau2_star(k, gamma)
        except DomainError:
            pass
    if gamma < 0 and tau > 0:
        ks = k_star(alpha, gamma, tau)
        out["k_star"] = ks.value
        out["lambda_star"] = ks.lambda_star
    return CriticalValues(**out)
