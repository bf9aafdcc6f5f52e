"""Parameter and result types shared by every module.

The model is the scalar Caputo FDDE with two discrete delays

    D^alpha x(t) = -gamma x(t) + g(x(t - tau1)) - exp(-gamma tau2) g(x(t - tau1 - tau2))

whose linearization about x = 0 (with k = g'(0)) is

    D^alpha x(t) = -gamma x(t) + k x(t - tau1) - k exp(-gamma tau2) x(t - tau1 - tau2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import PreconditionError

#: Step used for central-difference derivative checks of custom nonlinearities.
FD_STEP = 1e-6
#: Relative tolerance for the declared-derivative check.
FD_RTOL = 1e-6


class Nonlinearity(str, enum.Enum):
    LINEAR = "linear"
    SINE = "sine"
    CUSTOM = "custom"


class Status(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    BIFURCATION = "Bifurcation"
    UNKNOWN = "Unknown"

    def opposes(self, other: "Status") -> bool:
        """True when one verdict is Stable and the other Unstable."""
        return {self, other} == {Status.STABLE, Status.UNSTABLE}


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"fractional order must satisfy 0 < alpha <= 1, got {alpha}")


def central_difference(g: Callable[[float], float], x: float = 0.0, step: float = FD_STEP) -> float:
    return (g(x + step) - g(x - step)) / (2.0 * step)


@dataclass(frozen=True)
class ModelParams:
    """Full nonlinear model.

    ``k`` is always g'(0). For ``Nonlinearity.CUSTOM`` the callable ``g`` must be
    supplied and ``k`` is the user-declared derivative at zero, checked against a
    central difference at construction.
    """

    alpha: float
    gamma: float
    k: float
    tau1: float = 0.0
    tau2: float = 0.0
    nonlinearity: Nonlinearity = Nonlinearity.LINEAR
    g: Callable[[float], float] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if self.tau1 < 0 or self.tau2 < 0:
            raise ValueError(f"delays must be nonnegative, got tau1={self.tau1}, tau2={self.tau2}")
        for name in ("alpha", "gamma", "k", "tau1", "tau2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        nl = Nonlinearity(self.nonlinearity)
        object.__setattr__(self, "nonlinearity", nl)
        if nl is Nonlinearity.CUSTOM:
            if self.g is None:
                raise ValueError("custom nonlinearity requires a callable g")
            fd = central_difference(self.g)
            if abs(fd - self.k) > FD_RTOL * max(abs(self.k), 1.0):
                raise ValueError(
                    f"declared g'(0) = {self.k} disagrees with finite difference {fd:.12g}"
                )
        elif self.g is not None:
            raise ValueError("g may only be given with Nonlinearity.CUSTOM")

    @property
    def lags(self) -> tuple[float, float]:
        """The two delays actually seen by the state: tau1 and tau1 + tau2."""
        return (self.tau1, self.tau1 + self.tau2)

    @property
    def delayed_gain(self) -> float:
        """Coefficient k exp(-gamma tau2) of the longest-delayed term."""
        return self.k * math.exp(-self.gamma * self.tau2)

    def nonlinear_fn(self) -> Callable:
        if self.nonlinearity is Nonlinearity.LINEAR:
            k = self.k
            return lambda x: k * x
        if self.nonlinearity is Nonlinearity.SINE:
            k = self.k
            return lambda x: k * math.sin(x)
        return self.g

    def nonlinear_derivative(self) -> Callable:
        """g'(x); central differences for a custom g."""
        k = self.k
        if self.nonlinearity is Nonlinearity.LINEAR:
            return lambda x: k
        if self.nonlinearity is Nonlinearity.SINE:
            return lambda x: k * math.cos(x)
        g = self.g
        return lambda x: central_difference(g, x)

    def with_tau(self, tau: float) -> "ModelParams":
        """Copy with the second delay replaced."""
        return replace(self, tau2=tau)


@dataclass(frozen=True)
class LinearSingleDelay:
    """D^alpha x(t) = a x(t) + b x(t - tau)."""

    alpha: float
    a: float
    b: float
    tau: float = 0.0

    def __post_init__(self) -> None:
        _check_alpha(self.alpha)
        if self.tau < 0:
            raise ValueError(f"delay must be nonnegative, got {self.tau}")


@dataclass(frozen=True)
class StabilityVerdict:
    status: Status
    delay_independent: bool = False
    clause: str = ""
    critical_values: tuple[tuple[str, float], ...] = ()
    note: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "status", Status(self.status))
        if self.status is Status.UNKNOWN and "Thm" in self.clause:
            raise ValueError("an Unknown verdict must not cite a theorem clause")
        for name, value in self.critical_values:
            if not math.isfinite(value):
                raise ValueError(f"critical value {name} is not finite")

    def critical(self, name: str) -> float | None:
        for key, value in self.critical_values:
            if key == name:
                return value
        return None


@dataclass(frozen=True)
class Trajectory:
    """Samples x(t0 + n h), n = 0..len(values)-1."""

    t0: float
    h: float
    values: np.ndarray
    history_fn_id: str
    max_delay: float = 0.0
    diverged: bool = False

    def __post_init__(self) -> None:
        if self.h <= 0:
            raise ValueError("step size must be positive")
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("values must be a nonempty 1-D sequence")
        if not self.diverged and not np.all(np.isfinite(values)):
            raise ValueError("non-finite samples in a trajectory not flagged as diverged")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.values.size)

    @property
    def t_final(self) -> float:
        return self.t0 + self.h * (self.values.size - 1)


@dataclass(frozen=True)
class CrossingPoint:
    v: float
    residual_real: float
    residual_imag: float

    @property
    def residual_norm(self) -> float:
        return math.hypot(self.residual_real, self.residual_imag)


def linearize(params: ModelParams) -> ModelParams:
    """Linearize about x* = 0; the result has ``Nonlinearity.LINEAR`` and gain g'(0)."""
    if params.nonlinearity is Nonlinearity.LINEAR:
        return params
    g0 = float(params.nonlinear_fn()(0.0))
    if abs(g0) > 1e-12:
        raise PreconditionError(f"g(0) = {g0} != 0, so x* = 0 is not an equilibrium")
    return replace(params, nonlinearity=Nonlinearity.LINEAR, g=None)


def reduce_case1(params: ModelParams) -> LinearSingleDelay:
    """Rewrite the tau1 = 0 linearization as a x(t) + b(tau) x(t - tau)."""
    if params.tau1 != 0.0:
        raise PreconditionError(f"reduce_case1 needs tau1 = 0, got {params.tau1}")
    k, gamma, tau = params.k, params.gamma, params.tau2
    return LinearSingleDelay(params.alpha, k - gamma, -k * math.exp(-gamma * tau), tau)
