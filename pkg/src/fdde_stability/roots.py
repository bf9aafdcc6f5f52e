"""Root analysis of the characteristic function on the principal sheet.

    F(lam) = lam^alpha + gamma - k exp(-lam tau1) + k exp(-gamma tau2) exp(-lam (tau1 + tau2))

A root with Re(lam) > 0 means the zero equilibrium is unstable. The routines
here search the positive real axis, the imaginary axis, and count roots in the
right half-plane with the argument principle. None of them consult the
closed-form classifiers, so they serve as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BranchPointError, ContourRootError
from .model import CrossingPoint, LinearSingleDelay, ModelParams, StabilityVerdict, Status, linearize

REAL_GRID = 256
CROSSING_GRID = 4096
CROSSING_TOL = 1e-9
CONTOUR_MIN_ABS = 1e-8
INDENT_RADIUS = 1e-6
#: Largest contour radius attempted by ``verdict_from_roots``.
MAX_CONTOUR_RADIUS = 5e3
MAX_REFINE_ROUNDS = 40
#: Contour offset used once roots on the imaginary axis are known.
AXIS_SHIFT = 1e-7


@dataclass(frozen=True)
class CharFn:
    alpha: float
    gamma: float
    k: float
    tau1: float
    tau2: float
    #: Overrides k exp(-gamma tau2); 0 turns F into the single-delay form.
    gain2: float | None = None

    @classmethod
    def from_params(cls, params: ModelParams) -> "CharFn":
        lin = linearize(params)
        return cls(lin.alpha, lin.gamma, lin.k, lin.tau1, lin.tau2)

    @classmethod
    def single_delay(cls, sys: LinearSingleDelay) -> "CharFn":
        """F(lam) = lam^alpha - a - b exp(-lam tau)."""
        return cls(sys.alpha, -sys.a, sys.b, sys.tau, 0.0, gain2=0.0)

    @property
    def delayed_gain(self) -> float:
        if self.gain2 is not None:
            return self.gain2
        return self.k * math.exp(-self.gamma * self.tau2)

    def at_zero(self) -> float:
        """Limit of F(lam) as lam -> 0 along the positive reals."""
        if self.gain2 is None:
            # gamma + k (e^{-gamma tau2} - 1) without cancellation
            return self.gamma + self.k * math.expm1(-self.gamma * self.tau2)
        return self.gamma - self.k + self.gain2

    def eval(self, lam):
        """F(lam) on the principal branch. Real input > 0 gives a real result."""
        lam_arr = np.asarray(lam)
        if self.alpha != 1.0 and np.any(lam_arr == 0):
            raise BranchPointError("lam = 0 is a branch point for alpha < 1")
        total = self.tau1 + self.tau2
        if np.isrealobj(lam_arr):
            lam_arr = lam_arr.astype(float)
            with np.errstate(invalid="ignore"):
                power = np.power(lam_arr, self.alpha)
            if np.any(lam_arr < 0):
                neg = lam_arr < 0
                power = power.astype(complex)
                power[neg] = np.power(lam_arr[neg].astype(complex), self.alpha)
            else:
                # near 0+ the expm1 form keeps the sign when gamma - k + gain2 nearly cancels
                near = (
                    power
                    + self.at_zero()
                    - self.k * np.expm1(-lam_arr * self.tau1)
                    + self.delayed_gain * np.expm1(-lam_arr * total)
                )
                small = lam_arr * max(total, 1e-300) <= 1.0
                out = np.where(small, near, self._direct(lam_arr, power, total))
                return out[()] if out.ndim == 0 else out
        else:
            power = np.power(lam_arr, self.alpha)
        out = self._direct(lam_arr, power, total)
        return out[()] if out.ndim == 0 else out

    __call__ = eval

    def _direct(self, lam, power, total):
        return (
            power
            + self.gamma
            - self.k * np.exp(-lam * self.tau1)
            + self.delayed_gain * np.exp(-lam * total)
        )

    def modulus_bound(self) -> float:
        """Every root with Re(lam) >= 0 satisfies |lam| <= this value."""
        return (abs(self.gamma) + abs(self.k) + abs(self.delayed_gain)) ** (1.0 / self.alpha)

    def crossing_residuals(self, v):
        """Residuals of the real/imaginary parts of F(iv) = 0, for v > 0."""
        v = np.asarray(v, dtype=float)
        theta = self.alpha * math.pi / 2
        total = self.tau1 + self.tau2
        va = v**self.alpha
        g2 = self.delayed_gain
        re = va * math.cos(theta) + self.gamma - self.k * np.cos(v * self.tau1) + g2 * np.cos(v * total)
        im = va * math.sin(theta) + self.k * np.sin(v * self.tau1) - g2 * np.sin(v * total)
        return re, im


def evaluate(cf: CharFn, lam):
    return cf.eval(lam)


def find_positive_real_root(
    cf: CharFn, lambda_max: float | None = None, n_grid: int = REAL_GRID, xtol: float = 1e-12
) -> float | None:
    """Smallest positive real root of F on (0, lambda_max], or None.

    Sign changes on a log-spaced scan are refined with Brent's method. Interior
    local minima of the scan are also refined, so a pair of close roots (F
    grazing zero, as just above the tangency gain) is not stepped over.
    """
    if lambda_max is None:
        lambda_max = 1.01 * cf.modulus_bound() + 1.0
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    lo = min(1e-10, 1e-10 * lambda_max)
    n = max(n_grid, int(64 * math.log10(lambda_max / lo)))
    grid = np.geomspace(lo, lambda_max, n)
    vals = cf.eval(grid)
    # 0 stands for the limit lam -> 0+, so a root below the first node is bracketed
    zero_val = cf.at_zero()
    grid = np.concatenate([[0.0], grid])
    vals = np.concatenate([[zero_val], vals])

    def fn(x):
        return zero_val if x == 0.0 else float(cf.eval(x))

    exact = np.flatnonzero(vals[1:] == 0) + 1
    change = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    roots = [float(grid[i]) for i in exact]
    if change.size:
        i = change[0]
        roots.append(float(brentq(fn, grid[i], grid[i + 1], xtol=xtol, maxiter=2000)))
    limit = min(roots, default=math.inf)
    dips = np.flatnonzero((vals[1:-1] > 0) & (vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:])) + 1
    for i in dips:
        if grid[i - 1] >= limit:
            break
        x = _golden_min(fn, float(grid[i - 1]), float(grid[i + 1]))
        fx = fn(x)
        if fx <= 0:
            root = x if fx == 0 else brentq(fn, grid[i - 1], x, xtol=xtol, maxiter=2000)
            limit = min(limit, float(root))
            break
    if not math.isfinite(limit):
        return None
    return max(limit, np.nextafter(0.0, 1.0))


def _golden_min(fn, lo: float, hi: float, rtol: float = 1e-15) -> float:
    """Golden-section minimum of a unimodal ``fn`` on [lo, hi]."""
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - ratio * (hi - lo)
    d = lo + ratio * (hi - lo)
    fc, fd = fn(c), fn(d)
    for _ in range(300):
        if hi - lo <= rtol * max(1.0, abs(hi)):
            break
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - ratio * (hi - lo)
            fc = fn(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + ratio * (hi - lo)
            fd = fn(d)
    return c if fc <= fd else d


def find_imaginary_crossing(
    cf: CharFn, v_max: float = 100.0, n_grid: int = CROSSING_GRID, tol: float = CROSSING_TOL
) -> list[CrossingPoint]:
    """All v in (0, v_max] with F(iv) = 0 to within ``tol``."""
    if not v_max > 0:
        raise ValueError("v_max must be positive")
    # the log-spaced part resolves low crossing frequencies, which occur at small alpha
    v = np.union1d(np.linspace(v_max / n_grid, v_max, n_grid), np.geomspace(1e-8 * v_max, v_max, 512))
    re, im = cf.crossing_residuals(v)
    mod = np.hypot(re, im)

    def objective(s):
        r, i = cf.crossing_residuals(s)
        return float(np.hypot(r, i))

    candidates = np.flatnonzero((mod[1:-1] <= mod[:-2]) & (mod[1:-1] <= mod[2:])) + 1
    found: list[CrossingPoint] = []
    for i in candidates:
        vs = _golden_min(objective, float(v[i - 1]), float(v[i + 1]))
        r, m = cf.crossing_residuals(vs)
        pt = CrossingPoint(vs, float(r), float(m))
        if pt.residual_norm < tol and not any(abs(p.v - vs) <= 1e-9 * max(1.0, vs) for p in found):
            found.append(pt)
    return found


def _contour_pieces(radius: float, indent: float, total_delay: float):
    """Parametrized pieces of the indented D-contour, counterclockwise."""
    dy = min(0.25, math.pi / (8.0 * max(total_delay, 1e-3)))
    near = np.geomspace(indent, min(1.0, radius), 64)
    far = np.arange(1.0, radius, dy) if radius > 1.0 else np.empty(0)
    ys = np.unique(np.concatenate([near, far, [radius]]))
    n_arc = int(min(2e5, max(256, 8 * radius * max(total_delay, 1.0))))

    def arc(s):
        return radius * np.exp(1j * (-np.pi / 2 + np.pi * s))

    def axis_down(s):
        # s in [0, 1] runs i*radius -> i*indent
        return 1j * np.interp(s, np.linspace(0, 1, ys.size), ys[::-1])

    def bump(s):
        return indent * np.exp(1j * (np.pi / 2 - np.pi * s))

    def axis_down_lower(s):
        return -1j * np.interp(s, np.linspace(0, 1, ys.size), ys)

    return [
        (arc, np.linspace(0, 1, n_arc)),
        (axis_down, np.linspace(0, 1, ys.size)),
        (bump, np.linspace(0, 1, 64)),
        (axis_down_lower, np.linspace(0, 1, ys.size)),
    ]


def _winding(
    cf: CharFn, radius: float, indent: float, max_step: float, max_points: int, shift: float = 0.0
) -> tuple[float, float]:
    total_delay = cf.tau1 + cf.tau2
    increments = []
    min_abs = math.inf
    used = 0
    for path, s in _contour_pieces(radius, indent, total_delay):
        vals = cf.eval(path(s) + shift)
        for _ in range(MAX_REFINE_ROUNDS):
            d = np.angle(vals[1:] / vals[:-1])
            bad = np.flatnonzero(np.abs(d) > max_step)
            if bad.size == 0 or used + s.size > max_points:
                break
            mid = 0.5 * (s[bad] + s[bad + 1])
            s = np.insert(s, bad + 1, mid)
            vals = np.insert(vals, bad + 1, cf.eval(path(mid) + shift))
        d = np.angle(vals[1:] / vals[:-1])
        used += s.size
        min_abs = min(min_abs, float(np.min(np.abs(vals))))
        increments.append(d.sum())
    return float(sum(increments) / (2 * math.pi)), min_abs


def count_rhp_roots(
    cf: CharFn,
    contour_radius: float,
    indent: float = INDENT_RADIUS,
    max_step: float = 0.3,
    max_points: int = 4_000_000,
    shift: float = 0.0,
) -> int:
    """Roots (with multiplicity) of F inside {Re lam > shift, indent < |lam - shift| < radius}."""
    radius = float(contour_radius)
    for _ in range(5):
        wind, min_abs = _winding(cf, radius, indent, max_step, max_points, shift)
        if min_abs > CONTOUR_MIN_ABS and abs(wind - round(wind)) <= 0.01:
            return int(round(wind))
        radius *= 1.01
    raise ContourRootError(f"F vanishes on or near the contour (min |F| = {min_abs:.3g})")


def verdict_from_roots(
    cf: CharFn,
    v_max: float = 100.0,
    lambda_max: float | None = None,
    max_radius: float = MAX_CONTOUR_RADIUS,
) -> StabilityVerdict:
    """Stable iff no right-half-plane root; every step is numerical."""
    root = find_positive_real_root(cf, lambda_max)
    if root is not None:
        return StabilityVerdict(Status.UNSTABLE, clause="roots:positive-real-root",
                                note=f"real root {root:.6g}")
    crossings = find_imaginary_crossing(cf, v_max)
    bound = 1.05 * cf.modulus_bound() + 1.0
    radius = min(bound, max_radius)
    try:
        count = count_rhp_roots(cf, radius, shift=AXIS_SHIFT if crossings else 0.0)
    except ContourRootError:
        if crossings:
            return StabilityVerdict(Status.BIFURCATION, clause="roots:imaginary-crossing",
                                    note=f"root on the imaginary axis at v = {crossings[0].v:.6g}")
        return StabilityVerdict(Status.UNKNOWN, clause="roots:contour-failed")
    if count > 0:
        return StabilityVerdict(Status.UNSTABLE, clause="roots:argument-principle",
                                note=f"{count} root(s) with |lam| < {radius:.4g}")
    if crossings:
        return StabilityVerdict(Status.BIFURCATION, clause="roots:imaginary-crossing",
                                note=f"root on the imaginary axis at v = {crossings[0].v:.6g}")
    if radius < bound:
        return StabilityVerdict(Status.UNKNOWN, clause="roots:radius-capped",
                                note=f"no root with |lam| < {radius:.4g}; bound is {bound:.4g}")
    return StabilityVerdict(Status.STABLE, clause="roots:argument-principle", note="0 roots")
