"""Acceptance criteria, each at its stated tolerance.

Every test records a single PASS/FAIL line that is printed in the pytest
terminal summary under "acceptance criteria".
"""

from __future__ import annotations

import math
import os
import time

import numpy as np
import pytest

from fdde_stability import (
    CharFn,
    LinearSingleDelay,
    ModelParams,
    Nonlinearity,
    SolverConfig,
    k_star,
    reduce_case1,
    solve,
    solve_linear_single,
    tau1_star,
    tau2_star,
    tau_cr,
)
from fdde_stability.cli import main as cli_main
from fdde_stability.fixtures import FIXTURES, run_all
from fdde_stability.io import read_region_csv
from fdde_stability.sweep import Case, Source, SweepSpec, sweep

from oracles import mittag_leffler, mittag_leffler_half, rk4_dde


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def test_criterion_1_critical_values(record_criterion):
    failures = []
    for (k, g), want in [((1.5, 1.8), 0.8941), ((3.4, 2.2), 0.4733), ((3.0, -5.0), 0.1962)]:
        got, dt = _timed(tau2_star, k, g)
        if abs(got - want) > 5e-4 or dt > 1.0:
            failures.append(f"tau2_star({k}, {g}) = {got:.6g} in {dt:.2g}s")
    cases = [
        (ModelParams(0.4, 1.8, 1.5), 0.3, 9.2161, 0.01),
        (ModelParams(0.7, 2.2, 3.4), 0.2, 0.4244, 5e-4),
        (ModelParams(0.8, -5.0, 3.0), 0.35, 0.038614, 1e-4),
    ]
    for params, tau, want, tol in cases:
        got, dt = _timed(tau1_star, params, tau)
        if abs(got - want) > tol or dt > 1.0:
            failures.append(f"tau1_star(tau={tau}) = {got:.6g} in {dt:.2g}s")
    record_criterion(1, not failures, "; ".join(failures) or "3 tau2_star and 3 tau1_star values within tolerance")
    assert not failures


def _v_star(a: float, b: float, alpha: float) -> float:
    th = alpha * math.pi / 2
    return (a * math.cos(th) + math.sqrt(b * b - (a * math.sin(th)) ** 2)) ** (1.0 / alpha)


def test_criterion_2_crossing_residual(record_criterion):
    worst = 0.0
    systems = [
        (ModelParams(0.4, 1.8, 1.5), 0.3),
        (ModelParams(0.7, 2.2, 3.4), 0.2),
        (ModelParams(0.8, -5.0, 3.0), 0.35),
    ]
    singles = [reduce_case1(p.with_tau(tau)) for p, tau in systems]
    singles += [LinearSingleDelay(0.6, -1.0, -3.0), LinearSingleDelay(0.9, 2.0, -5.0)]
    for s in singles:
        tc = tau_cr(s.a, s.b, s.alpha)
        v = _v_star(s.a, s.b, s.alpha)
        cf = CharFn.single_delay(LinearSingleDelay(s.alpha, s.a, s.b, tc))
        worst = max(worst, abs(cf(1j * v)))
    ok = worst < 1e-6
    record_criterion(2, ok, f"max |F(i v*)| = {worst:.2e} over {len(singles)} critical delays")
    assert ok


def test_criterion_3_k_star_tangency(record_criterion):
    # R''(lambda*) = -k* tau exp(-lambda*), so a local maximum (the tangency of
    # the proof) exists only for k* > 0; draws with k* <= 0 are redrawn and counted.
    rng = np.random.default_rng(20240611)
    worst_f = worst_d1 = 0.0
    max_d2 = -math.inf
    accepted = redrawn = 0
    while accepted < 100:
        alpha = rng.uniform(0.1, 1.0)
        gamma = -rng.uniform(0.05, 5.0)
        tau = rng.uniform(0.05, 5.0)
        ks = k_star(alpha, gamma, tau)
        if ks.value <= 0:
            redrawn += 1
            continue
        accepted += 1
        lam = ks.lambda_star
        cf = CharFn(alpha, gamma, ks.value, 1.0, tau)

        def R(x, k=ks.value, g=gamma, t=tau):
            return k * math.exp(-x) * (1.0 - math.exp(-(x + g) * t))

        h = 1e-6
        d1 = (R(lam + h) - R(lam - h)) / (2 * h)
        d2 = (R(lam + h) - 2 * R(lam) + R(lam - h)) / h**2
        worst_f = max(worst_f, abs(cf(lam)))
        worst_d1 = max(worst_d1, abs(d1))
        max_d2 = max(max_d2, d2)
    ok = worst_f < 1e-9 and worst_d1 < 1e-6 and max_d2 < 0
    record_criterion(
        3, ok,
        f"100 triples with k* > 0 ({redrawn} draws with k* <= 0 redrawn): max |F| = {worst_f:.1e}, "
        f"max |R'| = {worst_d1:.1e}, max R'' = {max_d2:.3g}",
    )
    assert ok


def test_criterion_4_fixture_suite(record_criterion):
    t0 = time.perf_counter()
    results = run_all(include_variants=False, simulate=True)
    elapsed = time.perf_counter() - t0
    bad = [
        r.fixture.id for r in results
        if r.theorem is not r.fixture.expected or r.simulation is not r.fixture.expected
    ]
    ok = len(results) == 13 and not bad and elapsed < 300
    record_criterion(4, ok, f"{13 - len(bad)}/13 fixtures agree (theorem and simulation) in {elapsed:.1f}s")
    assert {r.fixture.id for r in results} == {f.id for f in FIXTURES}
    assert ok, bad


@pytest.mark.slow
def test_criterion_5_tri_source_sweep(record_criterion):
    workers = max(1, os.cpu_count() or 1)
    t0 = time.perf_counter()
    tr = sim = cells = boundary_only = 0
    details = []
    for case in (Case.CASE1, Case.CASE2):
        for alpha in (0.4, 0.7, 1.0):
            for tau in (0.1, 1.0, 5.0):
                region = sweep(SweepSpec((-10, 10, 21), (-10, 10, 21), alpha, tau, case), workers=workers)
                cells += len(region.cells)
                c_tr = region.conflicts(Source.THEOREM, Source.ROOTS)
                c_sim = [
                    c for c in region.cells
                    if not c.boundary and (
                        c.conflict(Source.THEOREM, Source.SIMULATION)
                        or c.conflict(Source.ROOTS, Source.SIMULATION)
                    )
                ]
                boundary_only += sum(
                    1 for c in region.cells
                    if c.boundary and c.conflict(Source.THEOREM, Source.SIMULATION)
                )
                tr += len(c_tr)
                sim += len(c_sim)
                for c in (c_tr + c_sim)[:3]:
                    details.append(f"{case.value} a={alpha} tau={tau} k={c.k} g={c.gamma}")
    elapsed = time.perf_counter() - t0
    ok = tr == 0 and sim == 0 and elapsed < 1800
    msg = (
        f"{cells} cells: theorem/roots conflicts {tr}, off-boundary simulation conflicts {sim}, "
        f"boundary-flagged simulation disagreements {boundary_only}, {elapsed:.0f}s"
    )
    record_criterion(5, ok, msg + ("; " + ", ".join(details) if details else ""))
    assert ok, msg


def test_criterion_6_solver_oracles(record_criterion):
    # Mittag-Leffler: D^0.5 x = -x, x(0) = 1, so x = E_0.5(-sqrt t)
    traj = solve_linear_single(
        LinearSingleDelay(0.5, -1.0, 0.0, 0.0), SolverConfig(1e-3, 2.0, history=1.0)
    )
    t = traj.times[1:]
    exact = np.array([mittag_leffler_half(-math.sqrt(s)) for s in t])
    series = np.array([mittag_leffler(0.5, -math.sqrt(s)) for s in t[::200]])
    assert np.allclose(series, exact[::200], rtol=1e-10)
    ml_err = float(np.max(np.abs(traj.values[1:] - exact) / np.abs(exact)))

    sets = [
        ModelParams(1.0, 10.0, 4.0, 0.0, 0.8),
        ModelParams(1.0, 8.5, 2.5, 1.0, 0.6),
        ModelParams(1.0, 2.0, -0.8, 1.0, 1.6, Nonlinearity.SINE),
    ]
    rk_err = 0.0
    for p in sets:
        h = 1e-3
        g = p.nonlinear_fn()
        e2 = math.exp(-p.gamma * p.tau2)

        def rhs(x, d1, d2, g=g, e2=e2, gamma=p.gamma):
            return -gamma * x + g(d1) - e2 * g(d2)

        _, ref = rk4_dde(rhs, p.lags, 0.1, h, 10.0)
        ours = solve(p, SolverConfig(h, 10.0, history=0.1))
        rk_err = max(rk_err, abs(ours.values[-1] - ref[-1]))
    ok = ml_err < 1e-3 and rk_err < 1e-4
    record_criterion(6, ok, f"Mittag-Leffler max rel. error {ml_err:.1e}; RK4 max abs. error at t=10 {rk_err:.1e}")
    assert ok


def _cli_sweep(tmp_path, name: str, args: list[str]) -> list[dict]:
    out = tmp_path / f"{name}.csv"
    assert cli_main(["sweep", *args, "--sources", "theorem,roots", "--out", str(out)]) == 0
    return read_region_csv(out)


def _connected(points: set[tuple[int, int]]) -> bool:
    """8-connectivity; boundary lines rasterize to Unknown cells, so 4-connectivity would split regions."""
    if not points:
        return False
    todo = [next(iter(points))]
    seen = set(todo)
    while todo:
        i, j = todo.pop()
        for nb in ((i + di, j + dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)):
            if nb in points and nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return seen == points


def test_criterion_7_region_topology(tmp_path, record_criterion):
    failures = []

    # single-delay (a, b) plane: one connected stable region inside b < -a
    rows = _cli_sweep(tmp_path, "single_map", [
        "--case", "single", "--alpha", "0.5", "--tau", "0.3",
        "--k-range=-4,4,17", "--gamma-range=-4,4,17",
    ])
    idx = {v: i for i, v in enumerate(sorted({r["k"] for r in rows}))}
    stable = {(idx[r["k"]], idx[r["gamma"]]) for r in rows if r["verdict_theorem"] == "Stable"}
    if not _connected(stable):
        failures.append("single_map: stable cells not one connected region")
    for r in rows:
        a, b = r["k"], r["gamma"]
        if b > -a and r["verdict_theorem"] != "Unstable":
            failures.append(f"single_map: ({a}, {b}) above b = -a not Unstable")
        if a < 0 and a < b < -a and r["verdict_theorem"] != "Stable":
            failures.append(f"single_map: ({a}, {b}) in the delay-independent wedge not Stable")
        if r["verdict_theorem"] == "Stable" and not b < -a:
            failures.append(f"single_map: stable cell ({a}, {b}) outside b < -a")
        if r["verdict_roots"] in ("Stable", "Unstable") and r["verdict_theorem"] in ("Stable", "Unstable") \
                and r["verdict_roots"] != r["verdict_theorem"]:
            failures.append(f"single_map: roots disagree at ({a}, {b})")

    # tau1 = 0 plane
    rows = _cli_sweep(tmp_path, "case1_map", [
        "--case", "1", "--alpha", "0.5", "--tau", "0.5",
        "--k-range=-5,5,11", "--gamma-range=-5,5,11",
    ])
    for r in rows:
        k, g, v = r["k"], r["gamma"], r["verdict_theorem"]
        if k < 0 and g < 0 and k != g and v != "Unstable":
            failures.append(f"case1_map: third-quadrant cell ({k}, {g}) is {v}")
        if (g > 2 * k > 0 or (g > 0 > k)) and v != "Stable":
            failures.append(f"case1_map: stable region cell ({k}, {g}) is {v}")

    # tau1 = 1 plane
    rows = _cli_sweep(tmp_path, "case2_map", [
        "--case", "2", "--alpha", "0.5", "--tau", "0.5",
        "--k-range=-5,5,11", "--gamma-range=-5,5,11",
    ])
    for r in rows:
        k, g, v = r["k"], r["gamma"], r["verdict_theorem"]
        if g > 2 * abs(k) and k != 0 and v != "Stable":
            failures.append(f"case2_map: wedge cell ({k}, {g}) is {v}")
        if k < 0 and g < 0 and v != "Unstable":
            failures.append(f"case2_map: third-quadrant cell ({k}, {g}) is {v}")
        if r["verdict_roots"] == "Stable" and v == "Unstable" or r["verdict_roots"] == "Unstable" and v == "Stable":
            failures.append(f"case2_map: roots disagree at ({k}, {g})")
    ok = not failures
    record_criterion(7, ok, "; ".join(failures[:5]) or "single-delay, tau1 = 0 and tau1 = 1 map topology holds")
    assert ok, failures
