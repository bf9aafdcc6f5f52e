from __future__ import annotations

import cmath
import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from fdde_stability import (
    BranchPointError,
    CharFn,
    LinearSingleDelay,
    ModelParams,
    Status,
    classify,
    classify_single_delay,
    count_rhp_roots,
    find_imaginary_crossing,
    find_positive_real_root,
    tau_cr,
    verdict_from_roots,
)
from fdde_stability.theorems import hopf_frequency


def test_branch_point_rejected_for_fractional_order():
    with pytest.raises(BranchPointError):
        CharFn(0.5, 1.0, 1.0, 0.0, 0.5)(0.0)
    assert CharFn(1.0, 1.0, 1.0, 0.0, 0.5)(0.0) == pytest.approx(1.0 - 1.0 + math.exp(-0.5))


def test_real_input_gives_real_output():
    val = CharFn(0.7, 2.0, 1.0, 1.0, 0.5)(1.3)
    assert isinstance(val, float)


def test_evaluation_matches_formula():
    cf = CharFn(0.6, 1.5, -2.0, 1.0, 0.7)
    lam = 0.3 + 1.1j
    want = lam**0.6 + 1.5 + 2.0 * cmath.exp(-lam) - 2.0 * math.exp(-1.05) * cmath.exp(-1.7 * lam)
    assert cf(lam) == pytest.approx(want, rel=1e-13)


def test_known_real_root():
    # alpha = 1, gamma = -2, k = 1, tau1 = 1, tau2 = 0.5: F(2) = 2 - 2 - e^-2 + e^1 e^-3 = 0
    root = find_positive_real_root(CharFn(1.0, -2.0, 1.0, 1.0, 0.5))
    assert root == pytest.approx(2.0, abs=1e-10)


def test_example_third_quadrant_real_root():
    root = find_positive_real_root(CharFn.from_params(ModelParams(0.8, -7.0, -4.0, 1.0, 0.08)))
    assert root == pytest.approx(11.386, abs=1e-3)


def test_no_real_root_in_stable_wedge():
    assert find_positive_real_root(CharFn(0.9, 8.5, 2.5, 1.0, 0.6)) is None


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 1.0), st.floats(-8, 8), st.floats(0.5, 8))
def test_crossing_found_at_hopf_delay(alpha, a, excess):
    b = -abs(a) - excess
    tc = tau_cr(a, b, alpha)
    v = hopf_frequency(a, b, alpha)
    assume(v < 90)
    cf = CharFn.single_delay(LinearSingleDelay(alpha, a, b, tc))
    found = find_imaginary_crossing(cf)
    assert any(abs(p.v - v) < 1e-6 * max(1.0, v) for p in found)
    assert all(p.residual_norm < 1e-9 for p in found)


def test_rhp_count_for_undelayed_equation():
    # F = lam + gamma with gamma = -1 has the single root lam = 1
    assert count_rhp_roots(CharFn(1.0, -1.0, 0.0, 0.0, 0.0), 5.0) == 1
    assert count_rhp_roots(CharFn(1.0, 1.0, 0.0, 0.0, 0.0), 5.0) == 0


def test_rhp_count_for_delayed_pair():
    # lam^alpha = a + b e^{-lam tau} past tau_cr has exactly one conjugate pair in the RHP
    tc = tau_cr(-1.0, -3.0, 0.6)
    cf = CharFn.single_delay(LinearSingleDelay(0.6, -1.0, -3.0, 1.2 * tc))
    assert count_rhp_roots(cf, 1.05 * cf.modulus_bound() + 1) == 2


def test_hopf_point_reported_as_bifurcation():
    tc = tau_cr(-1.0, -3.0, 0.6)
    v = verdict_from_roots(CharFn.single_delay(LinearSingleDelay(0.6, -1.0, -3.0, tc)))
    assert v.status is Status.BIFURCATION


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 1.0), st.floats(-10, 10), st.floats(-10, 10), st.floats(0.05, 3), st.sampled_from([0.0, 1.0]))
def test_roots_never_oppose_theorems(alpha, k, gamma, tau, tau1):
    params = ModelParams(alpha, gamma, k, tau1, tau)
    thm = classify(params)
    assume(thm.status in (Status.STABLE, Status.UNSTABLE))
    assert not verdict_from_roots(CharFn.from_params(params)).status.opposes(thm.status)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 1.0), st.floats(-10, 10), st.floats(-10, 10), st.floats(0.0, 3))
def test_single_delay_roots_match_theorem(alpha, a, b, tau):
    sys = LinearSingleDelay(alpha, a, b, tau)
    thm = classify_single_delay(sys)
    assume(thm.status in (Status.STABLE, Status.UNSTABLE))
    tc = thm.critical("tau_cr")
    assume(tc is None or abs(tau - tc) > 1e-3 * tc)
    v = verdict_from_roots(CharFn.single_delay(sys))
    # the contour radius is capped, so a huge modulus bound may leave the roots undecided
    assert v.status is thm.status or v.clause == "roots:radius-capped"


def test_modulus_bound_covers_roots():
    cf = CharFn(1.0, -2.0, 1.0, 1.0, 0.5)
    assert cf.modulus_bound() >= 2.0
