"""Worked examples with their published verdicts, used as regression fixtures."""

from __future__ import annotations

from dataclasses import dataclass

from .model import ModelParams, Nonlinearity, Status
from .roots import CharFn, verdict_from_roots
from .solver import confirmed_verdict, solve
from .sweep import default_solver_config
from .theorems import PUBLISHED_K_STAR, classify

S, U = Status.STABLE, Status.UNSTABLE
LIN, SIN = Nonlinearity.LINEAR, Nonlinearity.SINE


@dataclass(frozen=True)
class Fixture:
    id: str
    alpha: float
    k: float
    gamma: float
    tau1: float
    tau2: float
    nonlinearity: Nonlinearity
    expected: Status
    clause: str
    note: str = ""

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.alpha, self.gamma, self.k, self.tau1, self.tau2, self.nonlinearity)


FIXTURES: tuple[Fixture, ...] = (
    Fixture("4.1", 0.4, -0.1, -0.2, 0.0, 1.5, LIN, U, "Thm4.1(a)(i)"),
    Fixture("4.2", 0.6, 4.0, 10.0, 0.0, 0.8, LIN, S, "Thm4.1(b)(i)"),
    Fixture("4.3", 0.5, -5.0, 3.0, 0.0, 0.5, LIN, S, "Thm4.1(b)(ii)"),
    Fixture("4.4", 0.4, 1.5, 1.8, 0.0, 1.2, LIN, S, "Thm4.1(c)(i)", "tau2_star = 0.8941"),
    Fixture("4.5", 0.7, 3.4, 2.2, 0.0, 0.6, LIN, U, "Thm4.1(c)(i)", "tau2_star = 0.4733"),
    Fixture("4.6", 0.8, 3.0, -5.0, 0.0, 0.08, LIN, U, "Thm4.1(c)(ii)", "tau2_star = 0.1962"),
    Fixture("5.1.1", 0.9, 2.5, 8.5, 1.0, 0.6, LIN, S, "Thm5.1(a)(i)"),
    Fixture("5.1.2", 0.7, -3.0, 7.5, 1.0, 0.4, LIN, S, "Thm5.1(a)(ii)"),
    Fixture("5.1.3", 0.8, -4.0, -7.0, 1.0, 0.08, LIN, U, "Thm5.1(b)(i)"),
    Fixture(
        "5.1.4", 0.8, 6.0, -0.4, 1.0, 1.6, LIN, U, "Thm5.2",
        "published k_star = 5.675449; the closed form evaluates to 2.633012",
    ),
    Fixture("5.2.1", 0.35, 2.4, 6.0, 1.0, 0.55, SIN, S, "Thm5.1(a)(i)"),
    Fixture("5.2.2", 0.65, -0.8, 2.0, 1.0, 1.6, SIN, S, "Thm5.1(a)(ii)"),
    Fixture("5.2.3", 0.88, -3.5, -5.7, 1.0, 0.85, SIN, U, "Thm5.1(b)(i)"),
)

#: Second parameter points discussed alongside examples 4.4 - 4.6.
VARIANTS: tuple[Fixture, ...] = (
    Fixture("4.4b", 0.4, 1.5, 1.8, 0.0, 0.3, LIN, S, "Thm4.1(c)(i)", "tau1_star = 9.2161"),
    Fixture("4.5b", 0.7, 3.4, 2.2, 0.0, 0.2, LIN, S, "Thm4.1(c)(i)", "tau1_star = 0.4244"),
    Fixture("4.6b", 0.8, 3.0, -5.0, 0.0, 0.35, LIN, U, "Thm4.1(c)(ii)", "tau1_star = 0.038614"),
)

#: Published value for fixture 5.1.4; not reproducible from the k_star formula.
PUBLISHED_K_STAR_5_1_4 = PUBLISHED_K_STAR[(0.8, -0.4, 1.6)]


@dataclass(frozen=True)
class FixtureResult:
    fixture: Fixture
    theorem: Status
    clause: str
    roots: Status
    simulation: Status

    @property
    def passed(self) -> bool:
        exp = self.fixture.expected
        return self.theorem is exp and self.simulation is exp and not self.roots.opposes(exp)

    def as_record(self) -> dict:
        return {
            "id": self.fixture.id,
            "expected": self.fixture.expected.value,
            "theorem": self.theorem.value,
            "clause": self.clause,
            "roots": self.roots.value,
            "simulation": self.simulation.value,
            "pass": self.passed,
        }


def run_fixture(fx: Fixture, simulate: bool = True) -> FixtureResult:
    params = fx.params
    thm = classify(params)
    roots = verdict_from_roots(CharFn.from_params(params))
    if simulate:
        cfg = default_solver_config(fx.tau1, fx.tau2)
        sim = confirmed_verdict(lambda c: solve(params, c), cfg).status
    else:
        sim = Status.UNKNOWN
    return FixtureResult(fx, thm.status, thm.clause, roots.status, sim)


def run_all(include_variants: bool = False, simulate: bool = True) -> list[FixtureResult]:
    items = FIXTURES + (VARIANTS if include_variants else ())
    return [run_fixture(fx, simulate) for fx in items]
