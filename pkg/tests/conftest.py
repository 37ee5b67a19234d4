"""Shared fixtures: randomized scenario suites and built-in analyses.

The randomized rank-1 suite is the workhorse for the theory checks
(invariant drift, limit map, aggregate dichotomy, classifier soundness,
min-time bounds). It is built once per session; every case is integrated
to extinction at default tolerances and kept only if extinction is
actually reached inside the time cap.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from netsir import (
    EpidemicParams,
    IntegratorConfig,
    ScenarioAnalysis,
    State,
    Trajectory,
    analyze_scenario,
    builtin_scenario,
    epsilon_bar,
    integrate_until_extinction,
    validate_state,
)

SUITE_SEED = 20260819
SUITE_SIZE = 200
PROP5_SEED = 917
PROP5_SIZE = 50

_SUITE_CFG = IntegratorConfig(t_max=400.0)


@dataclass(frozen=True)
class Rank1Case:
    """One randomized rank-1 scenario integrated to extinction."""

    params: EpidemicParams
    s0: State
    traj: Trajectory
    final: State


def draw_rank1_case(rng: np.random.Generator) -> tuple[EpidemicParams, State]:
    """Random rank-1 parameters and initial state, mixed sub/supercritical.

    gamma is drawn relative to xtilde(0) so the suite straddles the
    epidemic threshold instead of sitting on one side of it.
    """
    n = int(rng.integers(2, 9))
    a = rng.uniform(0.3, 1.5, size=n)
    b = rng.uniform(0.3, 1.5, size=n)
    x = rng.uniform(0.2, 0.95, size=n)
    y = rng.uniform(0.0, 1.0, size=n) * (1.0 - x) * rng.uniform(0.05, 0.4)
    y[rng.random(n) < 0.3] = 0.0
    if not y.any():
        k = int(rng.integers(n))
        y[k] = 0.5 * (1.0 - x[k])
    xtilde0 = float((a * b) @ x)
    gamma = xtilde0 * 10 ** rng.uniform(-0.45, 0.45)
    p = EpidemicParams.rank_one(a, b, gamma)
    return p, validate_state(p, x, y)


def draw_prop5_case(rng: np.random.Generator) -> tuple[EpidemicParams, State]:
    """Uniform-contact scenario built by the bimodal-guarantee recipe.

    a = beta*1, sum(b) = 1, b_1 < min(gamma/beta, 1 - gamma/beta), node 1
    starts declining with y_1(0) inside (0, eps_bar_1), every other node
    fully susceptible. All four guarantee conditions hold by construction.
    """
    n = int(rng.integers(2, 7))
    beta = float(rng.uniform(0.8, 2.5))
    gamma = beta * float(rng.uniform(0.25, 0.75))
    cap = min(gamma / beta, 1.0 - gamma / beta)
    b1 = float(rng.uniform(0.1, 0.95)) * cap
    rest = rng.uniform(0.3, 1.5, size=n - 1)
    rest *= (1.0 - b1) / rest.sum()
    b = np.concatenate(([b1], rest))
    a = np.full(n, beta)
    eb = epsilon_bar(beta, gamma, b1)
    y1 = float(rng.uniform(0.05, 0.95)) * eb
    x = np.ones(n)
    y = np.zeros(n)
    x[0] = 1.0 - y1
    y[0] = y1
    p = EpidemicParams.rank_one(a, b, gamma)
    return p, validate_state(p, x, y)


def _build_suite(seed: int, size: int, draw) -> list[Rank1Case]:
    rng = np.random.default_rng(seed)
    cases: list[Rank1Case] = []
    while len(cases) < size:
        p, s0 = draw(rng)
        res = integrate_until_extinction(p, s0, _SUITE_CFG)
        if res.horizon_exceeded:
            continue
        cases.append(Rank1Case(params=p, s0=s0, traj=res.trajectory,
                               final=res.final))
    return cases


@pytest.fixture(scope="session")
def random_suite() -> list[Rank1Case]:
    return _build_suite(SUITE_SEED, SUITE_SIZE, draw_rank1_case)


@pytest.fixture(scope="session")
def prop5_suite() -> list[Rank1Case]:
    return _build_suite(PROP5_SEED, PROP5_SIZE, draw_prop5_case)


@pytest.fixture(scope="session")
def example1_result() -> ScenarioAnalysis:
    return analyze_scenario(builtin_scenario("example1"))


@pytest.fixture(scope="session")
def fig2_result() -> ScenarioAnalysis:
    return analyze_scenario(builtin_scenario("fig2"))


@pytest.fixture(scope="session")
def fig5_result() -> ScenarioAnalysis:
    return analyze_scenario(builtin_scenario("fig5"))
