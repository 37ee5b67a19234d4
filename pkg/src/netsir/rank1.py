"""Rank-1 interaction theory: invariants, limits, and curve classification.

When A = a b^T, each node carries a conserved quantity

    h_i = x_i * exp(-a_i * (xbar + ybar) / gamma)

and the infection dies out toward an equilibrium (x*, 0) that is an explicit
function of the initial state: x*_i = x_i * exp(a_i * (phi - xbar - ybar) / gamma)
where phi is the unique fixed point of an n-term exponential sum on [0, xbar].

The same structure pins down how y_i(t) can move: each node's infection curve
is constant, monotone decreasing, unimodal, or bimodal (one local minimum
followed by one local maximum), and the case is partly decided by the initial
data alone. The submodule also covers the uniform-contact special form
A = beta * 1 b^T (rows proportional to b) where an explicit threshold
epsilon_bar on the initial infection guarantees the bimodal case.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DimensionMismatch,
    DomainExcluded,
    InvalidInitialState,
    NoSignChange,
    NotSpecialForm,
    SubcriticalAggregate,
    SupercriticalityRequired,
)
from .integrate import Trajectory, refine_crossing
from .model import EPS_CLS, EpidemicParams, State, aggregates

# Scan step used to bracket the smallest root of g_i before bisection.
_EPSBAR_SCAN_STEP = 1e-3


class StabilityTag(Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    MARGINAL = "Marginal"

    def __str__(self) -> str:
        return self.value


class ShapeKind(Enum):
    CONSTANT = "Constant"
    MONOTONE_DECREASING = "MonotoneDecreasing"
    UNIMODAL = "Unimodal"
    BIMODAL = "Bimodal"
    UNDETERMINED = "Undetermined"
    # observation-only overflow tag: >2 monotonicity changes, which the
    # rank-1 theory excludes but full-rank matrices can produce
    MULTIMODAL = "Multimodal"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class CurveShape:
    """Tagged shape of one node's infection curve t -> y_i(t).

    Event times are optional: a prediction from initial data carries none,
    an observation from a trajectory fills them in. UNDETERMINED carries the
    set of admissible kinds instead and only ever appears as a prediction.
    MULTIMODAL records every interior peak time and only ever appears as an
    observation on non-rank-1 inputs.
    """

    kind: ShapeKind
    peak_time: float | None = None
    min_time: float | None = None
    admissible: frozenset[ShapeKind] = field(default_factory=frozenset)
    peak_times: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind is ShapeKind.BIMODAL:
            if (self.min_time is not None and self.peak_time is not None
                    and not self.min_time < self.peak_time):
                raise ValueError("bimodal requires min_time < peak_time")
        elif self.kind is ShapeKind.UNDETERMINED:
            if not self.admissible:
                raise ValueError("undetermined requires an admissible set")

    @classmethod
    def constant(cls) -> "CurveShape":
        return cls(ShapeKind.CONSTANT)

    @classmethod
    def monotone_decreasing(cls) -> "CurveShape":
        return cls(ShapeKind.MONOTONE_DECREASING)

    @classmethod
    def unimodal(cls, peak_time: float | None = None) -> "CurveShape":
        return cls(ShapeKind.UNIMODAL, peak_time=peak_time)

    @classmethod
    def bimodal(cls, min_time: float | None = None,
                peak_time: float | None = None) -> "CurveShape":
        return cls(ShapeKind.BIMODAL, peak_time=peak_time, min_time=min_time)

    @classmethod
    def undetermined(cls) -> "CurveShape":
        return cls(ShapeKind.UNDETERMINED,
                   admissible=frozenset({ShapeKind.MONOTONE_DECREASING,
                                         ShapeKind.BIMODAL}))

    @classmethod
    def multimodal(cls, peak_times: tuple[float, ...]) -> "CurveShape":
        return cls(ShapeKind.MULTIMODAL, peak_times=tuple(peak_times))

    def describe(self) -> str:
        if self.kind is ShapeKind.UNDETERMINED:
            names = sorted(k.value for k in self.admissible)
            return f"Undetermined{{{', '.join(names)}}}"
        parts = []
        if self.min_time is not None:
            parts.append(f"min at t={self.min_time:.6g}")
        if self.peak_time is not None:
            parts.append(f"peak at t={self.peak_time:.6g}")
        if self.peak_times:
            times = ", ".join(f"{t:.6g}" for t in self.peak_times)
            parts.append(f"{len(self.peak_times)} peaks at t={times}")
        suffix = f" ({'; '.join(parts)})" if parts else ""
        return f"{self.kind.value}{suffix}"


@dataclass(frozen=True, eq=False)
class InvariantVector:
    """Per-node conserved quantities h_i along a rank-1 trajectory."""

    h: np.ndarray
    params: EpidemicParams

    def __post_init__(self):
        self.h.setflags(write=False)


@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    """Limit equilibrium x* with its aggregate and stability tag."""

    x_star: np.ndarray
    xtilde_star: float
    tag: StabilityTag

    def __post_init__(self):
        self.x_star.setflags(write=False)


@dataclass(frozen=True)
class MultimodalityReport:
    """Outcome of the four sufficient conditions for a bimodal curve.

    The conditions, in order: the population splits into susceptible and
    infected only (x+y = 1); node i starts declining; the aggregate is
    supercritical (beta*xbar > gamma); the node's infection lies strictly
    between 0 and epsilon_bar_i. Their conjunction guarantees a bimodal
    infection curve at node i.
    """

    no_recovered: bool
    node_declining: bool
    aggregate_supercritical: bool
    below_epsilon_bar: bool
    epsilon_bar_i: float
    guaranteed: bool
    predicted: CurveShape | None = None


def invariants_h(p: EpidemicParams, s: State) -> InvariantVector:
    """Conserved quantities h_i = x_i * exp(-a_i*(xbar+ybar)/gamma)."""
    a, _ = p.rank_one_factors()
    agg = aggregates(p, s)
    h = s.x * np.exp(-a * (agg.xbar + agg.ybar) / p.gamma)
    return InvariantVector(h=h, params=p)


def _g_factory(p: EpidemicParams, s: State):
    """The fixed-point function g(xi) = sum_j b_j x_j e^{a_j(xi-xbar-ybar)/gamma} - xi.

    Written with the full exponent so every exponential argument stays <= 0
    on [0, xbar]; this is the c_j-weighted form with the conserved h_j folded
    back in.
    """
    a, b = p.rank_one_factors()
    agg = aggregates(p, s)
    shift = agg.xbar + agg.ybar
    x = s.x

    def g(xi: float) -> float:
        return float(b @ (x * np.exp(a * (xi - shift) / p.gamma)) - xi)

    return g, agg


def solve_phi(p: EpidemicParams, s: State) -> float:
    """Unique fixed point phi in [0, xbar] of the limit equation.

    phi is the limit of xbar(t); the bracket is guaranteed because g(0) > 0
    whenever x != 0 and g(xbar) <= 0 with equality only at y = 0. Bisection
    runs to full double precision (|g(phi)| <= 1e-12 at desk scale). The
    corner where y = 0 and xtilde >= gamma is outside the theory's domain
    (the state is an unstable equilibrium, not a transient) and raises
    DomainExcluded.
    """
    if not np.any(s.x):
        return 0.0
    g, agg = _g_factory(p, s)
    if not np.any(s.y):
        if agg.xtilde >= p.gamma:
            raise DomainExcluded(
                f"y = 0 with xtilde = {agg.xtilde:.6g} >= gamma = {p.gamma:.6g}")
        return agg.xbar
    lo, hi = 0.0, agg.xbar
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0.0:
        return lo
    if g_hi >= 0.0:
        # y != 0 forces g(xbar) < 0 analytically; round-off can only land here
        # when ybar is at the bottom of the float range
        return hi
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if g_mid > 0.0:
            lo = mid
        else:
            hi = mid


def _stability_tag(xtilde_star: float, gamma: float) -> StabilityTag:
    if xtilde_star < gamma - EPS_CLS:
        return StabilityTag.STABLE
    if xtilde_star > gamma + EPS_CLS:
        return StabilityTag.UNSTABLE
    return StabilityTag.MARGINAL


def limit_state(p: EpidemicParams, s0: State) -> EquilibriumReport:
    """Explicit limit x* of x(t) from the initial state.

    x*_i = x_i(0) * exp(a_i * (phi - xbar(0) - ybar(0)) / gamma). The report
    carries the aggregate xtilde* and its stability tag; b.x* reproduces phi.
    """
    phi = solve_phi(p, s0)
    a, b = p.rank_one_factors()
    agg = aggregates(p, s0)
    x_star = s0.x * np.exp(a * (phi - agg.xbar - agg.ybar) / p.gamma)
    xtilde_star = float((a * b) @ x_star)
    return EquilibriumReport(x_star=x_star, xtilde_star=xtilde_star,
                             tag=_stability_tag(xtilde_star, p.gamma))


def classify_equilibrium(p: EpidemicParams, x_star) -> StabilityTag:
    """Stability of the equilibrium (x*, 0) by the aggregate threshold.

    Stable when xtilde* < gamma - eps_cls, unstable when xtilde* > gamma +
    eps_cls, marginal in the band between (the boundary case is undecided).
    """
    a, b = p.rank_one_factors()
    xs = np.asarray(x_star, dtype=float)
    if xs.shape != (p.n,):
        raise DimensionMismatch(f"x_star must have shape ({p.n},)")
    return _stability_tag(float((a * b) @ xs), p.gamma)


def classify_node_curve(p: EpidemicParams, s0: State, i: int) -> CurveShape:
    """Shape of t -> y_i(t) decided from the initial data alone.

    With d0 = dy_i/dt(0) and w0 = w_i(0), the catalogue is:
      d0 > 0, or d0 = 0 with w0 > 0  -> Unimodal
      d0 <= 0 and w0 <= 0            -> MonotoneDecreasing
      d0 < 0 and w0 > 0              -> Undetermined{MonotoneDecreasing, Bimodal}
    Sign tests use the eps_cls dead band; |d0| <= eps_cls counts as d0 = 0.
    y(0) = 0 gives a constant (zero-infection) system, and a node with
    x_i(0) = y_i(0) = 0 has y_i identically zero, both tagged Constant.
    """
    a, _ = p.rank_one_factors()
    if not 0 <= i < p.n:
        raise DimensionMismatch(f"node index {i} out of range for n={p.n}")
    if not np.any(s0.y):
        return CurveShape.constant()
    if s0.x[i] == 0.0 and s0.y[i] == 0.0:
        return CurveShape.constant()
    agg = aggregates(p, s0)
    d0 = a[i] * s0.x[i] * agg.ybar - p.gamma * s0.y[i]
    w0 = agg.xtilde - p.gamma - a[i] * agg.ybar
    if d0 > EPS_CLS:
        return CurveShape.unimodal()
    if abs(d0) <= EPS_CLS:
        return CurveShape.unimodal() if w0 > EPS_CLS else CurveShape.monotone_decreasing()
    if w0 > EPS_CLS:
        return CurveShape.undetermined()
    return CurveShape.monotone_decreasing()


def epsilon_bar(beta: float, gamma: float, b_i: float) -> float:
    """Threshold on y_i(0) below which the bimodal guarantee applies.

    Smallest root in [0, 1] of
      g_i(e) = ((1-e)/(1-b_i e)) * (1 - gamma/beta
               + (gamma/beta) * log(gamma / (beta (1-b_i e)))) - e
    found by a 1e-3 scan for the first sign change and bisection. Requires
    beta > gamma (otherwise g_i(0) <= 0 and no positive threshold exists);
    g_i(1) = -1 anchors the right end.
    """
    if not (beta > 0 and gamma > 0):
        raise ValueError("beta and gamma must be positive")
    if not beta > gamma:
        raise SupercriticalityRequired(
            f"beta = {beta:.6g} must exceed gamma = {gamma:.6g}")
    if not 0 < b_i <= 1:
        raise ValueError(f"b_i must lie in (0, 1], got {b_i}")
    r = gamma / beta

    def g(eps: float) -> float:
        denom = 1.0 - b_i * eps
        if denom <= 0.0:
            return -eps  # only reachable at b_i = 1, eps = 1
        return (1.0 - eps) / denom * (1.0 - r + r * np.log(r / denom)) - eps

    n_steps = int(round(1.0 / _EPSBAR_SCAN_STEP))
    prev = 0.0
    g_prev = g(prev)
    if g_prev <= 0.0:
        return 0.0
    for k in range(1, n_steps + 1):
        eps = min(k * _EPSBAR_SCAN_STEP, 1.0)
        g_eps = g(eps)
        if g_eps <= 0.0:
            lo, hi = prev, eps
            break
        prev, g_prev = eps, g_eps
    else:
        raise NoSignChange("g_i has no sign change on [0, 1]")
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _special_form(p: EpidemicParams) -> tuple[float, np.ndarray]:
    """Normalize rank-1 factors to 1^T b = 1 and require constant a = beta*1."""
    a, b = p.rank_one_factors()
    scale = float(b.sum())
    b_n = b / scale
    a_n = a * scale
    beta = float(a_n.mean())
    if np.abs(a_n - beta).max() > 1e-9 * max(1.0, beta):
        raise NotSpecialForm("rows of A are not proportional to a common b "
                             "(a is not constant after normalization)")
    return beta, b_n


def check_multimodality_conditions(p: EpidemicParams, s0: State,
                                   i: int) -> MultimodalityReport:
    """Evaluate the four sufficient conditions for a bimodal curve at node i.

    Requires the uniform-contact form A = beta 1 b^T (checked after
    normalizing to 1^T b = 1). The no-recovered equality x(0)+y(0) = 1 is
    tested to 1e-12; the guarantee is the conjunction of all four conditions
    and comes with a Bimodal prediction attached.
    """
    beta, b_n = _special_form(p)
    if not 0 <= i < p.n:
        raise DimensionMismatch(f"node index {i} out of range for n={p.n}")
    gamma = p.gamma
    no_recovered = bool(np.abs(s0.x + s0.y - 1.0).max() <= 1e-12)
    ybar_n = float(b_n @ s0.y)
    xbar_n = float(b_n @ s0.x)
    node_declining = bool(beta * s0.x[i] * ybar_n - gamma * s0.y[i] < 0.0)
    aggregate_supercritical = bool(beta * xbar_n > gamma)
    if beta > gamma:
        eb = epsilon_bar(beta, gamma, float(b_n[i]))
        below = bool(0.0 < s0.y[i] < eb)
    else:
        eb = float("nan")
        below = False
    guaranteed = (no_recovered and node_declining
                  and aggregate_supercritical and below)
    return MultimodalityReport(
        no_recovered=no_recovered,
        node_declining=node_declining,
        aggregate_supercritical=aggregate_supercritical,
        below_epsilon_bar=below,
        epsilon_bar_i=eb,
        guaranteed=guaranteed,
        predicted=CurveShape.bimodal() if guaranteed else None,
    )


def peak_upper_bound(p: EpidemicParams, s0: State, i: int) -> float:
    """Bound on any stationary peak value of y_i in the uniform-contact form.

    Returns (beta x_i(0)/gamma) * (1 - gamma/beta + (gamma/beta) *
    log(gamma/(beta xbar(0)))), the node's share of the aggregate peak value.
    Needs x(0)+y(0) = 1 and a supercritical aggregate beta*xbar(0) > gamma.
    """
    beta, b_n = _special_form(p)
    if not 0 <= i < p.n:
        raise DimensionMismatch(f"node index {i} out of range for n={p.n}")
    if np.abs(s0.x + s0.y - 1.0).max() > 1e-12:
        raise InvalidInitialState("peak bound needs x(0) + y(0) = 1")
    gamma = p.gamma
    xbar_n = float(b_n @ s0.x)
    if not beta * xbar_n > gamma:
        raise SubcriticalAggregate(
            f"beta*xbar(0) = {beta * xbar_n:.6g} must exceed gamma = {gamma:.6g}")
    r = gamma / beta
    return float(beta * s0.x[i] / gamma * (1.0 - r + r * np.log(r / xbar_n)))


def tbar_times(traj: Trajectory) -> list[float | None]:
    """First time w_i(t) <= 0 per node, refined to the crossing tolerance.

    w_i(0) <= 0 gives 0 exactly. None marks a w_i that stayed positive over
    the whole sampled horizon, which can only happen when the trajectory
    stops before the aggregate peak time.
    """
    a, _ = traj.params.rank_one_factors()
    gamma = traj.params.gamma
    w = traj.w_series
    out: list[float | None] = []
    for i in range(traj.n_nodes):
        if w[0, i] <= 0.0:
            out.append(0.0)
            continue
        below = np.nonzero(w[:, i] <= 0.0)[0]
        if below.size == 0:
            out.append(None)
            continue
        k = int(below[0])

        def f(t: float, s: State, i=i) -> float:
            agg = aggregates(traj.params, s)
            return agg.xtilde - gamma - a[i] * agg.ybar

        out.append(refine_crossing(traj, f, (k - 1, k)))
    return out
