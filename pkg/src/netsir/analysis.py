"""Scenario orchestration: run the requested analyses and collect results.

This is the glue between the scenario documents and the theory modules. It
owns no mathematics: it integrates when asked, classifies when asked, and
collects per-node records plus cross-checks (invariant drift, limit-vs-
extinction gap, spectral agreement) into one immutable result object that
the report renderers and the service layer both consume.

theory_ok summarizes the run-time theory checks: it drops to False when a
prediction verdict fails, when invariant drift exceeds the accepted bound,
when a rank-1 node shows more than two monotonicity changes, or when the
aggregate stability tag disagrees with the dominant-eigenvalue test.
"""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .curves import Verdict, aggregate_peak_time, observed_shape, verify_prediction
from .errors import DomainExcluded, NotSpecialForm
from .integrate import Trajectory, integrate, integrate_until_extinction
from .model import State, aggregates
from .rank1 import (
    CurveShape,
    EquilibriumReport,
    MultimodalityReport,
    ShapeKind,
    check_multimodality_conditions,
    classify_node_curve,
    invariants_h,
    limit_state,
    solve_phi,
    tbar_times,
)
from .scenarios import Scenario, SweepSpec, instantiate
from .spectral import dominant_eig

# Run-time bound on relative invariant drift before the run is flagged.
DRIFT_BOUND = 1e-6


@dataclass(frozen=True)
class NodeAnalysis:
    """Everything the analyses produced about one node."""

    index: int
    predicted: CurveShape | None = None
    observed: CurveShape | None = None
    verdict: Verdict | None = None
    tbar: float | None = None
    peak_value: float | None = None
    multimodality: MultimodalityReport | None = None


@dataclass(frozen=True)
class ScenarioAnalysis:
    """Collected outcome of one scenario run."""

    scenario: Scenario
    rank_one: bool
    trajectory: Trajectory | None
    extinct: bool | None
    that: float | None
    nodes: tuple[NodeAnalysis, ...]
    limit: EquilibriumReport | None
    phi: float | None
    final_state: State | None
    limit_gap: float | None
    drift_max: float | None
    lambda_initial: float | None
    takeoff: bool | None
    notices: tuple[str, ...]
    theory_ok: bool


def invariant_drift(traj: Trajectory) -> float:
    """Max over nodes and samples of |h_i(t) - h_i(0)| / (1 + |h_i(0)|)."""
    a, _ = traj.params.rank_one_factors()
    shift = (traj.xbar_series + traj.ybar_series)[:, None]
    h = traj.x * np.exp(-a[None, :] * shift / traj.params.gamma)
    h0 = h[0]
    return float((np.abs(h - h0) / (1.0 + np.abs(h0))).max())


def analyze_scenario(sc: Scenario,
                     resolve_undetermined: bool = False) -> ScenarioAnalysis:
    """Run the scenario's requested analyses and assemble the result."""
    requested = set(sc.analyses)
    if resolve_undetermined:
        requested.add("simulate")
    p, s0 = sc.params, sc.initial
    rank_one = p.is_rank_one
    notices: list[str] = []
    theory_ok = True

    if not rank_one and (requested & {"classify", "limit", "multimodality"}):
        notices.append(
            "interaction matrix is not rank-1: invariants, curve "
            "classification, limit map, and aggregate analyses are skipped "
            "(NotRankOne)")

    traj = None
    extinct = None
    final_state = None
    that = None
    drift_max = None
    tbars: list[float | None] = [None] * p.n
    observed: list[CurveShape | None] = [None] * p.n
    peaks: list[float | None] = [None] * p.n
    if "simulate" in requested:
        if sc.horizon is None:
            res = integrate_until_extinction(p, s0, sc.integrator)
            traj, extinct, final_state = res.trajectory, res.extinct, res.final
            if res.horizon_exceeded:
                notices.append(
                    f"extinction threshold not reached by t_max = "
                    f"{sc.integrator.resolved_t_max(p.gamma):g}; analyses use "
                    f"the truncated horizon")
        else:
            traj = integrate(p, s0, sc.horizon, sc.integrator)
            final_state = traj.state(traj.n_samples - 1)
            extinct = bool(final_state.y.max() < sc.integrator.y_extinction_tol)
        observed = [observed_shape(traj, i) for i in range(p.n)]
        peaks = [float(traj.y[:, i].max()) for i in range(p.n)]
        if rank_one:
            that = aggregate_peak_time(traj)
            tbars = tbar_times(traj)
            drift_max = invariant_drift(traj)
            if drift_max > DRIFT_BOUND:
                theory_ok = False
                notices.append(
                    f"invariant drift {drift_max:.3e} exceeds the "
                    f"{DRIFT_BOUND:g} bound")
            for i, shape in enumerate(observed):
                if shape is not None and shape.kind is ShapeKind.MULTIMODAL:
                    theory_ok = False
                    notices.append(
                        f"node {i + 1} shows {len(shape.peak_times)} peaks, "
                        f"outside the rank-1 catalogue")

    predicted: list[CurveShape | None] = [None] * p.n
    if "classify" in requested and rank_one:
        predicted = [classify_node_curve(p, s0, i) for i in range(p.n)]

    verdicts: list[Verdict | None] = [None] * p.n
    for i in range(p.n):
        if predicted[i] is not None and observed[i] is not None:
            verdicts[i] = verify_prediction(predicted[i], observed[i])
            if not verdicts[i].passed:
                theory_ok = False

    limit = None
    phi = None
    limit_gap = None
    if "limit" in requested and rank_one:
        try:
            phi = solve_phi(p, s0)
            limit = limit_state(p, s0)
        except DomainExcluded as exc:
            notices.append(f"limit map undefined here: {exc}")
        if limit is not None and final_state is not None and extinct:
            limit_gap = float(np.abs(limit.x_star - final_state.x).max())

    mm: list[MultimodalityReport | None] = [None] * p.n
    if "multimodality" in requested and rank_one:
        try:
            mm = [check_multimodality_conditions(p, s0, i) for i in range(p.n)]
        except NotSpecialForm:
            notices.append(
                "interaction matrix rows are not proportional to a common "
                "contact vector: multimodality conditions skipped "
                "(NotSpecialForm)")

    lambda_initial = None
    takeoff = None
    if "spectral" in requested:
        M0 = s0.x[:, None] * p.dense_matrix()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            lambda_initial = dominant_eig(M0).lambda_max
        for w in caught:
            notices.append(f"spectral: {w.message}")
        takeoff = bool(lambda_initial > p.gamma)
        if rank_one and limit is not None:
            Mstar = limit.x_star[:, None] * p.dense_matrix()
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                lambda_star = dominant_eig(Mstar).lambda_max
            for w in caught:
                notices.append(f"spectral: {w.message}")
            if abs(lambda_star - limit.xtilde_star) > 1e-8 * max(
                    1.0, limit.xtilde_star):
                theory_ok = False
                notices.append(
                    f"dominant eigenvalue {lambda_star:.12g} disagrees with "
                    f"xtilde* = {limit.xtilde_star:.12g} at the limit")

    nodes = tuple(
        NodeAnalysis(index=i, predicted=predicted[i], observed=observed[i],
                     verdict=verdicts[i], tbar=tbars[i], peak_value=peaks[i],
                     multimodality=mm[i])
        for i in range(p.n))
    return ScenarioAnalysis(
        scenario=sc, rank_one=rank_one, trajectory=traj, extinct=extinct,
        that=that, nodes=nodes, limit=limit, phi=phi, final_state=final_state,
        limit_gap=limit_gap, drift_max=drift_max,
        lambda_initial=lambda_initial, takeoff=takeoff,
        notices=tuple(notices), theory_ok=theory_ok)


def sweep_workers() -> int:
    """Worker count for sweep rows, capped by NETSIR_THREADS."""
    cap = os.environ.get("NETSIR_THREADS", "")
    try:
        requested = int(cap)
    except ValueError:
        requested = 0
    if requested <= 0:
        requested = min(8, os.cpu_count() or 1)
    return max(1, requested)


@dataclass(frozen=True)
class SweepRow:
    """One sweep row: the axis value with its scenario's headline numbers."""

    value: float
    shapes: tuple[str, ...]
    that: float | None
    peaks: tuple[float, ...]
    xtilde_star: float | None
    phi: float | None
    error: str


def _sweep_row(spec: SweepSpec, value: float) -> SweepRow:
    n = spec.base.params.n
    try:
        sc = replace(instantiate(spec, value),
                     analyses=frozenset({"simulate", "limit"}))
        result = analyze_scenario(sc)
    except Exception as exc:
        return SweepRow(value=value, shapes=("",) * n, that=None,
                        peaks=(float("nan"),) * n, xtilde_star=None, phi=None,
                        error=f"{type(exc).__name__}: {exc}")
    shapes = tuple(
        node.observed.kind.value if node.observed is not None else ""
        for node in result.nodes)
    peaks = tuple(
        node.peak_value if node.peak_value is not None else float("nan")
        for node in result.nodes)
    return SweepRow(
        value=value, shapes=shapes, that=result.that, peaks=peaks,
        xtilde_star=(result.limit.xtilde_star if result.limit else None),
        phi=result.phi, error="")


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """All sweep rows, computed concurrently, in the order of spec.values."""
    if not spec.values:
        return []
    workers = min(sweep_workers(), len(spec.values))
    if workers == 1:
        return [_sweep_row(spec, v) for v in spec.values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda v: _sweep_row(spec, v), spec.values))
