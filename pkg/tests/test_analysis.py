"""Scenario orchestration: analysis assembly, theory flags, sweeps."""
import numpy as np
import pytest

from netsir import (
    DRIFT_BOUND,
    ShapeKind,
    StabilityTag,
    analyze_scenario,
    builtin_scenario,
    instantiate,
    invariant_drift,
    loads_scenario,
    parse_scenario,
    parse_sweep,
    run_sweep,
    sweep_workers,
)
from netsir.analysis import _sweep_row


def _doc(**overrides):
    doc = {
        "name": "t",
        "gamma": 1.0,
        "a": [1.0, 1.0],
        "b": [1.0, 1.0],
        "x0": [0.85, 1.0],
        "y0": [0.15, 0.0],
        "horizon": 40.0,
    }
    doc.update(overrides)
    return doc


def test_full_analysis_example1(example1_result):
    r = example1_result
    assert r.rank_one
    assert r.theory_ok
    assert r.extinct
    assert r.trajectory is not None
    assert r.that == pytest.approx(2.111358420178294, abs=1e-9)
    assert r.phi == pytest.approx(0.3582275885504065, abs=1e-12)
    assert r.limit is not None
    assert r.limit.tag is StabilityTag.STABLE
    assert r.limit_gap is not None and r.limit_gap < 1e-8
    assert r.drift_max is not None and r.drift_max < DRIFT_BOUND
    assert r.lambda_initial == pytest.approx(1.85, abs=1e-9)
    assert r.takeoff is True
    assert r.notices == ()

    n1, n2 = r.nodes
    assert n1.predicted.kind is ShapeKind.UNDETERMINED
    assert n1.observed.kind is ShapeKind.BIMODAL
    assert n1.verdict.passed
    assert n1.multimodality.guaranteed
    assert n2.predicted.kind is ShapeKind.UNIMODAL
    assert n2.observed.kind is ShapeKind.UNIMODAL
    assert n2.verdict.passed
    assert not n2.multimodality.guaranteed
    assert n1.tbar == pytest.approx(n2.tbar, abs=1e-9)
    assert n1.peak_value == pytest.approx(0.187441, abs=1e-5)


def test_analysis_subset_skips_expensive_parts():
    sc = parse_scenario(_doc(analyses=["classify"]))
    r = analyze_scenario(sc)
    assert r.trajectory is None
    assert r.limit is None
    assert r.lambda_initial is None
    assert r.nodes[0].predicted is not None
    assert r.nodes[0].observed is None
    assert r.nodes[0].verdict is None
    assert r.theory_ok  # nothing to falsify


def test_resolve_undetermined_forces_simulation():
    sc = parse_scenario(_doc(analyses=["classify"]))
    r = analyze_scenario(sc, resolve_undetermined=True)
    assert r.trajectory is not None
    assert r.nodes[0].observed is not None
    assert r.nodes[0].verdict is not None and r.nodes[0].verdict.passed


def test_dense_scenario_skips_rank_one_analyses(fig5_result):
    r = fig5_result
    assert not r.rank_one
    assert r.trajectory is not None
    assert r.that is None
    assert r.phi is None and r.limit is None
    assert r.drift_max is None
    assert any("not rank-1" in n for n in r.notices)
    # three waves at node 1 are expected here, not a theory violation
    assert r.nodes[0].observed.kind is ShapeKind.MULTIMODAL
    assert r.theory_ok
    # the spectral analysis still runs on the dense matrix
    assert r.lambda_initial is not None
    assert r.takeoff is True


def test_fig2_analysis(fig2_result):
    r = fig2_result
    assert r.theory_ok
    assert r.extinct
    kinds = [n.observed.kind for n in r.nodes]
    assert kinds.count(ShapeKind.BIMODAL) == 1
    assert all(n.verdict is None or n.verdict.passed for n in r.nodes)
    # every detected local minimum sits at or before the aggregate peak
    for node in r.nodes:
        if node.observed.min_time is not None:
            assert node.observed.min_time <= r.that + 1e-9


def test_horizon_truncation_notice():
    sc = parse_scenario(_doc(horizon=None, integrator={"t_max": 2.0}))
    r = analyze_scenario(sc)
    assert r.extinct is False
    assert any("extinction threshold not reached" in n for n in r.notices)


def test_subcritical_disease_free_limit_excluded():
    # y = 0 with xtilde(0) > gamma: the limit map refuses the input and the
    # run reports a notice instead of failing
    sc = parse_scenario(_doc(y0=[0.0, 0.0], horizon=5.0))
    r = analyze_scenario(sc)
    assert r.limit is None
    assert any("limit map undefined" in n for n in r.notices)
    assert r.theory_ok


def test_invariant_drift_tiny_on_reference(example1_result):
    assert invariant_drift(example1_result.trajectory) < 1e-12


def test_sweep_workers_env(monkeypatch):
    monkeypatch.setenv("NETSIR_THREADS", "3")
    assert sweep_workers() == 3
    monkeypatch.setenv("NETSIR_THREADS", "not-a-number")
    assert sweep_workers() >= 1
    monkeypatch.setenv("NETSIR_THREADS", "-2")
    assert sweep_workers() >= 1
    monkeypatch.delenv("NETSIR_THREADS")
    assert 1 <= sweep_workers() <= 8


def test_run_sweep_orders_and_errors():
    spec = parse_sweep({
        "name": "gsweep",
        "base": _doc(horizon=25.0),
        "axis": "params.gamma",
        "values": [0.5, -1.0, 2.0],
    })
    rows = run_sweep(spec)
    assert [r.value for r in rows] == [0.5, -1.0, 2.0]
    assert rows[0].error == ""
    assert rows[0].phi is not None
    assert "ScenarioError" in rows[1].error
    assert all(s == "" for s in rows[1].shapes)
    assert rows[2].error == ""
    # gamma above xtilde(0): everything declines monotonically
    assert set(rows[2].shapes) <= {"MonotoneDecreasing", "Unimodal"}


def test_run_sweep_empty_values():
    spec = parse_sweep({"base": _doc(), "axis": "params.gamma", "values": []})
    assert run_sweep(spec) == []


def test_sweep_row_single():
    spec = parse_sweep({"base": _doc(horizon=20.0), "axis": "initial.y[0]",
                        "values": [0.1], "complement": "initial.x[0]"})
    row = _sweep_row(spec, 0.1)
    assert row.error == ""
    assert row.that is not None
    assert len(row.shapes) == 2
    assert len(row.peaks) == 2


def test_sweep_epsilon_threshold_example1():
    # sweeping y_1(0) across eps_bar flips node 1 between Bimodal and
    # MonotoneDecreasing, the regime change behind the threshold
    spec = parse_sweep({
        "base": _doc(horizon=None),
        "axis": "initial.y[0]",
        "complement": "initial.x[0]",
        "values": [0.05, 0.12, 0.17, 0.25, 0.3],
    })
    rows = run_sweep(spec)
    eps_bar = 0.1808515488141767
    for row in rows:
        assert row.error == ""
        if row.value < eps_bar:
            assert row.shapes[0] == "Bimodal", (
                f"y1(0) = {row.value} below eps_bar should rebound")
