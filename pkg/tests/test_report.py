"""Rendered outputs: CSV determinism, report anatomy, SVG charts."""
import csv
import io
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from netsir import (
    analyze_scenario,
    builtin_scenario,
    parse_scenario,
    parse_sweep,
    run_sweep,
)
from netsir.report import (
    report_text,
    svg_aggregate_curve,
    svg_node_curves,
    sweep_csv,
    trajectory_csv,
)


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


def test_trajectory_csv_format(example1_result):
    text = trajectory_csv(example1_result.trajectory)
    lines = text.split("\n")
    assert lines[0] == "t,x_1,x_2,y_1,y_2,xbar,xtilde,ybar"
    assert lines[-1] == ""  # trailing LF, LF endings throughout
    assert "\r" not in text
    rows = list(csv.reader(io.StringIO(text)))
    assert len(rows) == example1_result.trajectory.n_samples + 1
    first = rows[1]
    assert float(first[0]) == 0.0
    assert float(first[1]) == 0.85
    # full double precision round-trip
    k = 137
    assert float(rows[k + 1][3]) == float(example1_result.trajectory.y[k, 0])


def test_trajectory_csv_dense_has_no_aggregates(fig5_result):
    text = trajectory_csv(fig5_result.trajectory)
    header = text.split("\n", 1)[0]
    assert header == "t,x_1,x_2,x_3,x_4,y_1,y_2,y_3,y_4"
    assert "xbar" not in header


def test_trajectory_csv_byte_identical_across_runs():
    sc = builtin_scenario("example1")
    t1 = trajectory_csv(analyze_scenario(sc).trajectory)
    t2 = trajectory_csv(analyze_scenario(sc).trajectory)
    assert t1 == t2


def test_sweep_csv_format():
    spec = parse_sweep({
        "name": "s",
        "base": _doc(horizon=20.0),
        "axis": "params.gamma",
        "values": [0.5, -1.0],
    })
    rows = run_sweep(spec)
    text = sweep_csv(spec, rows)
    lines = text.strip().split("\n")
    assert lines[0] == ("value,shape_1,shape_2,that,peak_1,peak_2,"
                        "xtilde_star,phi,error")
    ok_row = next(csv.reader(io.StringIO(lines[1])))
    assert float(ok_row[0]) == 0.5
    assert ok_row[1] in ("Unimodal", "Bimodal", "MonotoneDecreasing")
    assert ok_row[-1] == ""
    err_row = next(csv.reader(io.StringIO(lines[2])))
    assert err_row[-1].startswith("ScenarioError")
    assert err_row[4] == ""  # nan peaks render empty


def test_sweep_csv_empty_rows_header_only():
    spec = parse_sweep({"base": _doc(), "axis": "params.gamma", "values": []})
    text = sweep_csv(spec, [])
    assert text == ("value,shape_1,shape_2,that,peak_1,peak_2,"
                    "xtilde_star,phi,error\n")


def test_report_text_sections(example1_result):
    text = report_text(example1_result)
    assert text.startswith("scenario: example1\n")
    for section in ("[aggregates]", "[curves]", "[limit]",
                    "[multimodality]", "[spectral]"):
        assert section in text, f"missing section {section}"
    assert "theory checks: PASS" in text
    assert "phi = 0.3582275885504065" in text
    assert "stability: Stable" in text
    assert "verdict Pass" in text
    assert "rank-1" in text
    assert "guaranteed bimodal" in text
    assert "epidemic takes off" in text
    # no timestamps or machine-specific content: identical rerun
    again = report_text(analyze_scenario(builtin_scenario("example1")))
    assert again == text


def test_report_text_resolve_undetermined():
    sc = builtin_scenario("example1")
    r = analyze_scenario(sc, resolve_undetermined=True)
    text = report_text(r, resolve_undetermined=True)
    assert "resolved to Bimodal" in text


def test_report_text_dense_notices(fig5_result):
    text = report_text(fig5_result)
    assert "coupling: dense" in text
    assert "[notices]" in text
    assert "not rank-1" in text
    assert "[limit]" not in text
    assert "Multimodal" in text


def test_report_text_classify_only():
    sc = parse_scenario(_doc(analyses=["classify"]))
    text = report_text(analyze_scenario(sc))
    assert "[curves]" in text
    assert "predicted" in text
    assert "observed" not in text.split("[curves]")[1].split("\n")[1]
    assert "[aggregates]" not in text


def _parse_svg(svg: str) -> ET.Element:
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    return root


def _polylines(root: ET.Element) -> list:
    ns = {"s": "http://www.w3.org/2000/svg"}
    return root.findall(".//s:polyline", ns) or root.findall(".//polyline")


def test_svg_node_curves_shape(example1_result):
    svg = svg_node_curves(example1_result.trajectory, "example1")
    root = _parse_svg(svg)
    assert root.get("width") == "800"
    assert root.get("height") == "500"
    assert root.get("viewBox") == "0 0 800 500"
    assert len(_polylines(root)) == 2  # one per node
    assert "example1" in svg
    assert "y_i(t)" in svg


def test_svg_aggregate_curve_shape(example1_result):
    svg = svg_aggregate_curve(example1_result.trajectory, "example1")
    root = _parse_svg(svg)
    assert len(_polylines(root)) == 1
    assert "ybar(t)" in svg


def test_svg_deterministic_and_bounded(example1_result):
    s1 = svg_node_curves(example1_result.trajectory, "example1")
    s2 = svg_node_curves(example1_result.trajectory, "example1")
    assert s1 == s2
    assert len(s1) < 200_000  # stride thinning keeps the payload small


def test_svg_many_nodes_use_palette(fig2_result):
    svg = svg_node_curves(fig2_result.trajectory, "fig2")
    polylines = _polylines(_parse_svg(svg))
    assert len(polylines) == 5
    colors = {p.get("stroke") for p in polylines}
    assert len(colors) == 5  # distinct palette entries
