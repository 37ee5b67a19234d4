"""Render analysis results: trajectory CSV, text report, SVG charts.

Everything here is deterministic: no timestamps, no locale formatting, no
dict-order dependence, so identical inputs give byte-identical outputs.
Floats that carry information are written with repr (shortest round-trip
form, `.` separator); cosmetic values use fixed %g formats.
"""
from __future__ import annotations

import csv
import io

import numpy as np

from .analysis import DRIFT_BOUND, ScenarioAnalysis, SweepRow
from .integrate import Trajectory
from .rank1 import ShapeKind
from .scenarios import SweepSpec

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
            "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")

_SVG_W, _SVG_H = 800, 500
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 62, 150, 42, 52


def _fmt(v) -> str:
    return repr(float(v))


def trajectory_csv(traj: Trajectory) -> str:
    """One row per sample; aggregate columns only for rank-1 coupling."""
    n = traj.n_nodes
    rank_one = traj.params.is_rank_one
    header = (["t"] + [f"x_{i + 1}" for i in range(n)]
              + [f"y_{i + 1}" for i in range(n)])
    if rank_one:
        header += ["xbar", "xtilde", "ybar"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    xbar = traj.xbar_series if rank_one else None
    xtilde = traj.xtilde_series if rank_one else None
    ybar = traj.ybar_series if rank_one else None
    for k in range(traj.n_samples):
        row = ([_fmt(traj.times[k])]
               + [_fmt(v) for v in traj.x[k]]
               + [_fmt(v) for v in traj.y[k]])
        if rank_one:
            row += [_fmt(xbar[k]), _fmt(xtilde[k]), _fmt(ybar[k])]
        writer.writerow(row)
    return buf.getvalue()


def sweep_csv(spec: SweepSpec, rows: list[SweepRow]) -> str:
    """Sweep summary: one row per axis value, errors recorded inline."""
    n = spec.base.params.n
    header = (["value"] + [f"shape_{i + 1}" for i in range(n)] + ["that"]
              + [f"peak_{i + 1}" for i in range(n)]
              + ["xtilde_star", "phi", "error"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        cells = [_fmt(row.value)]
        cells += list(row.shapes)
        cells.append("" if row.that is None else _fmt(row.that))
        cells += ["" if np.isnan(v) else _fmt(v) for v in row.peaks]
        cells.append("" if row.xtilde_star is None else _fmt(row.xtilde_star))
        cells.append("" if row.phi is None else _fmt(row.phi))
        cells.append(row.error)
        writer.writerow(cells)
    return buf.getvalue()


def _vector_str(v: np.ndarray) -> str:
    return "[" + ", ".join(_fmt(u) for u in v) + "]"


def report_text(result: ScenarioAnalysis,
                resolve_undetermined: bool = False) -> str:
    """Human-readable summary of everything the analyses produced."""
    sc = result.scenario
    lines: list[str] = []
    lines.append(f"scenario: {sc.name}")
    coupling = "rank-1" if result.rank_one else "dense"
    lines.append(f"nodes: {sc.params.n}  coupling: {coupling}  "
                 f"gamma: {_fmt(sc.params.gamma)}")
    traj = result.trajectory
    if traj is not None:
        requested = ("to extinction" if sc.horizon is None
                     else f"{sc.horizon:g}")
        extinct = "yes" if result.extinct else "no"
        lines.append(f"horizon: {requested}  sampled: t = 0 .. "
                     f"{traj.times[-1]:g}  samples: {traj.n_samples}  "
                     f"extinct: {extinct}")
    lines.append("")

    if result.rank_one and traj is not None:
        lines.append("[aggregates]")
        lines.append(f"xbar(0) = {_fmt(traj.xbar_series[0])}  "
                     f"xtilde(0) = {_fmt(traj.xtilde_series[0])}  "
                     f"ybar(0) = {_fmt(traj.ybar_series[0])}")
        if result.that is None:
            lines.append("aggregate peak time: not reached in horizon")
        elif result.that == 0.0:
            lines.append("aggregate peak time: 0 "
                         "(xtilde(0) <= gamma, ybar decreasing throughout)")
        else:
            lines.append(f"aggregate peak time: {_fmt(result.that)}")
        if result.drift_max is not None:
            lines.append(f"max invariant drift: {result.drift_max:.3e} "
                         f"(bound {DRIFT_BOUND:g})")
        lines.append("")

    has_curves = any(node.predicted is not None or node.observed is not None
                     for node in result.nodes)
    if has_curves:
        lines.append("[curves]")
        for node in result.nodes:
            parts = [f"node {node.index + 1}:"]
            if node.predicted is not None:
                parts.append(f"predicted {node.predicted.describe()}")
                if (resolve_undetermined and node.observed is not None
                        and node.predicted.kind is ShapeKind.UNDETERMINED):
                    parts.append(f"resolved to {node.observed.kind.value}")
            if node.observed is not None:
                parts.append(f"observed {node.observed.describe()}")
            if node.verdict is not None:
                parts.append("verdict " + ("Pass" if node.verdict.passed
                                           else f"FAIL ({node.verdict.reason})"))
            if node.tbar is not None:
                parts.append(f"tbar = {node.tbar:.6g}")
            if node.peak_value is not None:
                parts.append(f"max y = {node.peak_value:.6g}")
            lines.append("  " + "  ".join(parts))
        lines.append("")

    if result.phi is not None or result.limit is not None:
        lines.append("[limit]")
        if result.phi is not None:
            lines.append(f"phi = {_fmt(result.phi)}")
        if result.limit is not None:
            lines.append(f"x* = {_vector_str(result.limit.x_star)}")
            lines.append(f"xtilde* = {_fmt(result.limit.xtilde_star)}  "
                         f"stability: {result.limit.tag.value}")
        if result.limit_gap is not None:
            lines.append(f"|x* - x(T)|_inf = {result.limit_gap:.3e} "
                         f"(extinction cross-check)")
        lines.append("")

    if any(node.multimodality is not None for node in result.nodes):
        lines.append("[multimodality]")
        for node in result.nodes:
            mm = node.multimodality
            if mm is None:
                continue
            conds = (f"no_recovered={'yes' if mm.no_recovered else 'no'}, "
                     f"declining={'yes' if mm.node_declining else 'no'}, "
                     f"supercritical="
                     f"{'yes' if mm.aggregate_supercritical else 'no'}, "
                     f"below_eps_bar={'yes' if mm.below_epsilon_bar else 'no'}")
            eps = ("n/a" if np.isnan(mm.epsilon_bar_i)
                   else f"{mm.epsilon_bar_i:.6g}")
            tag = ("guaranteed bimodal" if mm.guaranteed else "no guarantee")
            lines.append(f"  node {node.index + 1}: {tag} "
                         f"(eps_bar = {eps}; {conds})")
        lines.append("")

    if result.lambda_initial is not None:
        lines.append("[spectral]")
        verdict = ("epidemic takes off" if result.takeoff
                   else "subcritical at t = 0")
        lines.append(f"lambda_max([x(0)]A) = {_fmt(result.lambda_initial)} "
                     f"vs gamma = {_fmt(sc.params.gamma)}: {verdict}")
        lines.append("")

    if result.notices:
        lines.append("[notices]")
        for notice in result.notices:
            lines.append(f"  - {notice}")
        lines.append("")

    lines.append(f"theory checks: {'PASS' if result.theory_ok else 'FAIL'}")
    lines.append("")
    return "\n".join(lines)


def _ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def _svg_chart(series: list[tuple[str, str, np.ndarray, np.ndarray]],
               title: str, ylabel: str) -> str:
    """One fixed-size line chart; series = [(label, color, xs, ys)]."""
    x_lo = min(float(xs[0]) for _, _, xs, _ in series)
    x_hi = max(float(xs[-1]) for _, _, xs, _ in series)
    y_hi = max(float(ys.max()) for _, _, _, ys in series)
    y_hi = y_hi * 1.05 if y_hi > 0 else 1.0
    y_lo = 0.0
    plot_w = _SVG_W - _MARGIN_L - _MARGIN_R
    plot_h = _SVG_H - _MARGIN_T - _MARGIN_B

    def px(t: float) -> float:
        return _MARGIN_L + (t - x_lo) / (x_hi - x_lo or 1.0) * plot_w

    def py(v: float) -> float:
        return _MARGIN_T + (1.0 - (v - y_lo) / (y_hi - y_lo)) * plot_h

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" '
           f'height="{_SVG_H}" viewBox="0 0 {_SVG_W} {_SVG_H}">',
           f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
           f'<text x="{_SVG_W // 2}" y="24" text-anchor="middle" '
           f'font-family="sans-serif" font-size="16">{title}</text>']
    axis_y = _MARGIN_T + plot_h
    out.append(f'<line x1="{_MARGIN_L}" y1="{axis_y}" '
               f'x2="{_MARGIN_L + plot_w}" y2="{axis_y}" stroke="black"/>')
    out.append(f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" '
               f'y2="{axis_y}" stroke="black"/>')
    for t in _ticks(x_lo, x_hi):
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{axis_y}" x2="{x:.2f}" '
                   f'y2="{axis_y + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{axis_y + 20}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{t:.4g}</text>')
    for v in _ticks(y_lo, y_hi):
        y = py(v)
        out.append(f'<line x1="{_MARGIN_L - 5}" y1="{y:.2f}" '
                   f'x2="{_MARGIN_L}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{_MARGIN_L - 8}" y="{y + 4:.2f}" '
                   f'text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{v:.3g}</text>')
    out.append(f'<text x="{_MARGIN_L + plot_w / 2:.0f}" y="{_SVG_H - 14}" '
               f'text-anchor="middle" font-family="sans-serif" '
               f'font-size="12">t</text>')
    out.append(f'<text x="18" y="{_MARGIN_T + plot_h / 2:.0f}" '
               f'text-anchor="middle" font-family="sans-serif" '
               f'font-size="12" transform="rotate(-90 18 '
               f'{_MARGIN_T + plot_h / 2:.0f})">{ylabel}</text>')
    for label, color, xs, ys in series:
        stride = max(1, len(xs) // (2 * plot_w))
        pts = " ".join(f"{px(float(t)):.2f},{py(float(v)):.2f}"
                       for t, v in zip(xs[::stride], ys[::stride]))
        last = f"{px(float(xs[-1])):.2f},{py(float(ys[-1])):.2f}"
        if not pts.endswith(last):
            pts += " " + last
        out.append(f'<polyline points="{pts}" fill="none" '
                   f'stroke="{color}" stroke-width="1.5"/>')
    legend_x = _MARGIN_L + plot_w + 12
    for k, (label, color, _, _) in enumerate(series):
        y = _MARGIN_T + 14 + 18 * k
        out.append(f'<line x1="{legend_x}" y1="{y}" x2="{legend_x + 22}" '
                   f'y2="{y}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{legend_x + 28}" y="{y + 4}" '
                   f'font-family="sans-serif" font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def svg_node_curves(traj: Trajectory, name: str) -> str:
    """Per-node infection curves y_i(t) in one 800x500 chart."""
    series = [(f"node {i + 1}", _PALETTE[i % len(_PALETTE)], traj.times,
               traj.y[:, i]) for i in range(traj.n_nodes)]
    return _svg_chart(series, f"{name}: infection curves", "y_i(t)")


def svg_aggregate_curve(traj: Trajectory, name: str) -> str:
    """Weighted aggregate infection curve ybar(t) (rank-1 coupling only)."""
    series = [("ybar", _PALETTE[0], traj.times, traj.ybar_series)]
    return _svg_chart(series, f"{name}: aggregate infection", "ybar(t)")
