"""FastAPI application exposing the scenario analysis core."""
from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..analysis import analyze_scenario, run_sweep
from ..errors import NetsirError, ScenarioError
from ..report import (
    report_text,
    svg_aggregate_curve,
    svg_node_curves,
    sweep_csv,
    trajectory_csv,
)
from ..scenarios import builtin_document, builtin_names, parse_scenario, parse_sweep
from .schemas import (
    AnalysisResponse,
    AnalyzeRequest,
    HealthResponse,
    ScenarioListResponse,
    SweepRequest,
    SweepResponse,
    analysis_response,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="netsir",
        version=__version__,
        description="Network SIR epidemic analysis: simulation, rank-1 "
                    "invariants, limit equilibria, and infection-curve "
                    "shape classification.",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/scenarios", response_model=ScenarioListResponse)
    def scenarios() -> ScenarioListResponse:
        return ScenarioListResponse(scenarios=list(builtin_names()))

    @app.get("/scenarios/{name}")
    def scenario(name: str) -> dict:
        try:
            return builtin_document(name)
        except ScenarioError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.post("/analyze", response_model=AnalysisResponse)
    def analyze(req: AnalyzeRequest) -> AnalysisResponse:
        try:
            sc = parse_scenario(req.scenario.document())
            result = analyze_scenario(
                sc, resolve_undetermined=req.resolve_undetermined)
        except NetsirError as exc:
            raise HTTPException(status_code=422,
                                detail=f"{type(exc).__name__}: {exc}") from exc
        traj = result.trajectory
        csv = trajectory_csv(traj) if traj is not None else None
        svg_y = svg_ybar = None
        if req.svg and traj is not None:
            svg_y = svg_node_curves(traj, sc.name)
            if result.rank_one:
                svg_ybar = svg_aggregate_curve(traj, sc.name)
        report = report_text(result,
                             resolve_undetermined=req.resolve_undetermined)
        return analysis_response(result, csv, report, svg_y, svg_ybar)

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        try:
            spec = parse_sweep(req.sweep.document())
        except NetsirError as exc:
            raise HTTPException(status_code=422,
                                detail=f"{type(exc).__name__}: {exc}") from exc
        rows = run_sweep(spec)
        csv = sweep_csv(spec, rows)
        n_errors = sum(1 for row in rows if row.error)
        return SweepResponse(name=spec.name, csv=csv, n_rows=len(rows),
                             n_errors=n_errors)

    return app
