"""Request/response models for the analysis service.

The wire format mirrors the scenario document format one-to-one, so a JSON
scenario file can be posted as the `scenario` field unchanged. Responses
carry both the structured analysis results and the rendered artifacts (CSV,
text report, SVG) so a thin client can write files without re-deriving
anything.
"""
from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict

from ..analysis import ScenarioAnalysis
from ..rank1 import CurveShape
from ..scenarios import Scenario, serialize_scenario


class IntegratorModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    abs_tol: float | None = None
    rel_tol: float | None = None
    max_step: float | None = None
    sample_dt: float | None = None
    t_max: float | None = None
    y_extinction_tol: float | None = None


class ScenarioModel(BaseModel):
    """A scenario document; rank-1 jobs set a and b, dense jobs set A."""

    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    gamma: float
    a: list[float] | None = None
    b: list[float] | None = None
    A: list[list[float]] | None = None
    x0: list[float]
    y0: list[float]
    horizon: float | None = None
    integrator: IntegratorModel | None = None
    analyses: list[str] | None = None

    def document(self) -> dict:
        doc = self.model_dump(exclude_none=True)
        doc.setdefault("horizon", None)  # absent and null both mean extinction
        return doc

    @classmethod
    def from_scenario(cls, sc: Scenario) -> "ScenarioModel":
        return cls.model_validate(serialize_scenario(sc))


class AnalyzeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioModel
    svg: bool = False
    resolve_undetermined: bool = False


class ShapeModel(BaseModel):
    kind: str
    peak_time: float | None = None
    min_time: float | None = None
    admissible: list[str] | None = None
    peak_times: list[float] | None = None
    text: str

    @classmethod
    def from_shape(cls, shape: CurveShape) -> "ShapeModel":
        return cls(
            kind=shape.kind.value,
            peak_time=shape.peak_time,
            min_time=shape.min_time,
            admissible=(sorted(k.value for k in shape.admissible)
                        if shape.admissible else None),
            peak_times=list(shape.peak_times) if shape.peak_times else None,
            text=shape.describe(),
        )


class VerdictModel(BaseModel):
    passed: bool
    reason: str


class MultimodalityModel(BaseModel):
    no_recovered: bool
    node_declining: bool
    aggregate_supercritical: bool
    below_epsilon_bar: bool
    epsilon_bar_i: float | None
    guaranteed: bool


class NodeModel(BaseModel):
    """Per-node results; index is 0-based."""

    index: int
    predicted: ShapeModel | None = None
    observed: ShapeModel | None = None
    verdict: VerdictModel | None = None
    tbar: float | None = None
    peak_value: float | None = None
    multimodality: MultimodalityModel | None = None


class AnalysisResponse(BaseModel):
    name: str
    n: int
    rank_one: bool
    extinct: bool | None = None
    sampled_horizon: float | None = None
    n_samples: int | None = None
    that: float | None = None
    drift_max: float | None = None
    phi: float | None = None
    x_star: list[float] | None = None
    xtilde_star: float | None = None
    stability: str | None = None
    limit_gap: float | None = None
    lambda_initial: float | None = None
    takeoff: bool | None = None
    nodes: list[NodeModel]
    notices: list[str]
    theory_ok: bool
    csv: str | None = None
    report: str
    svg_y: str | None = None
    svg_ybar: str | None = None


def analysis_response(result: ScenarioAnalysis, csv: str | None, report: str,
                      svg_y: str | None, svg_ybar: str | None) -> AnalysisResponse:
    nodes = []
    for node in result.nodes:
        mm = None
        if node.multimodality is not None:
            raw = node.multimodality
            mm = MultimodalityModel(
                no_recovered=raw.no_recovered,
                node_declining=raw.node_declining,
                aggregate_supercritical=raw.aggregate_supercritical,
                below_epsilon_bar=raw.below_epsilon_bar,
                epsilon_bar_i=(None if math.isnan(raw.epsilon_bar_i)
                               else raw.epsilon_bar_i),
                guaranteed=raw.guaranteed,
            )
        nodes.append(NodeModel(
            index=node.index,
            predicted=(ShapeModel.from_shape(node.predicted)
                       if node.predicted is not None else None),
            observed=(ShapeModel.from_shape(node.observed)
                      if node.observed is not None else None),
            verdict=(VerdictModel(passed=node.verdict.passed,
                                  reason=node.verdict.reason)
                     if node.verdict is not None else None),
            tbar=node.tbar,
            peak_value=node.peak_value,
            multimodality=mm,
        ))
    traj = result.trajectory
    return AnalysisResponse(
        name=result.scenario.name,
        n=result.scenario.params.n,
        rank_one=result.rank_one,
        extinct=result.extinct,
        sampled_horizon=(float(traj.times[-1]) if traj is not None else None),
        n_samples=(traj.n_samples if traj is not None else None),
        that=result.that,
        drift_max=result.drift_max,
        phi=result.phi,
        x_star=(result.limit.x_star.tolist()
                if result.limit is not None else None),
        xtilde_star=(result.limit.xtilde_star
                     if result.limit is not None else None),
        stability=(result.limit.tag.value
                   if result.limit is not None else None),
        limit_gap=result.limit_gap,
        lambda_initial=result.lambda_initial,
        takeoff=result.takeoff,
        nodes=nodes,
        notices=list(result.notices),
        theory_ok=result.theory_ok,
        csv=csv,
        report=report,
        svg_y=svg_y,
        svg_ybar=svg_ybar,
    )


class SweepModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "sweep"
    base: ScenarioModel
    axis: str
    values: list[float]
    complement: str | None = None

    def document(self) -> dict:
        doc = self.model_dump(exclude_none=True)
        doc["base"] = self.base.document()
        return doc


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sweep: SweepModel


class SweepResponse(BaseModel):
    name: str
    csv: str
    n_rows: int
    n_errors: int


class HealthResponse(BaseModel):
    status: str
    version: str


class ScenarioListResponse(BaseModel):
    scenarios: list[str]
