"""Scenario and sweep documents: parsing, serialization, built-ins.

A scenario is a JSON document with the interaction structure (rank-1 `a`/`b`
or dense `A`, row-major), recovery rate, initial state, optional horizon
(null runs to extinction), optional integrator overrides, and the set of
analyses to perform. Sweeps wrap a base scenario with an axis path like
`params.gamma` or `initial.y[0]`, a value list, and an optional complement
path that receives 1 - value so paired coordinates can stay on the
x + y = 1 manifold.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ScenarioError
from .integrate import IntegratorConfig
from .model import EpidemicParams, State

ANALYSES = frozenset({"simulate", "classify", "limit", "multimodality",
                      "spectral"})

_INTEGRATOR_FIELDS = ("abs_tol", "rel_tol", "max_step", "sample_dt", "t_max",
                      "y_extinction_tol")

_AXIS_RE = re.compile(
    r"^(?:horizon"
    r"|params\.gamma"
    r"|params\.(?:a|b)\[(?P<pidx>\d+)\]"
    r"|initial\.(?:x|y)\[(?P<sidx>\d+)\])$")


@dataclass(frozen=True)
class Scenario:
    """A named, fully specified simulation-and-analysis job."""

    name: str
    params: EpidemicParams
    initial: State
    horizon: float | None = None  # None runs to extinction
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    analyses: frozenset[str] = ANALYSES

    def __post_init__(self):
        if self.initial.n != self.params.n:
            raise ScenarioError(
                f"initial state has {self.initial.n} nodes, params have "
                f"{self.params.n}")
        if self.horizon is not None and not self.horizon > 0:
            raise ScenarioError(f"horizon must be positive, got {self.horizon}")
        unknown = self.analyses - ANALYSES
        if unknown:
            raise ScenarioError(f"unknown analyses: {sorted(unknown)}")


@dataclass(frozen=True)
class SweepSpec:
    """A scenario family generated by moving one parameter over a value list."""

    name: str
    base: Scenario
    axis: str
    values: tuple[float, ...]
    complement: str | None = None

    def __post_init__(self):
        for path in (self.axis,) + ((self.complement,) if self.complement else ()):
            if _AXIS_RE.match(path) is None:
                raise ScenarioError(f"unsupported axis path: {path!r}")


def _require(doc: dict, key: str):
    if key not in doc:
        raise ScenarioError(f"scenario document lacks required key {key!r}")
    return doc[key]


def _vector(doc: dict, key: str) -> list[float]:
    v = _require(doc, key)
    if not isinstance(v, list) or not v or not all(
            isinstance(u, (int, float)) and not isinstance(u, bool) for u in v):
        raise ScenarioError(f"{key!r} must be a nonempty list of numbers")
    return [float(u) for u in v]


def parse_scenario(doc: dict) -> Scenario:
    """Validate a scenario document and build the typed Scenario."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    name = doc.get("name", "scenario")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name must be a nonempty string")
    gamma = _require(doc, "gamma")
    has_factors = "a" in doc or "b" in doc
    has_dense = "A" in doc
    if has_factors == has_dense:
        raise ScenarioError("specify either rank-1 factors a, b or a dense "
                            "matrix A, not both")
    try:
        if has_factors:
            params = EpidemicParams.rank_one(gamma=float(gamma),
                                             a=_vector(doc, "a"),
                                             b=_vector(doc, "b"))
        else:
            A = _require(doc, "A")
            params = EpidemicParams.dense(gamma=float(gamma),
                                          matrix=np.array(A, dtype=float))
        initial = State(x=_vector(doc, "x0"), y=_vector(doc, "y0"))
    except ScenarioError:
        raise
    except Exception as exc:
        raise ScenarioError(f"invalid scenario data: {exc}") from exc
    horizon = doc.get("horizon")
    if horizon is not None:
        horizon = float(horizon)
    cfg_doc = doc.get("integrator") or {}
    if not isinstance(cfg_doc, dict):
        raise ScenarioError("integrator must be an object")
    unknown = set(cfg_doc) - set(_INTEGRATOR_FIELDS)
    if unknown:
        raise ScenarioError(f"unknown integrator fields: {sorted(unknown)}")
    try:
        integrator = IntegratorConfig(**{
            k: (None if v is None else float(v)) for k, v in cfg_doc.items()})
    except Exception as exc:
        raise ScenarioError(f"invalid integrator config: {exc}") from exc
    analyses_doc = doc.get("analyses")
    if analyses_doc is None:
        analyses = ANALYSES
    else:
        if (not isinstance(analyses_doc, list)
                or not all(isinstance(s, str) for s in analyses_doc)):
            raise ScenarioError("analyses must be a list of strings")
        analyses = frozenset(analyses_doc)
    try:
        return Scenario(name=name, params=params, initial=initial,
                        horizon=horizon, integrator=integrator,
                        analyses=analyses)
    except ScenarioError:
        raise
    except Exception as exc:
        raise ScenarioError(f"invalid scenario: {exc}") from exc


def serialize_scenario(sc: Scenario) -> dict:
    """Scenario back to its document form; parse(serialize(sc)) == sc."""
    doc: dict = {"name": sc.name, "gamma": float(sc.params.gamma)}
    if sc.params.is_rank_one:
        a, b = sc.params.rank_one_factors()
        doc["a"] = a.tolist()
        doc["b"] = b.tolist()
    else:
        doc["A"] = sc.params.dense_matrix().tolist()
    doc["x0"] = sc.initial.x.tolist()
    doc["y0"] = sc.initial.y.tolist()
    doc["horizon"] = sc.horizon
    defaults = IntegratorConfig()
    overrides = {k: getattr(sc.integrator, k) for k in _INTEGRATOR_FIELDS
                 if getattr(sc.integrator, k) != getattr(defaults, k)}
    if overrides:
        doc["integrator"] = overrides
    doc["analyses"] = sorted(sc.analyses)
    return doc


def parse_sweep(doc: dict) -> SweepSpec:
    """Validate a sweep document and build the typed SweepSpec."""
    if not isinstance(doc, dict):
        raise ScenarioError("sweep document must be a JSON object")
    name = doc.get("name", "sweep")
    base = parse_scenario(_require(doc, "base"))
    axis = _require(doc, "axis")
    if not isinstance(axis, str):
        raise ScenarioError("axis must be a string path")
    values = _require(doc, "values")
    if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool)
            for v in values):
        raise ScenarioError("values must be a list of numbers")
    complement = doc.get("complement")
    if complement is not None and not isinstance(complement, str):
        raise ScenarioError("complement must be a string path")
    return SweepSpec(name=name, base=base, axis=axis,
                     values=tuple(float(v) for v in values),
                     complement=complement)


def _apply_axis(doc: dict, path: str, value: float) -> None:
    m = _AXIS_RE.match(path)
    if m is None:
        raise ScenarioError(f"unsupported axis path: {path!r}")
    if path == "horizon":
        doc["horizon"] = value
    elif path == "params.gamma":
        doc["gamma"] = value
    elif m.group("pidx") is not None:
        key = "a" if ".a[" in path else "b"
        idx = int(m.group("pidx"))
        vec = doc.get(key)
        if not isinstance(vec, list) or not 0 <= idx < len(vec):
            raise ScenarioError(f"axis {path!r} does not address the scenario")
        vec[idx] = value
    else:
        key = "x0" if ".x[" in path else "y0"
        idx = int(m.group("sidx"))
        vec = doc.get(key)
        if not isinstance(vec, list) or not 0 <= idx < len(vec):
            raise ScenarioError(f"axis {path!r} does not address the scenario")
        vec[idx] = value


def instantiate(spec: SweepSpec, value: float) -> Scenario:
    """The sweep's base scenario with the axis (and complement) applied."""
    doc = serialize_scenario(spec.base)
    _apply_axis(doc, spec.axis, value)
    if spec.complement is not None:
        _apply_axis(doc, spec.complement, 1.0 - value)
    sc = parse_scenario(doc)
    return replace(sc, name=f"{spec.base.name}[{spec.axis}={value:g}]")


def loads_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file is not valid JSON: {exc}") from exc
    return parse_scenario(doc)


def loads_sweep(text: str) -> SweepSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"sweep file is not valid JSON: {exc}") from exc
    return parse_sweep(doc)


def builtin_names() -> tuple[str, ...]:
    return ("example1", "fig2", "fig5")


def builtin_document(name: str) -> dict:
    """Built-in scenario documents reproducing the reference experiments."""
    if name == "example1":
        # two nodes, uniform contact, node 2 fully susceptible; the node-1
        # curve dips and then rebounds into a second wave
        return {
            "name": "example1",
            "gamma": 1.0,
            "a": [1.0, 1.0],
            "b": [1.0, 1.0],
            "x0": [0.85, 1.0],
            "y0": [0.15, 0.0],
            "horizon": 40.0,
            "analyses": sorted(ANALYSES),
        }
    if name == "fig2":
        # five nodes with heterogeneous rank-1 coupling, run to extinction
        return {
            "name": "fig2",
            "gamma": 0.6,
            "a": [0.1, 0.25, 0.6, 1.0, 0.2],
            "b": [0.45, 0.4, 0.6, 0.65, 0.01],
            "x0": [0.85, 0.999, 0.8, 1.0, 0.75],
            "y0": [0.15, 0.001, 0.2, 0.0, 0.25],
            "horizon": None,
            "analyses": sorted(ANALYSES),
        }
    if name == "fig5":
        # four nodes, full-rank matrix: node 1 shows three separate waves,
        # beyond what any rank-1 coupling allows
        return {
            "name": "fig5",
            "gamma": 0.5,
            "A": [[0.05, 0.07, 0.05, 0.05],
                  [0.0001, 0.8, 0.0001, 0.0001],
                  [0.0001, 0.0001, 0.1, 0.0001],
                  [0.01, 0.01, 0.01, 0.9]],
            "x0": [1.0, 1.0, 0.9, 1.0],
            "y0": [0.0, 0.0, 0.1, 0.0],
            "horizon": None,
            "analyses": sorted(ANALYSES),
        }
    raise ScenarioError(f"unknown built-in scenario {name!r}")


def builtin_scenario(name: str) -> Scenario:
    return parse_scenario(builtin_document(name))
