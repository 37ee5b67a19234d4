"""Network SIR epidemic analysis.

Simulates the susceptible-infected-recovered dynamics on a weighted
interaction network, and for rank-1 interaction matrices computes the
invariants of motion, the limiting equilibrium, its stability, and the
qualitative shape of each node's infection curve directly from the
initial data.
"""
from .analysis import (
    DRIFT_BOUND,
    NodeAnalysis,
    ScenarioAnalysis,
    SweepRow,
    analyze_scenario,
    invariant_drift,
    run_sweep,
    sweep_workers,
)
from .curves import (
    Event,
    ExtremaList,
    ExtremumKind,
    Verdict,
    aggregate_peak_time,
    detect_extrema,
    observed_shape,
    verify_prediction,
)
from .errors import (
    DimensionMismatch,
    DomainExcluded,
    InvalidInitialState,
    NetsirError,
    NoConvergence,
    NonpositiveSusceptibles,
    NoSignChange,
    NotRankOne,
    NotSpecialForm,
    OutOfSimplex,
    ScenarioError,
    StepSizeUnderflow,
    SubcriticalAggregate,
    SupercriticalityRequired,
    ZeroMatrix,
)
from .integrate import (
    TIME_TOL,
    ExtinctionResult,
    IntegratorConfig,
    Trajectory,
    integrate,
    integrate_rk4,
    integrate_until_extinction,
    refine_crossing,
    state_at,
)
from .model import (
    EPS_CLS,
    EPS_S,
    RANK1_TOL,
    Aggregates,
    EpidemicParams,
    State,
    StateDerivative,
    aggregates,
    rank1_factorize,
    validate_state,
    vector_field,
    w_values,
)
from .rank1 import (
    CurveShape,
    EquilibriumReport,
    InvariantVector,
    MultimodalityReport,
    ShapeKind,
    StabilityTag,
    check_multimodality_conditions,
    classify_equilibrium,
    classify_node_curve,
    epsilon_bar,
    invariants_h,
    limit_state,
    peak_upper_bound,
    solve_phi,
    tbar_times,
)
from .scenarios import (
    ANALYSES,
    Scenario,
    SweepSpec,
    builtin_document,
    builtin_names,
    builtin_scenario,
    instantiate,
    loads_scenario,
    loads_sweep,
    parse_scenario,
    parse_sweep,
    serialize_scenario,
)
from .spectral import (
    DominantPair,
    ReducibleMatrixWarning,
    dominant_eig,
    instability_check,
    scalar_final_size,
    scalar_invariant,
)

__version__ = "0.1.0"

__all__ = [
    "ANALYSES",
    "Aggregates",
    "CurveShape",
    "DRIFT_BOUND",
    "DimensionMismatch",
    "DomainExcluded",
    "DominantPair",
    "EPS_CLS",
    "EPS_S",
    "EpidemicParams",
    "EquilibriumReport",
    "Event",
    "ExtinctionResult",
    "ExtremaList",
    "ExtremumKind",
    "IntegratorConfig",
    "InvalidInitialState",
    "InvariantVector",
    "MultimodalityReport",
    "NetsirError",
    "NoConvergence",
    "NoSignChange",
    "NodeAnalysis",
    "NonpositiveSusceptibles",
    "NotRankOne",
    "NotSpecialForm",
    "OutOfSimplex",
    "RANK1_TOL",
    "ReducibleMatrixWarning",
    "Scenario",
    "ScenarioAnalysis",
    "ScenarioError",
    "ShapeKind",
    "StabilityTag",
    "State",
    "StateDerivative",
    "StepSizeUnderflow",
    "SubcriticalAggregate",
    "SupercriticalityRequired",
    "SweepRow",
    "SweepSpec",
    "TIME_TOL",
    "Trajectory",
    "Verdict",
    "ZeroMatrix",
    "aggregate_peak_time",
    "aggregates",
    "analyze_scenario",
    "builtin_document",
    "builtin_names",
    "builtin_scenario",
    "check_multimodality_conditions",
    "classify_equilibrium",
    "classify_node_curve",
    "detect_extrema",
    "dominant_eig",
    "epsilon_bar",
    "instability_check",
    "instantiate",
    "integrate",
    "integrate_rk4",
    "integrate_until_extinction",
    "invariant_drift",
    "invariants_h",
    "limit_state",
    "loads_scenario",
    "loads_sweep",
    "observed_shape",
    "parse_scenario",
    "parse_sweep",
    "peak_upper_bound",
    "rank1_factorize",
    "refine_crossing",
    "run_sweep",
    "scalar_final_size",
    "scalar_invariant",
    "serialize_scenario",
    "solve_phi",
    "state_at",
    "sweep_workers",
    "tbar_times",
    "validate_state",
    "vector_field",
    "verify_prediction",
    "w_values",
]
