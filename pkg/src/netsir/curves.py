"""Observed curve shapes: extrema detection and prediction verdicts.

Shape extraction works on the analytic derivative samples stored in a
Trajectory, never on finite differences of y itself: the classification
questions are sign questions about dy_i/dt, and the integrator already knows
that sign at machine accuracy at every sample. Each detected sign change is
sharpened by re-integration (refine_crossing) so event times are good to the
crossing tolerance rather than the sampling step.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .integrate import Trajectory, refine_crossing
from .model import State, vector_field
from .rank1 import CurveShape, ShapeKind

# Two opposite sign changes closer than this are treated as one numerical
# wiggle and cancelled.
_EVENT_MERGE_TOL = 1e-8


class ExtremumKind(Enum):
    LOCAL_MIN = "min"
    LOCAL_MAX = "max"


@dataclass(frozen=True)
class Event:
    """One monotonicity event of a node's infection curve.

    boundary marks the synthetic event at t = 0 that records the initial
    trend (a decreasing start is a boundary max, an increasing start a
    boundary min); all later events are interior extrema.
    """

    time: float
    kind: ExtremumKind
    boundary: bool = False


@dataclass(frozen=True)
class ExtremaList:
    """Ordered monotonicity events for node `node`, alternating min/max."""

    node: int
    events: tuple[Event, ...]

    def __post_init__(self):
        for prev, nxt in zip(self.events, self.events[1:]):
            if not prev.time < nxt.time:
                raise ValueError("event times must increase strictly")
            if prev.kind is nxt.kind:
                raise ValueError("event kinds must alternate")

    @property
    def interior_changes(self) -> int:
        return sum(1 for e in self.events if not e.boundary)

    def local_min_times(self) -> tuple[float, ...]:
        return tuple(e.time for e in self.events
                     if not e.boundary and e.kind is ExtremumKind.LOCAL_MIN)

    def local_max_times(self) -> tuple[float, ...]:
        return tuple(e.time for e in self.events
                     if not e.boundary and e.kind is ExtremumKind.LOCAL_MAX)


def detect_extrema(traj: Trajectory, i: int,
                   deriv_tol: float | None = None) -> ExtremaList:
    """Monotonicity events of t -> y_i(t) from analytic derivative signs.

    Samples of dy_i/dt within the dead band deriv_tol (default
    1e-9 * max_t |dy_i/dt|) count as zero. Every sign change between banded
    samples is refined by bisection re-integration. An all-banded derivative
    yields no events (constant curve).
    """
    if not 0 <= i < traj.n_nodes:
        raise ValueError(f"node index {i} out of range")
    dy = traj.dy[:, i]
    scale = float(np.abs(dy).max())
    if deriv_tol is None:
        deriv_tol = 1e-9 * scale
    if scale == 0.0:
        return ExtremaList(node=i, events=())
    signs = np.zeros(dy.shape, dtype=int)
    signs[dy > deriv_tol] = 1
    signs[dy < -deriv_tol] = -1
    nonzero = np.nonzero(signs)[0]
    if nonzero.size == 0:
        return ExtremaList(node=i, events=())

    first = int(nonzero[0])
    start_kind = (ExtremumKind.LOCAL_MAX if signs[first] < 0
                  else ExtremumKind.LOCAL_MIN)
    events = [Event(time=float(traj.times[0]), kind=start_kind, boundary=True)]

    def f(t: float, s: State, i=i) -> float:
        return float(vector_field(traj.params, s).dy[i])

    prev_k = first
    for k in nonzero[1:]:
        k = int(k)
        if signs[k] == signs[prev_k]:
            prev_k = k
            continue
        t_cross = refine_crossing(traj, f, (prev_k, k))
        kind = (ExtremumKind.LOCAL_MIN if signs[k] > 0
                else ExtremumKind.LOCAL_MAX)
        events.append(Event(time=t_cross, kind=kind))
        prev_k = k

    # cancel opposite events produced by one sub-tolerance wiggle
    cleaned: list[Event] = []
    for ev in events:
        if (cleaned and not cleaned[-1].boundary and not ev.boundary
                and ev.time - cleaned[-1].time < _EVENT_MERGE_TOL):
            cleaned.pop()
        else:
            cleaned.append(ev)
    return ExtremaList(node=i, events=tuple(cleaned))


def observed_shape(traj: Trajectory, i: int) -> CurveShape:
    """Shape tag realized by the sampled trajectory at node i.

    Patterns beyond the rank-1 catalogue (more than two interior events)
    come back as the Multimodal overflow tag carrying every interior peak
    time; that is an expected outcome for full-rank matrices and a theory
    violation for rank-1 ones, which tests assert on separately.
    """
    ext = detect_extrema(traj, i)
    ev = ext.events
    if len(ev) == 0:
        return CurveShape.constant()
    kinds = tuple(e.kind for e in ev)
    mn, mx = ExtremumKind.LOCAL_MIN, ExtremumKind.LOCAL_MAX
    if kinds == (mx,):
        return CurveShape.monotone_decreasing()
    if kinds == (mn,):
        return CurveShape.unimodal()
    if kinds == (mn, mx):
        return CurveShape.unimodal(peak_time=ev[1].time)
    if kinds == (mx, mn):
        return CurveShape.bimodal(min_time=ev[1].time)
    if kinds == (mx, mn, mx):
        return CurveShape.bimodal(min_time=ev[1].time, peak_time=ev[2].time)
    return CurveShape.multimodal(ext.local_max_times())


def aggregate_peak_time(traj: Trajectory) -> float | None:
    """Peak time of ybar: the first time xtilde drops to gamma.

    Returns 0 when xtilde(0) <= gamma (ybar never grows), None when xtilde
    stays above gamma through the whole sampled horizon (truncated run).
    """
    xt = traj.xtilde_series
    gamma = traj.params.gamma
    if xt[0] <= gamma:
        return 0.0
    below = np.nonzero(xt <= gamma)[0]
    if below.size == 0:
        return None
    k = int(below[0])

    def f(t: float, s: State) -> float:
        a, b = traj.params.rank_one_factors()
        return float((a * b) @ s.x) - gamma

    return refine_crossing(traj, f, (k - 1, k))


@dataclass(frozen=True)
class Verdict:
    """Outcome of checking an observed shape against a prediction."""

    passed: bool
    predicted: CurveShape
    observed: CurveShape
    reason: str

    def __str__(self) -> str:
        return ("Pass" if self.passed else "Fail") + f": {self.reason}"


def verify_prediction(predicted: CurveShape, observed: CurveShape) -> Verdict:
    """Pass when the observation realizes the prediction.

    An exact kind match passes (event times are informational, not part of
    the claim); an Undetermined prediction passes when the observed kind is
    in its admissible set; anything else fails with a diff message.
    """
    if predicted.kind is ShapeKind.UNDETERMINED:
        if observed.kind in predicted.admissible:
            return Verdict(True, predicted, observed,
                           f"observed {observed.kind.value} is admissible "
                           f"for {predicted.describe()}")
        return Verdict(False, predicted, observed,
                       f"observed {observed.kind.value} not in admissible set "
                       f"of {predicted.describe()}")
    if predicted.kind is observed.kind:
        return Verdict(True, predicted, observed,
                       f"observed {observed.describe()} matches prediction")
    return Verdict(False, predicted, observed,
                   f"predicted {predicted.describe()} but observed "
                   f"{observed.describe()}")
