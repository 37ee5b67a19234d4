"""Domain types and the network SIR vector field.

The model couples n nodes through a nonnegative interaction matrix A:

    dx_i/dt = -x_i * sum_j A_ij y_j
    dy_i/dt =  x_i * sum_j A_ij y_j - gamma * y_i

with x_i the susceptible fraction and y_i the infected fraction in node i.
States live in the invariant set S = {0 <= x, 0 <= y, x + y <= 1}.

When A = a b^T with positive factors (rank-1 interaction), the dynamics
close over the weighted aggregates xbar = b.x, xtilde = (a*b).x, ybar = b.y,
which is what the whole limit/shape theory of the rest of the package uses.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, NotRankOne, OutOfSimplex, ZeroMatrix

# Clamp slack for invariant-set membership: integrator round-off may leave S
# by this much and gets clamped back; anything larger is a hard error.
EPS_S = 1e-12

# Default relative residual accepted when factoring a dense matrix as a b^T.
RANK1_TOL = 1e-9

# Dead band for sign tests on derived quantities (classification thresholds):
# |value| <= EPS_CLS is treated as zero.
EPS_CLS = 1e-10


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.array(v, dtype=float, copy=True)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatch(f"{name} must be a nonempty 1-d vector")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EpidemicParams:
    """Interaction structure plus recovery rate.

    Exactly one of (a, b) or matrix is set. Rank-1 params keep the caller's
    (a, b) scaling; aggregates are always computed in that parametrization.
    """

    gamma: float
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be a positive finite real")
        has_factors = self.a is not None or self.b is not None
        if has_factors == (self.matrix is not None):
            raise ValueError("give either rank-1 factors (a, b) or a dense matrix")
        if has_factors:
            if self.a is None or self.b is None:
                raise ValueError("rank-1 params need both a and b")
            a = _as_vector(self.a, "a")
            b = _as_vector(self.b, "b")
            if a.shape != b.shape:
                raise DimensionMismatch("a and b must have the same length")
            if np.any(a <= 0) or np.any(b <= 0):
                raise ValueError("rank-1 factors must be strictly positive")
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
        else:
            m = np.array(self.matrix, dtype=float, copy=True)
            if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
                raise DimensionMismatch("matrix must be square and nonempty")
            if not np.all(np.isfinite(m)):
                raise DimensionMismatch("matrix has non-finite entries")
            if np.any(m < 0):
                raise ValueError("matrix entries must be nonnegative")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    @staticmethod
    def rank_one(a, b, gamma: float) -> "EpidemicParams":
        return EpidemicParams(gamma=float(gamma), a=a, b=b)

    @staticmethod
    def dense(matrix, gamma: float) -> "EpidemicParams":
        return EpidemicParams(gamma=float(gamma), matrix=matrix)

    @property
    def n(self) -> int:
        return self.a.shape[0] if self.a is not None else self.matrix.shape[0]

    @property
    def is_rank_one(self) -> bool:
        return self.a is not None

    def dense_matrix(self) -> np.ndarray:
        """The full interaction matrix (outer product for rank-1 params)."""
        if self.is_rank_one:
            return np.outer(self.a, self.b)
        return self.matrix

    @cached_property
    def _dense_factors(self):
        return rank1_factorize(self.matrix)

    def rank_one_factors(self) -> tuple[np.ndarray, np.ndarray]:
        """Factors (a, b) for rank-1 analysis.

        Stored factors are returned as given; a dense matrix is factored with
        the 1^T b = 1 normalization. Raises NotRankOne when the matrix has no
        positive rank-1 factorization.
        """
        if self.is_rank_one:
            return self.a, self.b
        factors = self._dense_factors
        if factors is None:
            raise NotRankOne("interaction matrix is not rank-1 with positive factors")
        return factors


@dataclass(frozen=True, eq=False)
class State:
    """Susceptible and infected fraction vectors, one entry per node."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _as_vector(self.x, "x")
        y = _as_vector(self.y, "y")
        if x.shape != y.shape:
            raise DimensionMismatch("x and y must have the same length")
        if (x.min() < -EPS_S or y.min() < -EPS_S
                or x.max() > 1 + EPS_S or (x + y).max() > 1 + EPS_S):
            raise OutOfSimplex("state outside S by more than the clamp slack")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class Aggregates:
    """Weighted sums driving the rank-1 dynamics."""

    xbar: float    # b-weighted susceptibles
    xtilde: float  # (a*b)-weighted susceptibles, the reproduction driver
    ybar: float    # b-weighted infecteds


@dataclass(frozen=True, eq=False)
class StateDerivative:
    """Analytic time derivative of a State."""

    dx: np.ndarray
    dy: np.ndarray


def validate_state(p: EpidemicParams, x, y) -> State:
    """Build a State in S, clamping round-off violations up to EPS_S.

    Raises DimensionMismatch on wrong lengths and OutOfSimplex when any
    constraint is violated by more than EPS_S. Values inside S pass through
    exactly.
    """
    x = np.array(x, dtype=float, copy=True)
    y = np.array(y, dtype=float, copy=True)
    if x.shape != (p.n,) or y.shape != (p.n,):
        raise DimensionMismatch(f"state vectors must have length {p.n}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise OutOfSimplex("state has non-finite entries")
    if (x.min() < -EPS_S or y.min() < -EPS_S
            or x.max() > 1 + EPS_S or y.max() > 1 + EPS_S
            or (x + y).max() > 1 + EPS_S):
        raise OutOfSimplex("state outside S by more than the clamp slack")
    np.clip(x, 0.0, 1.0, out=x)
    np.clip(y, 0.0, 1.0, out=y)
    excess = x + y - 1.0
    over = excess > 0
    if np.any(over):
        y[over] = y[over] - excess[over]
        np.clip(y, 0.0, 1.0, out=y)
    return State(x=x, y=y)


def vector_field(p: EpidemicParams, s: State) -> StateDerivative:
    """Evaluate the SIR vector field at a state.

    Rank-1 params use the O(n) aggregate form a_i x_i ybar; dense params use
    the full matrix product. The two agree to round-off when A = a b^T.
    """
    if p.is_rank_one:
        ybar = float(p.b @ s.y)
        infection = p.a * s.x * ybar
    else:
        infection = s.x * (p.matrix @ s.y)
    return StateDerivative(dx=-infection, dy=infection - p.gamma * s.y)


def aggregates(p: EpidemicParams, s: State) -> Aggregates:
    """Weighted aggregates (xbar, xtilde, ybar) in the params' own (a, b)."""
    a, b = p.rank_one_factors()
    return Aggregates(
        xbar=float(b @ s.x),
        xtilde=float((a * b) @ s.x),
        ybar=float(b @ s.y),
    )


def w_values(p: EpidemicParams, s: State) -> np.ndarray:
    """Log-derivative of the new-infection rate: w_i = xtilde - gamma - a_i ybar."""
    a, b = p.rank_one_factors()
    agg = aggregates(p, s)
    return agg.xtilde - p.gamma - a * agg.ybar


def rank1_factorize(matrix, tol: float = RANK1_TOL):
    """Factor a nonnegative matrix as a b^T with a > 0, b > 0, 1^T b = 1.

    Picks the column with the largest sum as the a direction and reads b off
    the row with the largest entry in that column, then checks the residual
    max|A - a b^T| <= tol * max(A). Returns None when no positive rank-1
    factorization exists (any zero entry rules one out). Raises ZeroMatrix
    when the matrix has no positive entry at all.
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DimensionMismatch("matrix must be square and nonempty")
    if np.any(A < 0) or not np.all(np.isfinite(A)):
        raise ValueError("matrix must be nonnegative and finite")
    top = A.max()
    if top <= 0:
        raise ZeroMatrix("interaction matrix has no positive entry")
    if np.any(A <= 0):
        return None
    jstar = int(np.argmax(A.sum(axis=0)))
    a_raw = A[:, jstar]
    istar = int(np.argmax(a_raw))
    b_raw = A[istar, :] / a_raw[istar]
    if np.abs(A - np.outer(a_raw, b_raw)).max() > tol * top:
        return None
    scale = b_raw.sum()
    a = a_raw * scale
    b = b_raw / scale
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b
