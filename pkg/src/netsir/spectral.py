"""Dominant-eigenpair analysis and the scalar SIR toolkit.

The network model's equilibria (x*, 0) are probed through the dominant
eigenvalue of [x*]A (diag(x*) times the interaction matrix): the epidemic
re-ignites from an equilibrium exactly when that eigenvalue exceeds the
recovery rate. For rank-1 matrices the eigenvalue collapses to the weighted
aggregate xtilde, which is how the spectral view and the aggregate view of
the theory meet.

The scalar helpers cover the n=1 classical SIR model: its invariant of
motion beta*(x+y) - gamma*log(x) and the final-size equation it induces.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DimensionMismatch,
    InvalidInitialState,
    NoConvergence,
    NonpositiveSusceptibles,
)
from .model import EPS_CLS, EpidemicParams

# Successive left-iterate agreement (1-norm) that ends the power iteration.
_POWER_TOL = 1e-12
_POWER_CAP = 10**6


class ReducibleMatrixWarning(UserWarning):
    """The matrix's positivity graph is not strongly connected.

    Power iteration still converges thanks to the identity shift, but the
    dominant eigenvector may have zero entries in the limit and ties between
    isolated blocks are broken by the starting vector.
    """


@dataclass(frozen=True, eq=False)
class DominantPair:
    """Dominant eigenvalue and left eigenvector of a nonnegative matrix.

    v_max is normalized to sum 1 and satisfies v_max^T M = lambda_max v_max^T
    within a 1-norm residual of 1e-10.
    """

    lambda_max: float
    v_max: np.ndarray

    def __post_init__(self):
        self.v_max.setflags(write=False)


def _square_matrix(M) -> np.ndarray:
    A = np.array(M, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise DimensionMismatch("M must be a nonempty square matrix")
    if not np.all(np.isfinite(A)):
        raise DimensionMismatch("M has non-finite entries")
    if A.min() < 0:
        raise DimensionMismatch("M must be nonnegative")
    return A


def _is_strongly_connected(A: np.ndarray) -> bool:
    n_comp, _ = connected_components(csr_matrix(A > 0), directed=True,
                                     connection="strong")
    return n_comp == 1


def dominant_eig(M) -> DominantPair:
    """Dominant eigenvalue and left eigenvector of a nonnegative matrix.

    Runs power iteration on (M + I)^T: the identity shift makes the iteration
    aperiodic and keeps every iterate entrywise positive, so it converges for
    any nonnegative M. Iterates are sum-normalized and the loop ends when two
    successive iterates agree to 1e-12 in the 1-norm; the eigenvalue is the
    shifted estimate minus one. Warns (ReducibleMatrixWarning) when M is not
    irreducible. Raises NoConvergence after 1e6 iterations.
    """
    A = _square_matrix(M)
    n = A.shape[0]
    if not _is_strongly_connected(A):
        warnings.warn("matrix is reducible; dominant pair may be degenerate",
                      ReducibleMatrixWarning, stacklevel=2)
    Bt = A.T + np.eye(n)
    v = np.full(n, 1.0 / n)
    for _ in range(_POWER_CAP):
        w = Bt @ v
        total = w.sum()
        # total >= v.sum() = 1 because Bt has unit diagonal, so no /0 risk
        v_new = w / total
        if np.abs(v_new - v).sum() < _POWER_TOL:
            return DominantPair(lambda_max=float(total - 1.0), v_max=v_new)
        v = v_new
    raise NoConvergence(f"power iteration did not settle in {_POWER_CAP} steps")


def instability_check(p: EpidemicParams, x_star) -> bool:
    """Instability test for the equilibrium (x*, 0).

    True exactly when lambda_max([x*]A) > gamma + eps_cls, in which case the
    equilibrium is unstable (a vanishing infection re-ignites).
    """
    xs = np.asarray(x_star, dtype=float)
    if xs.shape != (p.n,):
        raise DimensionMismatch(f"x_star must have shape ({p.n},)")
    M = xs[:, None] * p.dense_matrix()
    pair = dominant_eig(M)
    return pair.lambda_max > p.gamma + EPS_CLS


def scalar_invariant(beta: float, gamma: float, x: float, y: float) -> float:
    """Invariant of motion of the scalar SIR model: beta*(x+y) - gamma*log x."""
    if not x > 0:
        raise NonpositiveSusceptibles(f"x must be positive, got {x}")
    return beta * (x + y) - gamma * np.log(x)


def scalar_final_size(beta: float, gamma: float, x0: float, y0: float) -> float:
    """Limit of x(t) for the scalar SIR model started at (x0, y0).

    Solves beta*x - gamma*log(x) = beta*(x0+y0) - gamma*log(x0) for the
    unique root in (0, gamma/beta]. The left-hand side is strictly decreasing
    there, so bisection applies once a sign bracket is found by pushing the
    left endpoint toward 0.
    """
    if not (beta > 0 and gamma > 0):
        raise InvalidInitialState("beta and gamma must be positive")
    if not x0 > 0:
        raise InvalidInitialState(f"x0 must be positive, got {x0}")
    if y0 < 0:
        raise InvalidInitialState(f"y0 must be nonnegative, got {y0}")
    hi = gamma / beta
    if y0 == 0.0 and beta * x0 <= gamma:
        return x0  # already an equilibrium inside the admissible interval
    c = scalar_invariant(beta, gamma, x0, y0)

    def F(x: float) -> float:
        return beta * x - gamma * np.log(x) - c

    f_hi = F(hi)
    if f_hi >= 0.0:
        # only reachable when (x0, y0) sits at the minimum of the invariant,
        # i.e. x0 = gamma/beta with y0 = 0, up to round-off
        return hi
    # F diverges as x -> 0+, so this endpoint brackets the root immediately;
    # the halving loop is a guard for extreme parameter scales
    lo = min(x0, hi) * 1e-16
    while F(lo) <= 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise NoConvergence("no sign bracket for the final-size equation")
    # bisect to full double precision (spec floor is 1e-12)
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid
        if F(mid) > 0.0:
            lo = mid
        else:
            hi = mid
