"""Trajectory integration and event-time refinement.

The integrator is an embedded Dormand-Prince 5(4) pair with PI step-size
control, marching exactly onto a uniform output grid so finite-difference
checks and extrema scans see evenly spaced samples. Derivatives are stored
analytically from the vector field at every sample, never by differencing.
A fixed-step classical RK4 integrator is kept alongside for cross-checks.

Event times (aggregate peak, derivative sign changes, w_i crossings) are
refined by bisection, re-integrating from the left bracket sample on each
probe, to a time tolerance of 1e-9.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NoSignChange, OutOfSimplex, StepSizeUnderflow
from .model import EpidemicParams, State, StateDerivative, vector_field

TIME_TOL = 1e-9  # bisection tolerance for refined event times

# Dormand-Prince 5(4) tableau. Row k of _A holds the stage-k combination
# coefficients; _B5 is the 5th-order solution, _E the embedded error weights
# (b5 - b4 including the FSAL stage).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    np.array([], dtype=float),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0
_PI_ALPHA = 0.7 / 5
_PI_BETA = 0.4 / 5


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and sampling policy for the adaptive integrator."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_step: float | None = None       # None: capped by sample_dt
    sample_dt: float = 0.05             # output grid spacing upper bound
    t_max: float | None = None          # None: 500 / gamma
    y_extinction_tol: float = 1e-10

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "sample_dt", "y_extinction_tol"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite")
        for name in ("max_step", "t_max"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive when given")

    def resolved_t_max(self, gamma: float) -> float:
        return self.t_max if self.t_max is not None else 500.0 / gamma


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled trajectory with analytic derivatives at samples."""

    params: EpidemicParams
    config: IntegratorConfig
    times: np.ndarray   # (m,)
    x: np.ndarray       # (m, n)
    y: np.ndarray       # (m, n)
    dx: np.ndarray      # (m, n)
    dy: np.ndarray      # (m, n)

    @property
    def n_samples(self) -> int:
        return self.times.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.x.shape[1]

    def state(self, k: int) -> State:
        return State(x=self.x[k], y=self.y[k])

    def deriv(self, k: int) -> StateDerivative:
        return StateDerivative(dx=self.dx[k], dy=self.dy[k])

    @cached_property
    def _factors(self):
        return self.params.rank_one_factors()

    @cached_property
    def xbar_series(self) -> np.ndarray:
        return self.x @ self._factors[1]

    @cached_property
    def xtilde_series(self) -> np.ndarray:
        a, b = self._factors
        return self.x @ (a * b)

    @cached_property
    def ybar_series(self) -> np.ndarray:
        return self.y @ self._factors[1]

    @cached_property
    def w_series(self) -> np.ndarray:
        """w_i(t_k) = xtilde(t_k) - gamma - a_i * ybar(t_k), shape (m, n)."""
        a, _ = self._factors
        return (self.xtilde_series - self.params.gamma)[:, None] - np.outer(self.ybar_series, a)


@dataclass(frozen=True, eq=False)
class ExtinctionResult:
    """Outcome of integrate_until_extinction."""

    trajectory: Trajectory
    final: State
    extinct: bool  # False means the t_max horizon was hit first

    @property
    def horizon_exceeded(self) -> bool:
        return not self.extinct


def _clamp_z(z: np.ndarray, n: int, slack: float) -> tuple[np.ndarray, bool]:
    """Pull round-off violations of S back onto its boundary.

    Violations up to slack are clamped; larger ones mean the integrator is
    not holding its tolerance and raise OutOfSimplex.
    """
    changed = False
    low = float(z.min())
    if low < 0.0:
        if low < -slack:
            raise OutOfSimplex(f"integrator left the invariant set by {-low:.3e}")
        z = np.where(z < 0.0, 0.0, z)
        changed = True
    x = z[:n]
    y = z[n:]
    hi = float(x.max())
    if hi > 1.0:
        if hi > 1.0 + slack:
            raise OutOfSimplex(f"integrator left the invariant set by {hi - 1.0:.3e}")
        x = np.minimum(x, 1.0)
        changed = True
    total = x + y
    over = float(total.max())
    if over > 1.0:
        if over > 1.0 + slack:
            raise OutOfSimplex(f"integrator left the invariant set by {over - 1.0:.3e}")
        y = np.where(total > 1.0, np.maximum(y - (total - 1.0), 0.0), y)
        changed = True
    if changed:
        z = np.concatenate((x, y))
    return z, changed


def _make_rhs(p: EpidemicParams):
    n = p.n
    gamma = p.gamma
    if p.is_rank_one:
        a, b = p.a, p.b

        def rhs(z):
            x = z[:n]
            y = z[n:]
            infection = a * x * (b @ y)
            return np.concatenate((-infection, infection - gamma * y))
    else:
        A = p.matrix

        def rhs(z):
            x = z[:n]
            y = z[n:]
            infection = x * (A @ y)
            return np.concatenate((-infection, infection - gamma * y))

    return rhs


class _Stepper:
    """Adaptive DP54 stepper over the concatenated state z = (x, y)."""

    def __init__(self, p: EpidemicParams, z0: np.ndarray, t0: float,
                 cfg: IntegratorConfig):
        self.n = p.n
        self.rhs = _make_rhs(p)
        self.t = t0
        self.z = z0.copy()
        self.cfg = cfg
        self.max_step = cfg.max_step if cfg.max_step is not None else cfg.sample_dt
        self.h = min(self.max_step, cfg.sample_dt) * 0.1
        self.err_prev = 1.0
        self.k1 = None
        # Undershoot below -slack means the controller is not actually
        # holding its tolerance; within the slack it is round-off and is
        # clamped back onto the boundary of S.
        self.slack = max(1e-12, 10.0 * cfg.abs_tol)

    def advance_to(self, t_target: float):
        """Step adaptively until t == t_target; returns the state vector."""
        while self.t < t_target - 1e-14 * (1.0 + abs(t_target)):
            remaining = t_target - self.t
            h = min(self.h, self.max_step, remaining)
            accepted = False
            while not accepted:
                if h < 1e-13 * max(1.0, abs(self.t)):
                    raise StepSizeUnderflow(
                        f"step size {h:.3e} underflow at t={self.t:.6g}")
                z_new, err, k_last = self._attempt(h)
                if err <= 1.0:
                    accepted = True
                else:
                    h *= max(0.1, min(1.0, _SAFETY * err ** (-0.2)))
            stepped_to = self.t + h
            clamped, changed = _clamp_z(z_new, self.n, self.slack)
            self.z = clamped
            self.t = t_target if abs(stepped_to - t_target) <= 1e-14 * (
                1.0 + abs(t_target)) else stepped_to
            self.k1 = None if changed else k_last
            if err == 0.0:
                fac = _FAC_MAX
            else:
                fac = _SAFETY * err ** (-_PI_ALPHA) * self.err_prev ** _PI_BETA
            self.h = h * min(_FAC_MAX, max(_FAC_MIN, fac))
            self.err_prev = max(err, 1e-4)
        return self.z

    def _attempt(self, h: float):
        if self.k1 is None:
            self.k1 = self.rhs(self.z)
        k = [self.k1]
        for stage in range(1, 7):
            zs = self.z + h * sum(c * ki for c, ki in zip(_A[stage], k))
            k.append(self.rhs(zs))
        z_new = self.z + h * sum(c * ki for c, ki in zip(_B5, k) if c != 0.0)
        err_vec = h * sum(c * ki for c, ki in zip(_E, k) if c != 0.0)
        scale = self.cfg.abs_tol + self.cfg.rel_tol * np.maximum(
            np.abs(self.z), np.abs(z_new))
        err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))
        return z_new, err, k[6]


def _uniform_grid(horizon: float, sample_dt: float) -> np.ndarray:
    m = max(1, math.ceil(horizon / sample_dt - 1e-12))
    return np.linspace(0.0, horizon, m + 1)


def _build_trajectory(p, cfg, times, zs) -> Trajectory:
    n = p.n
    arr = np.asarray(zs)
    x = arr[:, :n].copy()
    y = arr[:, n:].copy()
    m = x.shape[0]
    dx = np.empty_like(x)
    dy = np.empty_like(y)
    for k in range(m):
        d = vector_field(p, State(x=x[k], y=y[k]))
        dx[k] = d.dx
        dy[k] = d.dy
    t = np.asarray(times, dtype=float)
    for a in (t, x, y, dx, dy):
        a.setflags(write=False)
    return Trajectory(params=p, config=cfg, times=t, x=x, y=y, dx=dx, dy=dy)


def integrate(p: EpidemicParams, s0: State, horizon: float,
              cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate over [0, horizon] on a uniform grid of spacing <= sample_dt."""
    if not (np.isfinite(horizon) and horizon > 0):
        raise ValueError("horizon must be positive and finite")
    cfg = cfg or IntegratorConfig()
    grid = _uniform_grid(horizon, cfg.sample_dt)
    z0 = np.concatenate((s0.x, s0.y))
    stepper = _Stepper(p, z0, 0.0, cfg)
    zs = [z0.copy()]
    for t in grid[1:]:
        zs.append(stepper.advance_to(t).copy())
    return _build_trajectory(p, cfg, grid, zs)


def integrate_until_extinction(p: EpidemicParams, s0: State,
                               cfg: IntegratorConfig | None = None) -> ExtinctionResult:
    """Integrate until max_i y_i < y_extinction_tol or t reaches t_max.

    The returned flag says which condition stopped the run; hitting t_max is
    reported, not raised.
    """
    cfg = cfg or IntegratorConfig()
    t_max = cfg.resolved_t_max(p.gamma)
    n = p.n
    z0 = np.concatenate((s0.x, s0.y))
    tol = cfg.y_extinction_tol
    if float(np.max(z0[n:])) < tol:
        traj = _build_trajectory(p, cfg, np.array([0.0]), [z0])
        return ExtinctionResult(trajectory=traj, final=traj.state(0), extinct=True)
    grid = _uniform_grid(t_max, cfg.sample_dt)
    stepper = _Stepper(p, z0, 0.0, cfg)
    times = [0.0]
    zs = [z0.copy()]
    extinct = False
    for t in grid[1:]:
        z = stepper.advance_to(t)
        times.append(t)
        zs.append(z.copy())
        if float(np.max(z[n:])) < tol:
            extinct = True
            break
    traj = _build_trajectory(p, cfg, np.array(times), zs)
    return ExtinctionResult(trajectory=traj, final=traj.state(traj.n_samples - 1),
                            extinct=extinct)


def integrate_rk4(p: EpidemicParams, s0: State, horizon: float,
                  dt: float, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Fixed-step classical RK4 on the same uniform-grid contract.

    Cross-check integrator: one step per grid interval, no error control.
    """
    cfg = cfg or IntegratorConfig(sample_dt=dt)
    grid = _uniform_grid(horizon, dt)
    rhs = _make_rhs(p)
    z = np.concatenate((s0.x, s0.y))
    zs = [z.copy()]
    for k in range(grid.size - 1):
        h = grid[k + 1] - grid[k]
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * h * k1)
        k3 = rhs(z + 0.5 * h * k2)
        k4 = rhs(z + h * k3)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        z, _ = _clamp_z(z, p.n, 1e-9)
        zs.append(z.copy())
    return _build_trajectory(p, cfg, grid, zs)


def state_at(traj: Trajectory, t: float) -> State:
    """State at an arbitrary time, re-integrated from the nearest left sample."""
    times = traj.times
    if t < times[0] - 1e-12 or t > times[-1] + 1e-12:
        raise ValueError(f"time {t} outside the trajectory range")
    k = int(np.searchsorted(times, t, side="right")) - 1
    k = max(0, min(k, traj.n_samples - 1))
    if abs(times[k] - t) <= 1e-14 * (1.0 + abs(t)):
        return traj.state(k)
    z0 = np.concatenate((traj.x[k], traj.y[k]))
    stepper = _Stepper(traj.params, z0, float(times[k]), traj.config)
    z = stepper.advance_to(t)
    n = traj.params.n
    return State(x=z[:n], y=z[n:])


def refine_crossing(traj: Trajectory, f, bracket: tuple[int, int],
                    time_tol: float = TIME_TOL) -> float:
    """Refine the time where f(t, state) changes sign inside a sample bracket.

    f is a scalar function of (time, State). The bracket is a pair of sample
    indices (k_lo, k_hi) with opposite signs of f; every bisection probe
    re-integrates from the left bracket sample, so the result is independent
    of probe order. Raises NoSignChange when the endpoint signs agree.
    """
    k_lo, k_hi = bracket
    if not (0 <= k_lo < k_hi < traj.n_samples):
        raise ValueError(f"invalid bracket {bracket}")
    t_lo = float(traj.times[k_lo])
    t_hi = float(traj.times[k_hi])
    f_lo = float(f(t_lo, traj.state(k_lo)))
    f_hi = float(f(t_hi, traj.state(k_hi)))
    if f_lo == 0.0:
        return t_lo
    if f_hi == 0.0:
        return t_hi
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignChange(f"f has the same sign at both bracket ends "
                           f"({f_lo:.3e}, {f_hi:.3e})")
    anchor_k = k_lo
    anchor_t = t_lo
    z_anchor = np.concatenate((traj.x[anchor_k], traj.y[anchor_k]))
    n = traj.params.n
    while t_hi - t_lo > time_tol:
        t_mid = 0.5 * (t_lo + t_hi)
        stepper = _Stepper(traj.params, z_anchor, anchor_t, traj.config)
        z = stepper.advance_to(t_mid)
        s_mid = State(x=z[:n], y=z[n:])
        f_mid = float(f(t_mid, s_mid))
        if f_mid == 0.0:
            return t_mid
        if (f_mid > 0) == (f_lo > 0):
            t_lo, f_lo = t_mid, f_mid
        else:
            t_hi = t_mid
    return 0.5 * (t_lo + t_hi)
