"""Semi-discrete right-hand side and SSP-RK3 time integration.

The step loop recomputes the CFL-limited time step every step, truncates the
final step to land on snapshot instants and the end time exactly, and clamps
m to [0, inf) and d to [0, 1] after every stage. Clamping is telemetry, not a
correctness crutch: under the default CFL number the scheme keeps both bounds
on its own and the clamp counters stay at zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import ConfigError, DomainError, SolverError
from .flux import FluxSet, compute_fluxes
from .grid import Grid, State, integrate_field, linf_norm
from .model import (
    LOG_ENTHALPY_FLOOR,
    DiffusionMode,
    ModelParams,
    damage_rate,
    diffusivity,
    reaction_c,
    reaction_m,
)

DT_FLOOR = 1e-14
TINY_VELOCITY = 1e-300


@dataclass(slots=True)
class StepStats:
    """Monitor payload recorded for each accepted step."""

    t: float
    dt: float
    max_abs_velocity: float
    min_m: float
    max_m: float
    mass_m: float
    linf_c: float
    max_d: float
    clamp_m: float = 0.0
    clamp_d: float = 0.0
    clamp_m_cells: int = 0
    clamp_d_cells: int = 0


@dataclass
class StateDerivative:
    """Time derivatives of the three fields, shaped like the state arrays."""

    dm: np.ndarray
    dc: np.ndarray
    dd: np.ndarray


def rhs(
    state: State,
    grid: Grid,
    params: ModelParams,
    theta: float,
    fluxes: Optional[FluxSet] = None,
) -> StateDerivative:
    """Flux divergences plus reactions. Ghost cells of the result stay zero."""
    if fluxes is None:
        fluxes = compute_fluxes(state, grid, params, theta)
    it = grid.interior
    m = state.m[it]
    c = state.c[it]
    d = state.d[it]

    if grid.dim == 1:
        dm_i = reaction_m(m, params) - (fluxes.fm_x[1:] - fluxes.fm_x[:-1]) / grid.dx
        dc_i = reaction_c(m, c, d, params) - ((fluxes.fc_x[1:] - fluxes.fc_x[:-1]) / grid.dx) / params.tau
    else:
        dm_i = reaction_m(m, params) - (fluxes.fm_x[:, 1:] - fluxes.fm_x[:, :-1]) / grid.dx
        dm_i -= (fluxes.fm_y[1:, :] - fluxes.fm_y[:-1, :]) / grid.dy
        dc_i = reaction_c(m, c, d, params) - ((fluxes.fc_x[:, 1:] - fluxes.fc_x[:, :-1]) / grid.dx) / params.tau
        dc_i -= ((fluxes.fc_y[1:, :] - fluxes.fc_y[:-1, :]) / grid.dy) / params.tau
    dd_i = damage_rate(m, d, params)

    for name, arr in (("dm", dm_i), ("dc", dc_i), ("dd", dd_i)):
        if not np.isfinite(arr).all():
            idx = np.argwhere(~np.isfinite(np.atleast_1d(arr)))[0]
            raise SolverError(f"non-finite {name} at cell {tuple(int(k) for k in idx)}")

    out = StateDerivative(
        dm=np.zeros(grid.shape), dc=np.zeros(grid.shape), dd=np.zeros(grid.shape)
    )
    out.dm[it] = dm_i
    out.dc[it] = dc_i
    out.dd[it] = dd_i
    return out


@dataclass(slots=True)
class ClampTotals:
    m_magnitude: float = 0.0
    d_magnitude: float = 0.0
    m_cells: int = 0
    d_cells: int = 0


def _clamp_stage(state: State, grid: Optional[Grid], totals: ClampTotals) -> None:
    it = grid.interior if grid is not None else ...
    mi = state.m[it]
    neg = mi < 0.0
    if np.any(neg):
        totals.m_magnitude += float(-mi[neg].sum())
        totals.m_cells += int(np.count_nonzero(neg))
        np.maximum(state.m, 0.0, out=state.m)
    di = state.d[it]
    outside = (di < 0.0) | (di > 1.0)
    if np.any(outside):
        totals.d_magnitude += float(np.abs(np.clip(di, 0.0, 1.0) - di).sum())
        totals.d_cells += int(np.count_nonzero(outside))
        np.clip(state.d, 0.0, 1.0, out=state.d)


def ssp_rk3_step(
    state: State,
    dt: float,
    rhs_fn: Callable[[State], StateDerivative],
    grid: Optional[Grid] = None,
) -> tuple[State, ClampTotals]:
    """One Shu-Osher SSP-RK3 step: three forward-Euler stages in convex combination.

    Each stage result is clamped (m >= 0, d in [0, 1]) with the clamped
    magnitude and cell count accumulated for telemetry.
    """
    if dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    totals = ClampTotals()

    k1 = rhs_fn(state)
    u1 = State(state.m + dt * k1.dm, state.c + dt * k1.dc, state.d + dt * k1.dd, state.t)
    _clamp_stage(u1, grid, totals)

    k2 = rhs_fn(u1)
    u2 = State(
        0.75 * state.m + 0.25 * (u1.m + dt * k2.dm),
        0.75 * state.c + 0.25 * (u1.c + dt * k2.dc),
        0.75 * state.d + 0.25 * (u1.d + dt * k2.dd),
        state.t,
    )
    _clamp_stage(u2, grid, totals)

    k3 = rhs_fn(u2)
    third = 1.0 / 3.0
    two_thirds = 2.0 / 3.0
    out = State(
        third * state.m + two_thirds * (u2.m + dt * k3.dm),
        third * state.c + two_thirds * (u2.c + dt * k3.dc),
        third * state.d + two_thirds * (u2.d + dt * k3.dd),
        state.t + dt,
    )
    _clamp_stage(out, grid, totals)
    return out, totals


def stable_dt(
    state: State,
    grid: Grid,
    params: ModelParams,
    cfl: float,
    fluxes: Optional[FluxSet] = None,
    theta: float = 1.5,
) -> float:
    """CFL step: cfl * min(dx/(2 max|vel|), dx^2/(2 (alpha + max D_eps(m)))).

    Both restrictions are taken per dimension in 2D and the minimum over
    dimensions wins. Raises if the step degenerates below 1e-14.
    """
    if not 0.0 < cfl <= 1.0:
        raise ConfigError(f"cfl must lie in (0, 1], got {cfl}")
    if fluxes is None:
        fluxes = compute_fluxes(state, grid, params, theta)
    d_max = float(np.max(diffusivity(state.m[grid.interior], params)))
    return _dt_from_extremes(fluxes.max_abs_velocity_per_dim(), d_max, grid, params, cfl)


def _dt_from_extremes(
    vmax: tuple[float, ...], d_max: float, grid: Grid, params: ModelParams, cfl: float
) -> float:
    spacings = (grid.dx,) if grid.dim == 1 else (grid.dx, grid.dy)
    advective = min(h / (2.0 * v + TINY_VELOCITY) for h, v in zip(spacings, vmax))
    parabolic = min(h * h for h in spacings) / (2.0 * (params.alpha + d_max))
    dt = cfl * min(advective, parabolic)
    if dt < DT_FLOOR:
        raise SolverError(f"degenerate time step dt={dt:.3e}; velocities blew up")
    return dt


def _make_rhs(grid: Grid, params: ModelParams, theta: float, base: State, fluxes: FluxSet):
    def f(s: State) -> StateDerivative:
        return rhs(s, grid, params, theta, fluxes if s is base else None)

    return f


class _FusedStepper:
    """Scratch buffers and dispatch for the compiled stage kernels.

    The derivative buffers are shared across stages: each stage consumes the
    previous derivative before the next kernel call overwrites it. Ghost
    entries of the output buffers stay zero (the kernels write interiors
    only), matching the numpy path.
    """

    def __init__(self, grid: Grid, params: ModelParams, theta: float):
        self.grid = grid
        self.params = params
        self.theta = float(theta)
        self.linear = params.diffusion_mode is DiffusionMode.LINEAR
        shape = grid.shape
        self.dm = np.zeros(shape)
        self.dc = np.zeros(shape)
        self.dd = np.zeros(shape)
        self.h = np.empty(shape)
        self.smx = np.empty(shape)
        self.scx = np.empty(shape)
        if grid.dim == 2:
            self.smy = np.empty(shape)
            self.scy = np.empty(shape)
        self.vmaxes: tuple[float, ...] = (0.0,)
        self.fresh_for: Optional[State] = None

    def derivative(self, state: State) -> StateDerivative:
        g = self.grid
        p = self.params
        if g.dim == 1:
            v = _kernels.stage_1d(
                state.m, state.c, state.d, self.dm, self.dc, self.dd,
                self.h, self.smx, self.scx,
                g.dx, g.ghost, self.theta, p.gamma, p.chi, p.mu, p.delta,
                p.tau, p.alpha, p.lam, p.beta, p.r, p.epsilon,
                self.linear, LOG_ENTHALPY_FLOOR,
            )
            self.vmaxes = (float(v),)
        else:
            vx, vy = _kernels.stage_2d(
                state.m, state.c, state.d, self.dm, self.dc, self.dd,
                self.h, self.smx, self.scx, self.smy, self.scy,
                g.dx, g.dy, g.ghost, self.theta, p.gamma, p.chi, p.mu,
                p.delta, p.tau, p.alpha, p.lam, p.beta, p.r, p.epsilon,
                self.linear, LOG_ENTHALPY_FLOOR,
            )
            self.vmaxes = (float(vx), float(vy))
        self.fresh_for = state
        return StateDerivative(self.dm, self.dc, self.dd)

    def rhs_fn(self, base: State):
        def f(s: State) -> StateDerivative:
            if s is base and self.fresh_for is base:
                return StateDerivative(self.dm, self.dc, self.dd)
            return self.derivative(s)

        return f

    def max_diffusivity(self, state: State) -> float:
        # ghosts mirror interior cells after the kernel's fill, so the full
        # (contiguous) array has the same maximum as the interior
        p = self.params
        return float(_kernels.max_diffusivity(state.m, p.gamma, p.epsilon, self.linear))


def _check_state_finite(state: State, grid: Grid) -> None:
    for name, arr in (("m", state.m), ("c", state.c), ("d", state.d)):
        interior = arr[grid.interior]
        if not np.isfinite(interior).all():
            idx = np.argwhere(~np.isfinite(np.atleast_1d(interior)))[0]
            raise SolverError(f"non-finite {name} at cell {tuple(int(k) for k in idx)}")


def _collect_stats(cur: State, grid: Grid, dt: float, vmax: float, cl: ClampTotals) -> StepStats:
    it = grid.interior
    mi = cur.m[it]
    return StepStats(
        t=cur.t,
        dt=dt,
        max_abs_velocity=vmax,
        min_m=float(mi.min()),
        max_m=float(mi.max()),
        mass_m=integrate_field(cur.m, grid),
        linf_c=linf_norm(cur.c, grid),
        max_d=float(cur.d[it].max()),
        clamp_m=cl.m_magnitude,
        clamp_d=cl.d_magnitude,
        clamp_m_cells=cl.m_cells,
        clamp_d_cells=cl.d_cells,
    )


def advance_to(
    state: State,
    t_end: float,
    grid: Grid,
    params: ModelParams,
    config,
    on_snapshot: Optional[Callable[[State], None]] = None,
    step_monitor: Optional[Callable[[State, State, StepStats], None]] = None,
    fixed_dt: Optional[float] = None,
    fast: bool = True,
) -> tuple[State, list[StepStats]]:
    """Advance to t_end, landing on every configured snapshot instant exactly.

    ``config`` provides cfl, theta_limiter and snapshot_times. The input
    state is not modified. ``on_snapshot`` is called as each snapshot instant
    is reached, so a partial snapshot set survives a mid-run abort.
    ``step_monitor(previous, current, stats)`` runs after every accepted step.
    ``fixed_dt`` bypasses the CFL computation (still truncated at targets).
    ``fast=False`` forces the vectorized reference path even when the
    compiled kernels are available; both paths produce identical states.
    """
    if t_end < state.t:
        raise DomainError(f"t_end={t_end} lies before state time {state.t}")
    if fixed_dt is not None and fixed_dt <= 0.0:
        raise DomainError(f"fixed_dt must be positive, got {fixed_dt}")

    snap_times = sorted(t for t in config.snapshot_times if state.t < t <= t_end)
    targets = sorted(set(snap_times) | {t_end})
    cur = state.copy()
    stats: list[StepStats] = []
    stepper = _FusedStepper(grid, params, config.theta_limiter) if fast and _kernels.HAVE_NUMBA else None

    for target in targets:
        while cur.t < target:
            if stepper is not None:
                stepper.derivative(cur)
                vmax_step = max(stepper.vmaxes)
                if fixed_dt is None:
                    dt = _dt_from_extremes(
                        stepper.vmaxes, stepper.max_diffusivity(cur), grid, params, config.cfl
                    )
                else:
                    dt = fixed_dt
                rhs_fn = stepper.rhs_fn(cur)
            else:
                fluxes = compute_fluxes(cur, grid, params, config.theta_limiter)
                vmax_step = fluxes.max_abs_velocity
                if fixed_dt is None:
                    dt = stable_dt(cur, grid, params, config.cfl, fluxes=fluxes)
                else:
                    dt = fixed_dt
                rhs_fn = _make_rhs(grid, params, config.theta_limiter, cur, fluxes)
            remaining = target - cur.t
            hits_target = dt >= remaining
            if hits_target:
                dt = remaining
            prev = cur.copy() if step_monitor is not None else None
            nxt, clamps = ssp_rk3_step(cur, dt, rhs_fn, grid)
            nxt.t = target if hits_target else cur.t + dt
            cur = nxt
            if stepper is not None:
                _check_state_finite(cur, grid)
            stats.append(_collect_stats(cur, grid, dt, vmax_step, clamps))
            if step_monitor is not None:
                step_monitor(prev, cur, stats[-1])
        if on_snapshot is not None and target in snap_times:
            on_snapshot(cur)
    return cur, stats
