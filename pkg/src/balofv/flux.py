"""Spatial discretization: minmod slopes, interface velocities, upwind fluxes.

The macrophage flux at a face is upwind in the velocity
theta = -(H(m_R) - H(m_L))/dx + chi * (c_x)_L / (1 + delta*m_L),
with H the diffusion enthalpy and (c_x)_L the limited cytokine slope of the
left cell; the transported value is the slope-reconstructed endpoint from the
upwind side, clamped at zero. The cytokine flux is a plain central difference
(the c equation is linear diffusion plus reaction, nothing to upwind).
2D is dimension by dimension: x faces use x slopes row by row, y faces use
y slopes column by column.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import DomainError, SolverError
from .grid import Grid, State, fill_ghost_neumann
from .model import ModelParams, chemo_sensitivity, diffusion_enthalpy


def minmod(values: Iterable[float]) -> float:
    """Smallest-magnitude value if all agree in sign, else zero."""
    vs = list(values)
    if not vs:
        raise DomainError("minmod needs at least one value")
    if all(v > 0.0 for v in vs):
        return min(vs)
    if all(v < 0.0 for v in vs):
        return max(vs)
    return 0.0


def limited_slope(u_left: float, u_center: float, u_right: float, dx: float, theta: float) -> float:
    """Minmod-limited slope at the center cell; zero at local extrema."""
    if dx <= 0.0:
        raise DomainError(f"dx must be positive, got {dx}")
    if not 0.0 <= theta <= 2.0:
        raise DomainError(f"theta must lie in [0, 2], got {theta}")
    return minmod(
        (
            theta * (u_center - u_left) / dx,
            (u_right - u_left) / (2.0 * dx),
            theta * (u_right - u_center) / dx,
        )
    )


def velocity_m(m_left, m_right, c_slope_left, dx: float, params: ModelParams):
    """Interface velocity: enthalpy drop plus saturated chemotactic drift."""
    if dx <= 0.0:
        raise DomainError(f"dx must be positive, got {dx}")
    h_l = diffusion_enthalpy(m_left, params)
    h_r = diffusion_enthalpy(m_right, params)
    return -(h_r - h_l) / dx + params.chi * c_slope_left * chemo_sensitivity(m_left, params)


def flux_m(theta_vel, m_left, m_right, slope_left, slope_right, dx: float):
    """Upwind macrophage flux with reconstructed, zero-clamped endpoint values."""
    if dx <= 0.0:
        raise DomainError(f"dx must be positive, got {dx}")
    half = 0.5 * dx
    recon_l = np.maximum(m_left + half * slope_left, 0.0)
    recon_r = np.maximum(m_right - half * slope_right, 0.0)
    return np.maximum(theta_vel, 0.0) * recon_l + np.minimum(theta_vel, 0.0) * recon_r


def flux_c(c_left, c_right, dx: float, params: ModelParams):
    """Central diffusive cytokine flux -alpha * (c_R - c_L) / dx."""
    if dx <= 0.0:
        raise DomainError(f"dx must be positive, got {dx}")
    return -params.alpha * (c_right - c_left) / dx


@dataclass
class FluxSet:
    """Interface fluxes and velocities per dimension, plus the limited slopes.

    Interface arrays have one more entry per line than the interior cell
    arrays. With theta_limiter = 0 all slopes vanish (first-order fallback).
    The *_y members are None for 1D grids.
    """

    theta_limiter: float
    fm_x: np.ndarray
    fc_x: np.ndarray
    vel_x: np.ndarray
    sm_x: np.ndarray
    sc_x: np.ndarray
    fm_y: Optional[np.ndarray] = None
    fc_y: Optional[np.ndarray] = None
    vel_y: Optional[np.ndarray] = None
    sm_y: Optional[np.ndarray] = None
    sc_y: Optional[np.ndarray] = None

    @property
    def max_abs_velocity(self) -> float:
        v = float(np.max(np.abs(self.vel_x)))
        if self.vel_y is not None:
            v = max(v, float(np.max(np.abs(self.vel_y))))
        return v

    def max_abs_velocity_per_dim(self) -> tuple[float, ...]:
        vx = float(np.max(np.abs(self.vel_x)))
        if self.vel_y is None:
            return (vx,)
        return (vx, float(np.max(np.abs(self.vel_y))))


def _minmod3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    mn = np.minimum(np.minimum(a, b), c)
    mx = np.maximum(np.maximum(a, b), c)
    return np.where(mn > 0.0, mn, 0.0) + np.where(mx < 0.0, mx, 0.0)


def _limited_slopes(u: np.ndarray, dx: float, theta: float) -> np.ndarray:
    """Minmod slopes along the last axis; first and last cells get zero."""
    d = (u[:, 1:] - u[:, :-1]) / dx
    s = np.zeros_like(u)
    s[:, 1:-1] = _minmod3(theta * d[:, :-1], 0.5 * (d[:, :-1] + d[:, 1:]), theta * d[:, 1:])
    return s


def _sweep(m: np.ndarray, c: np.ndarray, dx: float, g: int, params: ModelParams, theta: float):
    """Slopes, velocities and fluxes along the last axis of ghost-filled lines.

    Faces run from the left domain boundary to the right one, n+1 per line
    for n interior cells.
    """
    n_tot = m.shape[1]
    lo = slice(g - 1, n_tot - g)   # left cell of each face
    hi = slice(g, n_tot - g + 1)   # right cell of each face
    sm = _limited_slopes(m, dx, theta)
    sc = _limited_slopes(c, dx, theta)
    h = diffusion_enthalpy(m, params)
    vel = -(h[:, hi] - h[:, lo]) / dx + params.chi * sc[:, lo] * chemo_sensitivity(m[:, lo], params)
    half = 0.5 * dx
    recon_l = np.maximum(m[:, lo] + half * sm[:, lo], 0.0)
    recon_r = np.maximum(m[:, hi] - half * sm[:, hi], 0.0)
    fm = np.maximum(vel, 0.0) * recon_l + np.minimum(vel, 0.0) * recon_r
    fc = -params.alpha * (c[:, hi] - c[:, lo]) / dx
    return fm, fc, vel, sm, sc


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.isfinite(arr).all():
        idx = np.argwhere(~np.isfinite(arr))[0]
        raise SolverError(f"non-finite {name} at index {tuple(int(k) for k in idx)}")


def compute_fluxes(state: State, grid: Grid, params: ModelParams, theta: float) -> FluxSet:
    """Full flux sweep: ghost fill, slopes, velocities, fluxes per dimension.

    With mirrored ghosts the boundary faces see identical left/right states
    and a zero limited slope, so their fluxes are exactly zero.
    """
    if not 0.0 <= theta <= 2.0:
        raise DomainError(f"theta must lie in [0, 2], got {theta}")
    fill_ghost_neumann(state, grid)
    g = grid.ghost

    if grid.dim == 1:
        fm, fc, vel, sm, sc = _sweep(
            state.m[None, :], state.c[None, :], grid.dx, g, params, theta
        )
        fluxes = FluxSet(
            theta_limiter=theta,
            fm_x=fm[0],
            fc_x=fc[0],
            vel_x=vel[0],
            sm_x=sm[0, g:-g],
            sc_x=sc[0, g:-g],
        )
    else:
        rows = slice(g, -g)
        fm, fc, vel, sm, sc = _sweep(state.m[rows, :], state.c[rows, :], grid.dx, g, params, theta)
        m_t = np.ascontiguousarray(state.m[:, rows].T)
        c_t = np.ascontiguousarray(state.c[:, rows].T)
        fm_y, fc_y, vel_y, sm_y, sc_y = _sweep(m_t, c_t, grid.dy, g, params, theta)
        fluxes = FluxSet(
            theta_limiter=theta,
            fm_x=fm,
            fc_x=fc,
            vel_x=vel,
            sm_x=sm[:, g:-g],
            sc_x=sc[:, g:-g],
            fm_y=fm_y.T,
            fc_y=fc_y.T,
            vel_y=vel_y.T,
            sm_y=sm_y[:, g:-g].T,
            sc_y=sc_y[:, g:-g].T,
        )

    _check_finite("m flux (x)", fluxes.fm_x)
    _check_finite("c flux (x)", fluxes.fc_x)
    if grid.dim == 2:
        _check_finite("m flux (y)", fluxes.fm_y)
        _check_finite("c flux (y)", fluxes.fc_y)
    return fluxes
