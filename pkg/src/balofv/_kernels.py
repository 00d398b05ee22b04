"""Fused stage kernels for the time-step hot loop.

These duplicate the vectorized flux/RHS pipeline as tight loops so numba can
compile them; the numpy implementation in flux.py/integrator.py remains the
reference and the fallback when numba is unavailable. Equivalence of the two
paths is asserted in the test suite.

Each stage call fills the ghost layers in place, then writes the interior
time derivatives of (m, c, d) into caller-owned output arrays (whose ghost
entries must be zero and are never touched), returning the largest interface
speed per dimension for the CFL step.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is present in normal installs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        return deco if not (args and callable(args[0])) else args[0]


@njit(cache=True)
def _minmod3(a: float, b: float, c: float) -> float:
    if a > 0.0 and b > 0.0 and c > 0.0:
        return min(a, min(b, c))
    if a < 0.0 and b < 0.0 and c < 0.0:
        return max(a, max(b, c))
    return 0.0


@njit(cache=True)
def _enthalpy(mv: float, gamma: float, eps: float, linear: bool, eta_floor: float) -> float:
    s = mv + eps
    if linear:
        return math.log(s + eta_floor)
    e = gamma - 1.0
    coef = gamma / e
    if e == 1.0:
        return coef * s
    if e == 2.0:
        return coef * s * s
    return coef * s**e


@njit(cache=True)
def max_diffusivity(m: np.ndarray, gamma: float, eps: float, linear: bool) -> float:
    """Largest D_eps over a ghost-filled array (ghosts mirror the interior)."""
    if linear:
        return 1.0
    flat = m.reshape(-1)
    best = 0.0
    e = gamma - 1.0
    for k in range(flat.shape[0]):
        s = flat[k] + eps
        if e == 1.0:
            d = gamma * s
        elif e == 2.0:
            d = gamma * s * s
        else:
            d = gamma * s**e
        if d > best:
            best = d
    return best


@njit(cache=True)
def stage_1d(
    m, c, d, dm, dc, dd, h, sm, sc,
    dx, g, theta, gamma, chi, mu, delta, tau, alpha, lam, beta, r, eps,
    linear, eta_floor,
):
    n_tot = m.shape[0]
    for k in range(g):
        m[g - 1 - k] = m[g + k]
        c[g - 1 - k] = c[g + k]
        d[g - 1 - k] = d[g + k]
        m[n_tot - g + k] = m[n_tot - g - 1 - k]
        c[n_tot - g + k] = c[n_tot - g - 1 - k]
        d[n_tot - g + k] = d[n_tot - g - 1 - k]

    for i in range(n_tot):
        h[i] = _enthalpy(m[i], gamma, eps, linear, eta_floor)
    sm[0] = sm[n_tot - 1] = 0.0
    sc[0] = sc[n_tot - 1] = 0.0
    for i in range(1, n_tot - 1):
        dl = (m[i] - m[i - 1]) / dx
        dr = (m[i + 1] - m[i]) / dx
        sm[i] = _minmod3(theta * dl, 0.5 * (dl + dr), theta * dr)
        dl = (c[i] - c[i - 1]) / dx
        dr = (c[i + 1] - c[i]) / dx
        sc[i] = _minmod3(theta * dl, 0.5 * (dl + dr), theta * dr)

    for i in range(g, n_tot - g):
        mv = m[i]
        dm[i] = mu * mv * (1.0 - mv)
        dc[i] = (lam * d[i] - c[i] + beta * mv) / tau
        dd[i] = r * mv * (mv / (1.0 + delta * mv)) * (1.0 - d[i])

    vmax = 0.0
    half = 0.5 * dx
    i = g - 1
    vel = -(h[i + 1] - h[i]) / dx + chi * sc[i] * (1.0 / (1.0 + delta * m[i]))
    if abs(vel) > vmax:
        vmax = abs(vel)
    rl = m[i] + half * sm[i]
    rr = m[i + 1] - half * sm[i + 1]
    fl_m = vel * max(rl, 0.0) if vel > 0.0 else vel * max(rr, 0.0)
    fl_c = -alpha * (c[i + 1] - c[i]) / dx
    for i in range(g, n_tot - g):
        vel = -(h[i + 1] - h[i]) / dx + chi * sc[i] * (1.0 / (1.0 + delta * m[i]))
        if abs(vel) > vmax:
            vmax = abs(vel)
        rl = m[i] + half * sm[i]
        rr = m[i + 1] - half * sm[i + 1]
        fr_m = vel * max(rl, 0.0) if vel > 0.0 else vel * max(rr, 0.0)
        fr_c = -alpha * (c[i + 1] - c[i]) / dx
        dm[i] += -(fr_m - fl_m) / dx
        dc[i] += -((fr_c - fl_c) / dx) / tau
        fl_m = fr_m
        fl_c = fr_c
    return vmax


@njit(cache=True)
def stage_2d(
    m, c, d, dm, dc, dd, h, smx, scx, smy, scy,
    dx, dy, g, theta, gamma, chi, mu, delta, tau, alpha, lam, beta, r, eps,
    linear, eta_floor,
):
    ny_t, nx_t = m.shape
    for j in range(ny_t):
        for k in range(g):
            m[j, g - 1 - k] = m[j, g + k]
            c[j, g - 1 - k] = c[j, g + k]
            d[j, g - 1 - k] = d[j, g + k]
            m[j, nx_t - g + k] = m[j, nx_t - g - 1 - k]
            c[j, nx_t - g + k] = c[j, nx_t - g - 1 - k]
            d[j, nx_t - g + k] = d[j, nx_t - g - 1 - k]
    for i in range(nx_t):
        for k in range(g):
            m[g - 1 - k, i] = m[g + k, i]
            c[g - 1 - k, i] = c[g + k, i]
            d[g - 1 - k, i] = d[g + k, i]
            m[ny_t - g + k, i] = m[ny_t - g - 1 - k, i]
            c[ny_t - g + k, i] = c[ny_t - g - 1 - k, i]
            d[ny_t - g + k, i] = d[ny_t - g - 1 - k, i]

    for j in range(ny_t):
        for i in range(nx_t):
            h[j, i] = _enthalpy(m[j, i], gamma, eps, linear, eta_floor)

    for j in range(ny_t):
        smx[j, 0] = smx[j, nx_t - 1] = 0.0
        scx[j, 0] = scx[j, nx_t - 1] = 0.0
        for i in range(1, nx_t - 1):
            dl = (m[j, i] - m[j, i - 1]) / dx
            dr = (m[j, i + 1] - m[j, i]) / dx
            smx[j, i] = _minmod3(theta * dl, 0.5 * (dl + dr), theta * dr)
            dl = (c[j, i] - c[j, i - 1]) / dx
            dr = (c[j, i + 1] - c[j, i]) / dx
            scx[j, i] = _minmod3(theta * dl, 0.5 * (dl + dr), theta * dr)
    for i in range(nx_t):
        smy[0, i] = smy[ny_t - 1, i] = 0.0
        scy[0, i] = scy[ny_t - 1, i] = 0.0
    for j in range(1, ny_t - 1):
        for i in range(nx_t):
            dl = (m[j, i] - m[j - 1, i]) / dy
            dr = (m[j + 1, i] - m[j, i]) / dy
            smy[j, i] = _minmod3(theta * dl, 0.5 * (dl + dr), theta * dr)
            dl = (c[j, i] - c[j - 1, i]) / dy
            dr = (c[j + 1, i] - c[j, i]) / dy
            scy[j, i] = _minmod3(theta * dl, 0.5 * (dl + dr), theta * dr)

    for j in range(g, ny_t - g):
        for i in range(g, nx_t - g):
            mv = m[j, i]
            dm[j, i] = mu * mv * (1.0 - mv)
            dc[j, i] = (lam * d[j, i] - c[j, i] + beta * mv) / tau
            dd[j, i] = r * mv * (mv / (1.0 + delta * mv)) * (1.0 - d[j, i])

    vmax_x = 0.0
    half = 0.5 * dx
    for j in range(g, ny_t - g):
        i = g - 1
        vel = -(h[j, i + 1] - h[j, i]) / dx + chi * scx[j, i] * (1.0 / (1.0 + delta * m[j, i]))
        if abs(vel) > vmax_x:
            vmax_x = abs(vel)
        rl = m[j, i] + half * smx[j, i]
        rr = m[j, i + 1] - half * smx[j, i + 1]
        fl_m = vel * max(rl, 0.0) if vel > 0.0 else vel * max(rr, 0.0)
        fl_c = -alpha * (c[j, i + 1] - c[j, i]) / dx
        for i in range(g, nx_t - g):
            vel = -(h[j, i + 1] - h[j, i]) / dx + chi * scx[j, i] * (1.0 / (1.0 + delta * m[j, i]))
            if abs(vel) > vmax_x:
                vmax_x = abs(vel)
            rl = m[j, i] + half * smx[j, i]
            rr = m[j, i + 1] - half * smx[j, i + 1]
            fr_m = vel * max(rl, 0.0) if vel > 0.0 else vel * max(rr, 0.0)
            fr_c = -alpha * (c[j, i + 1] - c[j, i]) / dx
            dm[j, i] += -(fr_m - fl_m) / dx
            dc[j, i] += -((fr_c - fl_c) / dx) / tau
            fl_m = fr_m
            fl_c = fr_c

    vmax_y = 0.0
    half = 0.5 * dy
    for i in range(g, nx_t - g):
        j = g - 1
        vel = -(h[j + 1, i] - h[j, i]) / dy + chi * scy[j, i] * (1.0 / (1.0 + delta * m[j, i]))
        if abs(vel) > vmax_y:
            vmax_y = abs(vel)
        rl = m[j, i] + half * smy[j, i]
        rr = m[j + 1, i] - half * smy[j + 1, i]
        fl_m = vel * max(rl, 0.0) if vel > 0.0 else vel * max(rr, 0.0)
        fl_c = -alpha * (c[j + 1, i] - c[j, i]) / dy
        for j in range(g, ny_t - g):
            vel = -(h[j + 1, i] - h[j, i]) / dy + chi * scy[j, i] * (1.0 / (1.0 + delta * m[j, i]))
            if abs(vel) > vmax_y:
                vmax_y = abs(vel)
            rl = m[j, i] + half * smy[j, i]
            rr = m[j + 1, i] - half * smy[j + 1, i]
            fr_m = vel * max(rl, 0.0) if vel > 0.0 else vel * max(rr, 0.0)
            fr_c = -alpha * (c[j + 1, i] - c[j, i]) / dy
            dm[j, i] += -(fr_m - fl_m) / dy
            dc[j, i] += -((fr_c - fl_c) / dy) / tau
            fl_m = fr_m
            fl_c = fr_c
    return vmax_x, vmax_y
