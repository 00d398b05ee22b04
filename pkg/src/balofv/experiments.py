"""Named, reproducible experiment drivers.

Every driver is a pure function of its config: reports carry no timestamps
or absolute paths, so re-running yields byte-identical output. Independent
runs inside a study may execute on a small thread pool; results are joined
in a fixed order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import fileio
from .config import (
    SNAPSHOT_FRACTIONS,
    RunConfig,
    config_digest,
    grid_from_config,
    initial_state,
    snapshot_meta,
    with_params,
)
from .errors import ConfigError, SolverError
from .grid import Grid, State, fill_ghost_neumann, integrate_field
from .integrator import StepStats, advance_to
from .model import DiffusionMode, chemo_sensitivity, diffusivity, reaction_m
from .report import ExperimentReport

# Front metric: measure of {m > threshold}; above clamp noise, below O(1) dynamics.
SUPPORT_THRESHOLD = 1e-3
# Slack for the cellwise "d never decreases where m > 0" monitor (convex RK
# combinations may lose one ulp).
D_MONOTONE_TOL = 1e-12
# Minimal rise and fall around a radial-profile local maximum.
RING_PROMINENCE = 1e-3
# A sup-norm series counts as "still growing" only when it increases at every
# step of the final half AND gains more than this fraction of its value;
# fields settling into an equilibrium creep up by far less.
GROWTH_RTOL = 0.5
D_BARRIER = "<=" + repr(1.0 + 1e-12)

FIGURE_CHI_VALUES = (4.0, 10.0)
TEMPORAL_UNIFORM = (0.5, 0.2, 0.1)
# The temporal study isolates the time integrator on a uniform state, so it
# runs over a fixed unit-scale horizon regardless of the config's t_end
# (which the spatial study keeps short to stay affordable on refined grids).
TEMPORAL_HORIZON = 2.0


@dataclass
class SimResult:
    grid: Grid
    final: State
    stats: list[StepStats]
    snapshots: list[State]


def simulate(
    cfg: RunConfig,
    collect_snapshots: bool = False,
    step_monitor=None,
    fixed_dt: Optional[float] = None,
    initial: Optional[State] = None,
    on_snapshot=None,
) -> SimResult:
    """Run one configuration to t_end; optionally keep snapshot copies."""
    grid = grid_from_config(cfg)
    state0 = initial if initial is not None else initial_state(cfg, grid)
    snaps: list[State] = []

    def callback(s: State) -> None:
        if collect_snapshots:
            snaps.append(s.copy())
        if on_snapshot is not None:
            on_snapshot(s)

    cb = callback if (collect_snapshots or on_snapshot is not None) else None
    final, stats = advance_to(
        state0, cfg.t_end, grid, cfg.params, cfg,
        on_snapshot=cb, step_monitor=step_monitor, fixed_dt=fixed_dt,
    )
    return SimResult(grid, final, stats, snaps)


def _map_runs(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _uniform_state(grid: Grid, values: tuple[float, float, float]) -> State:
    m0, c0, d0 = values
    state = State(
        np.full(grid.shape, m0), np.full(grid.shape, c0), np.full(grid.shape, d0)
    )
    return fill_ghost_neumann(state, grid)


def support_width(state: State, grid: Grid, threshold: float = SUPPORT_THRESHOLD) -> float:
    """Measure of the region where m exceeds the threshold."""
    return float(np.count_nonzero(state.m[grid.interior] > threshold) * grid.cell_volume)


def radial_average(field: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Annulus averages of an interior 2D field about the domain center."""
    if grid.dim != 2:
        raise ConfigError("radial_average needs a 2D grid")
    x = grid.centers_x() - 0.5 * grid.lx
    y = grid.centers_y() - 0.5 * grid.ly
    rr = np.sqrt(x[None, :] ** 2 + y[:, None] ** 2)
    dr = max(grid.dx, grid.dy)
    nbins = int(0.5 * min(grid.lx, grid.ly) / dr)
    idx = (rr / dr).astype(int)
    mask = idx < nbins
    counts = np.bincount(idx[mask], minlength=nbins)
    sums = np.bincount(idx[mask], weights=field[mask], minlength=nbins)
    prof = np.divide(sums, counts, out=np.zeros(nbins), where=counts > 0)
    centers = (np.arange(nbins) + 0.5) * dr
    return centers, prof


def count_interior_maxima(profile: np.ndarray, prominence: float = RING_PROMINENCE) -> int:
    """Interior local maxima of a profile, plateau-aware.

    A maximum is a rise by more than the prominence followed by a fall by
    more than it; a maximal plateau at the first or last sample does not
    count as interior.
    """
    count = 0
    trend = 0  # 0 unknown, +1 rising, -1 falling
    hi = lo = profile[0]
    for v in profile[1:]:
        if trend == 1:
            hi = max(hi, v)
        elif trend == -1:
            lo = min(lo, v)
        if trend <= 0 and v > lo + prominence:
            trend = 1
            hi = v
        elif trend >= 0 and v < hi - prominence:
            if trend == 1:
                count += 1
            trend = -1
            lo = v
    return count


# ---------------------------------------------------------------------------
# invariant audit


def run_invariant_audit(config: RunConfig) -> ExperimentReport:
    """Advance the configured run while checking the analytic invariants.

    Metrics: solver completion, positivity of m with zero clamp activity,
    the d <= 1 barrier and cellwise monotonicity of d where m > 0,
    nonnegativity of c, the mass law (conservation for mu = 0, the logistic
    bound otherwise), and sup-norm ceilings with a no-monotone-growth check
    over the final half of the run. Solver aborts become failed metrics.
    """
    rep = ExperimentReport(config.experiment or "audit", config_digest(config))
    grid = grid_from_config(config)
    state0 = initial_state(config, grid)
    mass0 = integrate_field(state0.m, grid)
    it = grid.interior

    watch = {"min_c": math.inf, "d_drops": 0}

    def monitor(prev: State, cur: State, _stats: StepStats) -> None:
        watch["min_c"] = min(watch["min_c"], float(cur.c[it].min()))
        active = prev.m[it] > 0.0
        if np.any(active):
            delta = (cur.d[it] - prev.d[it])[active]
            watch["d_drops"] += int(np.count_nonzero(delta < -D_MONOTONE_TOL))

    try:
        res = simulate(config, initial=state0, step_monitor=monitor)
        completed = 1.0
    except SolverError:
        res = None
        completed = 0.0
    rep.add("solver_completed", completed, ">=1")
    if res is None:
        return rep

    stats = res.stats
    rep.add("steps", float(len(stats)), ">=1")
    rep.add("min_m", min(s.min_m for s in stats), ">=0")
    rep.add("clamp_m_cells", float(sum(s.clamp_m_cells for s in stats)), "<=0")
    rep.add("clamp_d_cells", float(sum(s.clamp_d_cells for s in stats)), "<=0")
    rep.add("max_d", max(s.max_d for s in stats), D_BARRIER)
    rep.add("d_monotonicity_violations", float(watch["d_drops"]), "<=0")
    rep.add("min_c", watch["min_c"], ">=-1e-14")

    masses = [s.mass_m for s in stats]
    if config.params.mu == 0.0:
        denom = mass0 if mass0 > 0.0 else 1.0
        drift = max(abs(m - mass0) for m in masses) / denom
        rep.add("mass_drift_rel", drift, "<=1e-10")
    else:
        bound = max(mass0, grid.measure) * (1.0 + 1e-6)
        rep.add("mass_max", max(masses), "<=" + repr(bound))

    # d is bounded by the barrier above (and is nondecreasing by design), so
    # the still-growing check applies to m and c only
    rep.add("linf_d_ceiling", max(s.max_d for s in stats), "none")
    for label, series in (
        ("m", [s.max_m for s in stats]),
        ("c", [s.linf_c for s in stats]),
    ):
        rep.add(f"linf_{label}_ceiling", max(series), "none")
        tail = series[len(series) // 2 :]
        growing = (
            len(tail) > 1
            and all(b > a for a, b in zip(tail, tail[1:]))
            and tail[-1] - tail[0] > GROWTH_RTOL * max(abs(tail[0]), 1e-300)
        )
        rep.add(f"linf_{label}_monotone_growth", 1.0 if growing else 0.0, "<=0")
    return rep


# ---------------------------------------------------------------------------
# convergence study


def _refine_space(cfg: RunConfig, factor: int) -> RunConfig:
    changes = {"nx": cfg.nx * factor, "snapshot_times": ()}
    if cfg.dimension == 2:
        changes["ny"] = cfg.ny * factor
    return replace(cfg, **changes)


def _restrict(fine: np.ndarray, factor: int = 2) -> np.ndarray:
    """Block-average a fine interior field onto the next coarser grid."""
    if fine.ndim == 1:
        return fine.reshape(-1, factor).mean(axis=1)
    ny, nx = fine.shape
    return fine.reshape(ny // factor, factor, nx // factor, factor).mean(axis=(1, 3))


def _field_interiors(state: State, grid: Grid) -> dict[str, np.ndarray]:
    it = grid.interior
    return {"m": state.m[it], "c": state.c[it], "d": state.d[it]}


def run_convergence_study(config: RunConfig, levels: int = 3, threads: int = 1) -> ExperimentReport:
    """Richardson self-convergence in space (grid halving) and time (dt halving).

    Spatial: the run is repeated on nx, 2nx, ... and consecutive finals are
    compared after block-averaging the finer one; the observed L1 order of m
    is gated against the second-order band. Temporal: a spatially uniform
    state (transport vanishes identically) is advanced with fixed dt halved
    per level, isolating the time integrator; the m order is gated against
    the third-order band.
    """
    if levels < 3:
        raise ConfigError(f"convergence study needs at least 3 levels, got {levels}")
    rep = ExperimentReport(config.experiment or "converge", config_digest(config))

    # space
    cfgs = [_refine_space(config, 2**k) for k in range(levels)]
    results = _map_runs(simulate, cfgs, threads)
    errors: dict[str, list[float]] = {"m": [], "c": [], "d": []}
    for k in range(levels - 1):
        coarse = _field_interiors(results[k].final, results[k].grid)
        fine = _field_interiors(results[k + 1].final, results[k + 1].grid)
        vol = results[k].grid.cell_volume
        for name in ("m", "c", "d"):
            diff = np.abs(_restrict(fine[name]) - coarse[name]).sum() * vol
            errors[name].append(float(diff))
            rep.add(f"space_l1_diff_{name}_nx{cfgs[k].nx}", float(diff), "none")
    for name in ("m", "c", "d"):
        gate = "[1.8,2.3]" if name == "m" else "none"
        _add_order_metrics(rep, f"space_order_{name}", errors[name], gate)

    # time
    grid = grid_from_config(config)
    base = _uniform_state(grid, TEMPORAL_UNIFORM)
    cfg_t = replace(config, snapshot_times=(), t_end=TEMPORAL_HORIZON)
    dt0 = TEMPORAL_HORIZON / 8.0
    finals = [
        simulate(cfg_t, initial=base, fixed_dt=dt0 / 2**k).final for k in range(levels)
    ]
    terrors: dict[str, list[float]] = {"m": [], "c": [], "d": []}
    for k in range(levels - 1):
        a = _field_interiors(finals[k], grid)
        b = _field_interiors(finals[k + 1], grid)
        for name in ("m", "c", "d"):
            diff = np.abs(a[name] - b[name]).sum() * grid.cell_volume
            terrors[name].append(float(diff))
            rep.add(f"time_l1_diff_{name}_lvl{k}", float(diff), "none")
    for name in ("m", "c", "d"):
        gate = "[2.7,3.2]" if name == "m" else "none"
        _add_order_metrics(rep, f"time_order_{name}", terrors[name], gate)
    return rep


def _add_order_metrics(rep: ExperimentReport, name: str, errs: list[float], gate: str) -> None:
    orders = []
    for e0, e1 in zip(errs, errs[1:]):
        if e0 > 1e-14 and e1 > 1e-14:
            orders.append(math.log2(e0 / e1))
    for k, p in enumerate(orders[:-1]):
        rep.add(f"{name}_pair{k}", p, "none")
    if orders:
        rep.add(name, orders[-1], gate)


# ---------------------------------------------------------------------------
# weak-form residual check


def _psi(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    mask = np.abs(s) < 1.0
    sm = s[mask]
    out[mask] = np.exp(1.0 - 1.0 / (1.0 - sm * sm))
    return out


def _dpsi(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    mask = np.abs(s) < 1.0
    sm = s[mask]
    q = 1.0 - sm * sm
    out[mask] = np.exp(1.0 - 1.0 / q) * (-2.0 * sm / (q * q))
    return out


def _psi_scalar(s: float) -> float:
    return math.exp(1.0 - 1.0 / (1.0 - s * s)) if abs(s) < 1.0 else 0.0


def _dpsi_scalar(s: float) -> float:
    if abs(s) >= 1.0:
        return 0.0
    q = 1.0 - s * s
    return math.exp(1.0 - 1.0 / q) * (-2.0 * s / (q * q))


@dataclass(frozen=True)
class SpaceTimeBump:
    """Separable C^infinity bump test function, compactly supported."""

    name: str
    x_center: float
    x_radius: float
    t_center: float
    t_radius: float
    y_center: float = 0.0
    y_radius: float = 1.0

    def _space(self, x, y):
        phi = _psi((x - self.x_center) / self.x_radius)
        if y is not None:
            phi = phi * _psi((y - self.y_center) / self.y_radius)
        return phi

    def _time(self, t: float) -> float:
        return _psi_scalar((t - self.t_center) / self.t_radius)

    def value(self, x, y, t: float):
        return self._space(x, y) * self._time(t)

    def dt(self, x, y, t: float):
        dpsi_t = _dpsi_scalar((t - self.t_center) / self.t_radius) / self.t_radius
        return self._space(x, y) * dpsi_t

    def dx(self, x, y, t: float):
        phi = _dpsi((x - self.x_center) / self.x_radius) / self.x_radius
        if y is not None:
            phi = phi * _psi((y - self.y_center) / self.y_radius)
        return phi * self._time(t)

    def dy(self, x, y, t: float):
        phi = _psi((x - self.x_center) / self.x_radius) * _dpsi(
            (y - self.y_center) / self.y_radius
        ) / self.y_radius
        return phi * self._time(t)

    def supported_instants(self, times: Sequence[float]) -> int:
        lo, hi = self.t_center - self.t_radius, self.t_center + self.t_radius
        return sum(1 for t in times if lo < t < hi)


def default_test_functions(cfg: RunConfig) -> list[SpaceTimeBump]:
    lx, t_end = cfg.lx, cfg.t_end
    ly = cfg.ly if cfg.dimension == 2 else 0.0
    return [
        SpaceTimeBump(
            "phi0", 0.5 * lx, 0.3 * lx, 0.5 * t_end, 0.4 * t_end, 0.5 * ly, 0.3 * max(ly, 1.0)
        ),
        SpaceTimeBump(
            "phi1", 0.35 * lx, 0.2 * lx, 0.6 * t_end, 0.3 * t_end, 0.6 * ly, 0.25 * max(ly, 1.0)
        ),
    ]


def _central_gradients(state_like: State, grid: Grid) -> tuple[np.ndarray, ...]:
    fill_ghost_neumann(state_like, grid)
    g = grid.ghost
    out = []
    for arr in (state_like.m, state_like.c):
        if grid.dim == 1:
            gx = (arr[g + 1 : -g + 1] - arr[g - 1 : -g - 1]) / (2.0 * grid.dx)
            out.append((gx,))
        else:
            gx = (arr[g:-g, g + 1 : -g + 1] - arr[g:-g, g - 1 : -g - 1]) / (2.0 * grid.dx)
            gy = (arr[g + 1 : -g + 1, g:-g] - arr[g - 1 : -g - 1, g:-g]) / (2.0 * grid.dy)
            out.append((gx, gy))
    return tuple(out)


def weak_residuals(
    states: Sequence[State], grid: Grid, params, phi: SpaceTimeBump
) -> dict[str, float]:
    """Space-time quadrature of the three weak identities against phi.

    Cell averages in space, midpoint rule over each snapshot interval in
    time (fields averaged between the bracketing snapshots); first order in
    the snapshot spacing.
    """
    it = grid.interior
    x = grid.centers_x()
    if grid.dim == 1:
        xx, yy = x, None
    else:
        y = grid.centers_y()
        xx = np.broadcast_to(x[None, :], (grid.ny, grid.nx))
        yy = np.broadcast_to(y[:, None], (grid.ny, grid.nx))
    vol = grid.cell_volume

    def total(arr) -> float:
        return float(np.sum(arr) * vol)

    first = states[0]
    phi0 = phi.value(xx, yy, first.t)
    r_m = -total(first.m[it] * phi0)
    r_c = -params.tau * total(first.c[it] * phi0)
    r_d = -total(first.d[it] * phi0)

    for a, b in zip(states, states[1:]):
        dt = b.t - a.t
        tm = 0.5 * (a.t + b.t)
        mid = State(0.5 * (a.m + b.m), 0.5 * (a.c + b.c), 0.5 * (a.d + b.d), tm)
        (grads_m, grads_c) = _central_gradients(mid, grid)
        m = mid.m[it]
        c = mid.c[it]
        d = mid.d[it]
        pt = phi.dt(xx, yy, tm)
        pv = phi.value(xx, yy, tm)
        px = phi.dx(xx, yy, tm)
        grad_dot_m = grads_m[0] * px
        grad_dot_c = grads_c[0] * px
        if grid.dim == 2:
            py = phi.dy(xx, yy, tm)
            grad_dot_m = grad_dot_m + grads_m[1] * py
            grad_dot_c = grad_dot_c + grads_c[1] * py

        f_m = m * chemo_sensitivity(m, params)
        r_m += dt * (
            -total(m * pt)
            + total(diffusivity(m, params) * grad_dot_m)
            - params.chi * total(f_m * grad_dot_c)
            - total(reaction_m(m, params) * pv)
        )
        r_c += dt * (
            -params.tau * total(c * pt)
            + params.alpha * total(grad_dot_c)
            - total((params.lam * d - c + params.beta * m) * pv)
        )
        r_d += dt * (
            -total(d * pt) - total(params.r * m * m / (1.0 + params.delta * m) * (1.0 - d) * pv)
        )
    return {"m": abs(r_m), "c": abs(r_c), "d": abs(r_d)}


def run_weak_residual_check(
    config: RunConfig,
    test_functions: Optional[Sequence[SpaceTimeBump]] = None,
    intervals: int = 32,
    threads: int = 1,
) -> ExperimentReport:
    """Weak-identity residuals on the run and one space-time refinement of it.

    Each level doubles the grid and the snapshot density; the m-residual must
    drop by at least 1.5x per test function. The base level needs enough
    snapshot intervals that the time-quadrature error does not mask the
    spatial one; 32 is comfortable for the shipped configuration.
    """
    rep = ExperimentReport(config.experiment or "weak-check", config_digest(config))
    phis = list(test_functions) if test_functions is not None else default_test_functions(config)

    levels = []
    for k in (0, 1):
        n_int = intervals * 2**k
        times = tuple(config.t_end * i / n_int for i in range(1, n_int + 1))
        levels.append(replace(_refine_space(config, 2**k), snapshot_times=times))
    for phi in phis:
        for cfg in levels:
            seen = phi.supported_instants((0.0,) + cfg.snapshot_times)
            if seen < 8:
                raise ConfigError(
                    f"test function {phi.name} support holds {seen} snapshot instants; need >= 8"
                )

    def one_level(cfg: RunConfig):
        grid = grid_from_config(cfg)
        state0 = initial_state(cfg, grid)
        sim = simulate(cfg, collect_snapshots=True, initial=state0)
        return grid, [state0] + sim.snapshots

    results = _map_runs(one_level, levels, threads)
    residuals = []
    for grid, states in results:
        residuals.append({phi.name: weak_residuals(states, grid, config.params, phi) for phi in phis})

    for phi in phis:
        for k, res in enumerate(residuals):
            for name in ("m", "c", "d"):
                rep.add(f"residual_{name}_{phi.name}_L{k}", res[phi.name][name], "none")
        r0 = residuals[0][phi.name]["m"]
        r1 = residuals[1][phi.name]["m"]
        ratio = r0 / r1 if r1 > 0.0 else math.inf
        rep.add(f"residual_m_ratio_{phi.name}", ratio, ">=1.5")
    return rep


# ---------------------------------------------------------------------------
# epsilon regularization sweep


def run_epsilon_sweep(
    config: RunConfig, eps_list: Sequence[float], threads: int = 1
) -> ExperimentReport:
    """Identical runs with the regularization shift swept toward zero.

    Reports the L1 distance of each final m field to the unregularized
    (epsilon = 0) baseline; the distances must decrease monotonically as
    epsilon does.
    """
    eps = [float(e) for e in eps_list]
    if not eps:
        raise ConfigError("eps_list must not be empty")
    if any(not 0.0 <= e < 1.0 for e in eps):
        raise ConfigError(f"epsilon values must lie in [0, 1), got {eps}")
    if any(b > a for a, b in zip(eps, eps[1:])):
        raise ConfigError(f"eps_list must be non-increasing, got {eps}")
    rep = ExperimentReport(config.experiment or "eps-sweep", config_digest(config))

    base_cfg = replace(config, snapshot_times=())
    run_eps = eps + ([0.0] if 0.0 not in eps else [])
    cfgs = [with_params(base_cfg, epsilon=e) for e in run_eps]
    results = _map_runs(simulate, cfgs, threads)
    grid = results[0].grid
    it = grid.interior

    baseline_idx = len(run_eps) - 1 - run_eps[::-1].index(0.0)
    base_m = results[baseline_idx].final.m[it]
    distances = []
    for k, e in enumerate(run_eps):
        if k == baseline_idx:
            continue
        dist = float(np.abs(results[k].final.m[it] - base_m).sum() * grid.cell_volume)
        distances.append(dist)
        rep.add(f"l1_dist_eps_{e:g}", dist, "none")
    if len(distances) >= 2:
        strictly_down = all(a > b for a, b in zip(distances, distances[1:]))
        rep.add("distance_monotone_decreasing", 1.0 if strictly_down else 0.0, ">=1")
    return rep


# ---------------------------------------------------------------------------
# figure comparison


def run_figure_comparison(
    config: RunConfig,
    chi_values: Sequence[float] = FIGURE_CHI_VALUES,
    include_contrast: bool = True,
    out_dir: Optional[str] = None,
    threads: int = 1,
    modes: Sequence[DiffusionMode] = (DiffusionMode.LINEAR, DiffusionMode.POROUS),
) -> ExperimentReport:
    """Linear vs porous-medium panel grid, with front and ring diagnostics.

    Runs each diffusion mode for every chemotaxis strength in ``chi_values``,
    emitting d-field snapshots at the quarter points of t_end. When
    ``include_contrast`` is set, a chi = 0 pair is added and the support
    width of m (measure of {m > 1e-3}) is compared between the modes at the
    first snapshot instant: the compactly supported porous-medium front must
    be at least 20% narrower than the linear-diffusion tail. On 2D runs with
    chi = 10 in the panel set, the radial average of the final d field must
    show an interior local maximum (ring indicator).
    """
    exp_id = config.experiment or "figures"
    rep = ExperimentReport(exp_id, config_digest(config))
    root = Path(out_dir if out_dir is not None else config.output_dir) / exp_id
    times = tuple(f * config.t_end for f in SNAPSHOT_FRACTIONS)
    base = replace(config, snapshot_times=times)

    run_list: list[tuple[str, RunConfig]] = []
    chis = list(chi_values) + ([0.0] if include_contrast else [])
    for mode in modes:
        for chi in chis:
            key = f"{mode.value}_chi{chi:g}"
            run_list.append((key, with_params(base, diffusion_mode=mode, chi=chi)))

    def one_run(item: tuple[str, RunConfig]):
        key, cfg = item
        sim = simulate(cfg, collect_snapshots=True)
        paths = []
        for k, snap in enumerate(sim.snapshots):
            rel = f"{key}/snap_{k:02d}.csv"
            fileio.write_snapshot(snap, sim.grid, snapshot_meta(cfg, snap.t), root / rel)
            paths.append(rel)
        return key, sim, paths

    results = _map_runs(one_run, run_list, threads)
    by_key = {key: sim for key, sim, _ in results}
    for _, _, paths in results:
        rep.snapshots.extend(paths)

    grid = next(iter(by_key.values())).grid
    for key, sim, _ in results:
        rep.add(f"max_d_{key}", float(sim.final.d[grid.interior].max()), D_BARRIER)

    lin_key = f"{DiffusionMode.LINEAR.value}_chi0"
    por_key = f"{DiffusionMode.POROUS.value}_chi0"
    if include_contrast and lin_key in by_key and por_key in by_key:
        lin = by_key[lin_key]
        por = by_key[por_key]
        s_lin = support_width(lin.snapshots[0], grid)
        s_por = support_width(por.snapshots[0], grid)
        rep.add("support_linear_chi0", s_lin, "none")
        rep.add("support_porous_chi0", s_por, "none")
        ratio = s_por / s_lin if s_lin > 0.0 else math.inf
        rep.add("support_ratio_porous_over_linear", ratio, "<=0.8")
        for k, snap in enumerate(por.snapshots):
            rep.add(f"support_porous_chi0_t{k}", support_width(snap, grid), "none")

    ring_key = f"{DiffusionMode.POROUS.value}_chi10"
    if config.dimension == 2 and ring_key in by_key:
        final_d = by_key[ring_key].final.d[grid.interior]
        _, prof = radial_average(final_d, grid)
        rep.add("ring_interior_maxima", float(count_interior_maxima(prof)), ">=1")
    return rep
