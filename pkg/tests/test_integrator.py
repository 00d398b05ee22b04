import numpy as np
import pytest

from balofv import _kernels
from balofv.config import parse_config_text
from balofv.errors import DomainError, SolverError
from balofv.flux import compute_fluxes
from balofv.grid import Grid, State, fill_ghost_neumann, integrate_field
from balofv.integrator import (
    StateDerivative,
    advance_to,
    rhs,
    ssp_rk3_step,
    stable_dt,
)
from balofv.model import DiffusionMode, ModelParams

from scalar_oracle import oracle_rhs

PM = ModelParams(gamma=2.0)


def make_state(grid, m, c=None, d=None, t=0.0):
    st = State(np.zeros(grid.shape), np.zeros(grid.shape), np.zeros(grid.shape), t)
    st.m[grid.interior] = m
    if c is not None:
        st.c[grid.interior] = c
    if d is not None:
        st.d[grid.interior] = d
    return fill_ghost_neumann(st, grid)


def uniform_state(grid, m, c, d):
    return make_state(
        grid,
        np.full((grid.ny, grid.nx) if grid.dim == 2 else grid.nx, m),
        np.full((grid.ny, grid.nx) if grid.dim == 2 else grid.nx, c),
        np.full((grid.ny, grid.nx) if grid.dim == 2 else grid.nx, d),
    )


def minimal_config(**overrides):
    text = "dimension: 1\nnx: 8\nlx: 1\nt_end: 1\n"
    cfg = parse_config_text(text)
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    return cfg


class TestRhs:
    def test_homogeneous_fixed_point_is_stationary(self):
        g = Grid.line(16, 2.0)
        st = uniform_state(g, 1.0, 2.0, 1.0)
        k = rhs(st, g, PM, 1.5)
        assert np.max(np.abs(k.dm)) <= 1e-12
        assert np.max(np.abs(k.dc)) <= 1e-12
        assert np.max(np.abs(k.dd)) <= 1e-12

    def test_pure_cytokine_decay(self):
        g = Grid.line(8, 1.0)
        c0 = 0.7
        st = uniform_state(g, 0.0, c0, 0.0)
        k = rhs(st, g, PM, 1.5)
        assert not k.dm.any() and not k.dd.any()
        assert np.allclose(k.dc[g.interior], -c0, atol=1e-15, rtol=0.0)

    def test_matches_scalar_oracle_on_random_states(self):
        rng = np.random.default_rng(41)
        g = Grid.line(8, 0.8)
        p = ModelParams(gamma=2.0, chi=10.0, mu=1.3, delta=1.0, tau=2.0,
                        alpha=0.7, lam=0.4, beta=1.1, r=0.9)
        for _ in range(100):
            m = rng.uniform(0.0, 3.0, 8)
            m[rng.random(8) < 0.25] = 0.0
            c = rng.uniform(0.0, 2.0, 8)
            d = rng.uniform(0.0, 1.0, 8)
            st = make_state(g, m, c, d)
            k = rhs(st, g, p, 1.5)
            dm, dc, dd = oracle_rhs(
                m.tolist(), c.tolist(), d.tolist(), g.dx, theta=1.5,
                gamma=2.0, chi=10.0, mu=1.3, delta=1.0, tau=2.0, alpha=0.7,
                lam=0.4, beta=1.1, r=0.9,
            )
            assert np.allclose(k.dm[g.interior], dm, atol=1e-13, rtol=1e-13)
            assert np.allclose(k.dc[g.interior], dc, atol=1e-13, rtol=1e-13)
            assert np.allclose(k.dd[g.interior], dd, atol=1e-13, rtol=1e-13)

    def test_2d_reduces_to_1d_when_y_constant(self):
        rng = np.random.default_rng(43)
        n = 12
        m = rng.uniform(0.0, 2.0, n)
        c = rng.uniform(0.0, 2.0, n)
        d = rng.uniform(0.0, 1.0, n)
        g1 = Grid.line(n, 1.0)
        k1 = rhs(make_state(g1, m, c, d), g1, PM, 1.5)
        g2 = Grid.box(n, 6, 1.0, 7.0)
        k2 = rhs(make_state(g2, np.tile(m, (6, 1)), np.tile(c, (6, 1)), np.tile(d, (6, 1))), g2, PM, 1.5)
        for row in range(6):
            assert np.allclose(k2.dm[g2.interior][row], k1.dm[g1.interior], atol=1e-14, rtol=0.0)
            assert np.allclose(k2.dc[g2.interior][row], k1.dc[g1.interior], atol=1e-14, rtol=0.0)

    def test_mass_conservation_single_rhs(self):
        # with the logistic off, the flux divergence telescopes to zero mass change
        rng = np.random.default_rng(47)
        p = ModelParams(gamma=2.0, mu=0.0, chi=6.0)
        g = Grid.line(64, 4.0)
        st = make_state(g, rng.uniform(0.0, 2.0, 64), rng.uniform(0.0, 1.0, 64))
        k = rhs(st, g, p, 1.5)
        total = float(np.sum(k.dm[g.interior]) * g.dx)
        assert abs(total) <= 1e-14 * 64


class TestSspRk3:
    def test_zero_rhs_is_identity(self):
        g = Grid.line(8, 1.0)
        st = uniform_state(g, 0.4, 0.6, 0.2)

        def zero(s):
            return StateDerivative(np.zeros(g.shape), np.zeros(g.shape), np.zeros(g.shape))

        out, clamps = ssp_rk3_step(st, 0.3, zero, g)
        assert np.array_equal(out.m, st.m) and np.array_equal(out.c, st.c)
        assert out.t == st.t + 0.3
        assert clamps.m_cells == 0 and clamps.d_cells == 0

    def test_scalar_decay_hand_value(self):
        # u' = -u, u0 = 1, dt = 0.1: the three stages give 0.90483333...
        g = Grid.line(4, 1.0)
        st = uniform_state(g, 1.0, 1.0, 0.0)

        def decay(s):
            return StateDerivative(-s.m, -s.c, np.zeros(g.shape))

        out, _ = ssp_rk3_step(st, 0.1, decay, g)
        expected = 1.0 / 3.0 + (2.0 / 3.0) * 0.9 * (0.75 + 0.25 * 0.81)
        assert np.allclose(out.m[g.interior], expected, atol=1e-15, rtol=0.0)
        assert abs(expected - 0.9048333333333334) < 1e-15

    def test_clamp_telemetry(self):
        g = Grid.line(4, 1.0)
        st = uniform_state(g, 0.1, 0.0, 0.95)

        def push(s):
            return StateDerivative(
                np.full(g.shape, -1.0), np.zeros(g.shape), np.full(g.shape, 1.0)
            )

        out, clamps = ssp_rk3_step(st, 1.0, push, g)
        assert clamps.m_cells > 0 and clamps.d_cells > 0
        assert clamps.m_magnitude > 0.0 and clamps.d_magnitude > 0.0
        assert np.all(out.m >= 0.0) and np.all(out.d <= 1.0)

    def test_rejects_bad_dt(self):
        g = Grid.line(4, 1.0)
        st = uniform_state(g, 1.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            ssp_rk3_step(st, 0.0, lambda s: None, g)


class TestStableDt:
    def test_quiescent_state_formula_value(self):
        # all-zero state, alpha = 1, dx = 0.1, cfl = 0.25 -> 0.25 * 0.01 / 2
        g = Grid.line(10, 1.0)
        st = uniform_state(g, 0.0, 0.0, 0.0)
        p = ModelParams(gamma=2.0, epsilon=0.0, alpha=1.0)
        assert stable_dt(st, g, p, 0.25) == pytest.approx(1.25e-3, rel=1e-12)

    def test_parabolic_scaling(self):
        p = ModelParams(gamma=2.0)
        g1 = Grid.line(10, 1.0)
        g2 = Grid.line(10, 2.0)  # doubles dx
        s1 = uniform_state(g1, 0.0, 0.0, 0.0)
        s2 = uniform_state(g2, 0.0, 0.0, 0.0)
        assert stable_dt(s2, g2, p, 0.25) == pytest.approx(4.0 * stable_dt(s1, g1, p, 0.25))

    def test_velocity_shrinks_dt(self):
        g = Grid.line(10, 1.0)
        p = ModelParams(gamma=2.0, chi=0.0)
        lo = uniform_state(g, 0.1, 0.0, 0.0)
        steep = make_state(g, np.linspace(0.0, 3.0, 10) ** 2)
        assert stable_dt(steep, g, p, 0.25) < stable_dt(lo, g, p, 0.25)

    def test_cfl_validation(self):
        g = Grid.line(10, 1.0)
        st = uniform_state(g, 0.0, 0.0, 0.0)
        from balofv.errors import ConfigError

        with pytest.raises(ConfigError):
            stable_dt(st, g, PM, 0.0)
        with pytest.raises(ConfigError):
            stable_dt(st, g, PM, 1.5)


class TestAdvanceTo:
    def test_zero_span_is_identity(self):
        g = Grid.line(8, 1.0)
        st = uniform_state(g, 0.5, 0.5, 0.5)
        cfg = minimal_config()
        out, stats = advance_to(st, 0.0, g, PM, cfg)
        assert stats == []
        assert np.array_equal(out.m, st.m)

    def test_fixed_point_preserved_over_100_steps(self):
        g = Grid.line(16, 2.0)
        st = uniform_state(g, 1.0, 2.0, 1.0)
        cfg = minimal_config(snapshot_times=())
        dt = 1e-3
        out, stats = advance_to(st, 100 * dt, g, PM, cfg, fixed_dt=dt)
        assert len(stats) == 100
        assert np.max(np.abs(out.m[g.interior] - 1.0)) < 1e-10
        assert np.max(np.abs(out.c[g.interior] - 2.0)) < 1e-10
        assert np.max(np.abs(out.d[g.interior] - 1.0)) < 1e-10

    def test_mass_conserved_without_logistic(self):
        cfg = parse_config_text(
            """
dimension: 1
nx: 64
lx: 8
t_end: 1.0
init_preset: gauss-bump
params: {mu: 0, chi: 4, gamma: 2}
"""
        )
        from balofv.config import grid_from_config, initial_state

        g = grid_from_config(cfg)
        st = initial_state(cfg, g)
        mass0 = integrate_field(st.m, g)
        out, stats = advance_to(st, cfg.t_end, g, cfg.params, cfg)
        assert len(stats) >= 1000
        drift = max(abs(s.mass_m - mass0) for s in stats) / mass0
        assert drift <= 1e-10

    def test_targets_hit_exactly_and_snapshots_emitted(self):
        g = Grid.line(8, 1.0)
        st = uniform_state(g, 0.3, 0.1, 0.0)
        cfg = minimal_config(snapshot_times=(0.03, 0.1, 0.17))
        seen = []
        out, _ = advance_to(st, 0.2, g, PM, cfg, on_snapshot=lambda s: seen.append(s.t))
        assert seen == [0.03, 0.1, 0.17]
        assert out.t == 0.2

    def test_partial_snapshots_flushed_before_abort(self):
        # a wildly unstable fixed dt amplifies the cytokine checkerboard by
        # ~1e7 per step until overflow; snapshots reached before the abort
        # must still be delivered
        g = Grid.line(8, 1.0)
        cfg = minimal_config(snapshot_times=(2.0,))
        checkerboard = np.where(np.arange(8) % 2 == 0, 0.0, 2.0)
        st = make_state(g, np.zeros(8), checkerboard)
        seen = []
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(SolverError):
                advance_to(st, 200.0, g, PM, cfg, on_snapshot=lambda s: seen.append(s.t), fixed_dt=2.0)
        assert seen == [2.0]

    def test_monitor_sees_every_step(self):
        g = Grid.line(8, 1.0)
        st = uniform_state(g, 0.5, 0.2, 0.1)
        cfg = minimal_config(snapshot_times=())
        calls = []
        advance_to(
            st, 0.05, g, PM, cfg, fixed_dt=0.01,
            step_monitor=lambda prev, cur, s: calls.append((prev.t, cur.t, s.dt)),
        )
        assert len(calls) == 5
        assert all(b > a for a, b, _ in calls)

    def test_backward_target_rejected(self):
        g = Grid.line(8, 1.0)
        st = uniform_state(g, 0.0, 0.0, 0.0)
        st.t = 1.0
        with pytest.raises(DomainError):
            advance_to(st, 0.5, g, PM, minimal_config())


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="compiled kernels unavailable")
class TestFusedPathEquivalence:
    @pytest.mark.parametrize("dim", [1, 2])
    @pytest.mark.parametrize("mode", ["porous", "linear"])
    def test_fast_path_bitwise_matches_reference(self, dim, mode):
        text = f"""
dimension: {dim}
nx: 24
lx: 4
t_end: 0.05
init_preset: gauss-bump
sigma_fraction: 0.1
params: {{chi: 8, gamma: 2, diffusion_mode: {mode}, delta: 1}}
"""
        cfg = parse_config_text(text)
        from balofv.config import grid_from_config, initial_state

        g = grid_from_config(cfg)
        st = initial_state(cfg, g)
        fast, stats_f = advance_to(st, cfg.t_end, g, cfg.params, cfg, fast=True)
        ref, stats_r = advance_to(st, cfg.t_end, g, cfg.params, cfg, fast=False)
        assert len(stats_f) == len(stats_r)
        assert all(a.dt == b.dt for a, b in zip(stats_f, stats_r))
        assert np.array_equal(fast.m[g.interior], ref.m[g.interior])
        assert np.array_equal(fast.c[g.interior], ref.c[g.interior])
        assert np.array_equal(fast.d[g.interior], ref.d[g.interior])

    def test_kernel_stage_matches_rhs(self):
        rng = np.random.default_rng(53)
        g = Grid.box(10, 9, 2.0, 1.5)
        p = ModelParams(gamma=3.0, chi=5.0, epsilon=0.01, delta=0.5, tau=1.5)
        from balofv.integrator import _FusedStepper

        stepper = _FusedStepper(g, p, 1.5)
        for _ in range(10):
            m = rng.uniform(0.0, 2.0, (9, 10))
            st = make_state(g, m, rng.uniform(0.0, 2.0, (9, 10)), rng.uniform(0.0, 1.0, (9, 10)))
            k_ref = rhs(st.copy(), g, p, 1.5)
            k_fast = stepper.derivative(st)
            assert np.array_equal(k_fast.dm, k_ref.dm)
            assert np.array_equal(k_fast.dc, k_ref.dc)
            assert np.array_equal(k_fast.dd, k_ref.dd)
