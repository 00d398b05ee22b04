from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from balofv import fileio
from balofv.config import grid_from_config, parse_config_text
from balofv.errors import ConfigError
from balofv.experiments import (
    SpaceTimeBump,
    count_interior_maxima,
    default_test_functions,
    radial_average,
    run_convergence_study,
    run_epsilon_sweep,
    run_figure_comparison,
    run_invariant_audit,
    run_weak_residual_check,
    simulate,
    support_width,
    weak_residuals,
)
from balofv.grid import Grid, State, fill_ghost_neumann


def write_uniform_snapshot(path, grid, m, c, d):
    st = State(np.full(grid.shape, m), np.full(grid.shape, c), np.full(grid.shape, d))
    fileio.write_snapshot(st, grid, "", path)


class TestAudit:
    def test_zero_preset_trivially_passes(self):
        cfg = parse_config_text(
            "dimension: 1\nnx: 16\nlx: 2\nt_end: 0.05\ninit_preset: zero\n"
        )
        rep = run_invariant_audit(cfg)
        assert rep.passed
        assert rep.metric("min_m").value == 0.0
        assert rep.metric("clamp_m_cells").value == 0.0

    def test_homogeneous_fixed_point(self, tmp_path):
        grid = Grid.line(16, 2.0)
        init = tmp_path / "uniform.csv"
        write_uniform_snapshot(init, grid, 1.0, 2.0, 1.0)
        cfg = parse_config_text(
            f"""
dimension: 1
nx: 16
lx: 2
t_end: 0.05
init_preset: custom-file
init_file: {init}
"""
        )
        rep = run_invariant_audit(cfg)
        assert rep.passed
        mass = rep.metric("mass_max").value
        assert mass == pytest.approx(2.0, rel=1e-12)
        assert rep.metric("linf_m_ceiling").value == pytest.approx(1.0, abs=1e-12)
        assert rep.metric("linf_m_monotone_growth").value == 0.0

    def test_mass_conservation_metric_with_mu_zero(self):
        cfg = parse_config_text(Path("configs/audit_mass.yaml").read_text())
        rep = run_invariant_audit(cfg)
        assert rep.passed
        assert rep.metric("mass_drift_rel").value <= 1e-10
        assert rep.metric("steps").value >= 1000


class TestConvergence:
    def test_constant_data_gives_zero_differences(self):
        cfg = parse_config_text(
            "dimension: 1\nnx: 16\nlx: 2\nt_end: 0.05\ninit_preset: zero\n"
        )
        rep = run_convergence_study(cfg)
        for name in ("m", "c", "d"):
            assert rep.metric(f"space_l1_diff_{name}_nx16").value == 0.0
        # the zero state is degenerate, so no spatial order metric is emitted
        with pytest.raises(KeyError):
            rep.metric("space_order_m")

    def test_levels_validated(self):
        cfg = parse_config_text("dimension: 1\nnx: 16\nlx: 2\nt_end: 0.05\n")
        with pytest.raises(ConfigError):
            run_convergence_study(cfg, levels=2)


class TestWeakResiduals:
    def test_vanishing_test_function(self):
        cfg = parse_config_text("dimension: 1\nnx: 16\nlx: 2\nt_end: 0.2\ninit_preset: zero\n")
        grid = grid_from_config(cfg)
        st = State(np.full(grid.shape, 1.0), np.full(grid.shape, 2.0), np.full(grid.shape, 1.0))
        fill_ghost_neumann(st, grid)
        states = []
        for t in np.linspace(0.0, 0.2, 9):
            s = st.copy()
            s.t = float(t)
            states.append(s)
        # a bump whose spatial support lies outside the domain is identically zero
        phi = SpaceTimeBump("ghost", x_center=10.0, x_radius=1.0, t_center=0.1, t_radius=0.08)
        res = weak_residuals(states, grid, cfg.params, phi)
        assert res["m"] == 0.0 and res["c"] == 0.0 and res["d"] == 0.0

    def test_stationary_state_residual_is_quadrature_error(self):
        # at the homogeneous fixed point the reactions vanish and only the
        # time quadrature of the phi_t integral survives
        cfg = parse_config_text("dimension: 1\nnx: 32\nlx: 2\nt_end: 1.0\n")
        grid = grid_from_config(cfg)
        st = State(np.full(grid.shape, 1.0), np.full(grid.shape, 2.0), np.full(grid.shape, 1.0))
        fill_ghost_neumann(st, grid)

        def residual(phi, n_snaps):
            states = []
            for t in np.linspace(0.0, 1.0, n_snaps + 1):
                s = st.copy()
                s.t = float(t)
                states.append(s)
            return weak_residuals(states, grid, cfg.params, phi)["m"]

        # interior time support: the midpoint rule is exact beyond all orders
        inner = SpaceTimeBump("in", x_center=1.0, x_radius=0.6, t_center=0.5, t_radius=0.4)
        assert residual(inner, 8) < 1e-12

        # support touching t = 0 exposes the boundary quadrature error, which
        # must shrink under snapshot refinement (at least first order)
        edge = SpaceTimeBump("edge", x_center=1.0, x_radius=0.6, t_center=0.0, t_radius=0.5)
        coarse, fine = residual(edge, 8), residual(edge, 16)
        assert 0.0 < fine < coarse
        assert coarse / fine >= 2.0

    def test_support_precondition(self):
        cfg = parse_config_text("dimension: 1\nnx: 16\nlx: 2\nt_end: 1.0\n")
        phi = SpaceTimeBump("tight", x_center=1.0, x_radius=0.5, t_center=0.5, t_radius=0.01)
        with pytest.raises(ConfigError, match="instants"):
            run_weak_residual_check(cfg, test_functions=[phi])

    def test_default_test_functions_supported(self):
        cfg = parse_config_text("dimension: 1\nnx: 16\nlx: 2\nt_end: 1.0\n")
        for phi in default_test_functions(cfg):
            assert phi.supported_instants(tuple(np.linspace(0, 1, 17))) >= 8


class TestEpsilonSweep:
    def test_only_baseline_gives_empty_distances(self):
        cfg = parse_config_text("dimension: 1\nnx: 16\nlx: 2\nt_end: 0.02\n")
        rep = run_epsilon_sweep(cfg, [0.0])
        assert not [m for m in rep.metrics if m.name.startswith("l1_dist")]

    def test_zero_twice_is_deterministic(self):
        cfg = parse_config_text("dimension: 1\nnx: 16\nlx: 2\nt_end: 0.02\n")
        rep = run_epsilon_sweep(cfg, [0.0, 0.0])
        dists = [m for m in rep.metrics if m.name.startswith("l1_dist")]
        assert len(dists) == 1 and dists[0].value == 0.0

    def test_validation(self):
        cfg = parse_config_text("dimension: 1\nnx: 16\nlx: 2\nt_end: 0.02\n")
        with pytest.raises(ConfigError):
            run_epsilon_sweep(cfg, [])
        with pytest.raises(ConfigError):
            run_epsilon_sweep(cfg, [1e-3, 1e-2])  # increasing
        with pytest.raises(ConfigError):
            run_epsilon_sweep(cfg, [1.5])


class TestRadialDiagnostics:
    def test_ring_field_detected(self):
        g = Grid.box(64, 64, 10.0, 10.0)
        x = g.centers_x() - 5.0
        y = g.centers_y() - 5.0
        rr = np.sqrt(x[None, :] ** 2 + y[:, None] ** 2)
        ring = np.exp(-((rr - 3.0) ** 2))
        _, prof = radial_average(ring, g)
        assert count_interior_maxima(prof) == 1

    def test_monotone_profile_has_no_interior_maximum(self):
        assert count_interior_maxima(np.array([1.0, 0.8, 0.5, 0.2, 0.1])) == 0
        assert count_interior_maxima(np.array([1.0, 1.0, 1.0, 0.5, 0.2])) == 0

    def test_plateau_maximum_counts_once(self):
        assert count_interior_maxima(np.array([0.2, 0.9, 0.9, 0.9, 0.3])) == 1
        assert count_interior_maxima(np.array([0.2, 0.9, 0.3, 0.8, 0.1])) == 2

    def test_trailing_rise_is_not_interior(self):
        assert count_interior_maxima(np.array([0.5, 0.2, 0.1, 0.4, 0.9])) == 0

    def test_support_width(self):
        g = Grid.line(10, 1.0)
        st = State(np.zeros(g.shape), np.zeros(g.shape), np.zeros(g.shape))
        st.m[g.interior] = [0.0, 0.0, 0.5, 1.0, 0.5, 0.0, 2e-3, 0.0, 0.0, 0.0]
        assert support_width(st, g) == pytest.approx(0.4)


@pytest.fixture(scope="module")
def small_cfg():
    return parse_config_text(
        """
dimension: 1
nx: 64
lx: 10
t_end: 2.0
init_preset: gauss-bump
sigma_fraction: 0.05
params: {gamma: 2, chi: 4, diffusion_mode: porous}
"""
    )


class TestFigureComparison:

    def test_panels_written_and_deterministic(self, small_cfg, tmp_path):
        rep1 = run_figure_comparison(small_cfg, out_dir=str(tmp_path / "a"))
        rep2 = run_figure_comparison(small_cfg, out_dir=str(tmp_path / "b"), threads=2)
        assert rep1.to_text() == rep2.to_text()
        assert len(rep1.snapshots) == 6 * 4  # modes x (chi values + contrast) x instants
        for rel in rep1.snapshots:
            fa = tmp_path / "a" / "figures" / rel
            fb = tmp_path / "b" / "figures" / rel
            assert fa.read_bytes() == fb.read_bytes()

    def test_support_contrast_metrics(self, small_cfg, tmp_path):
        rep = run_figure_comparison(small_cfg, out_dir=str(tmp_path))
        ratio = rep.metric("support_ratio_porous_over_linear")
        assert ratio.value <= 0.8 and ratio.passed
        series = [
            rep.metric(f"support_porous_chi0_t{k}").value for k in range(4)
        ]
        assert all(b >= a for a, b in zip(series, series[1:]))

    def test_modes_subset(self, small_cfg, tmp_path):
        from balofv.model import DiffusionMode

        rep = run_figure_comparison(
            small_cfg,
            chi_values=(4.0,),
            include_contrast=False,
            out_dir=str(tmp_path),
            modes=(DiffusionMode.POROUS,),
        )
        assert len(rep.snapshots) == 4
        assert rep.metric("max_d_porous_chi4").passed
