import numpy as np
import pytest

from balofv.errors import SolverError
from balofv.flux import compute_fluxes, flux_c, flux_m, limited_slope, minmod, velocity_m
from balofv.grid import Grid, State, fill_ghost_neumann
from balofv.model import DiffusionMode, ModelParams

from scalar_oracle import oracle_fluxes

PM = ModelParams(gamma=2.0, epsilon=0.0)


def make_state(grid, m, c=None, d=None):
    st = State(np.zeros(grid.shape), np.zeros(grid.shape), np.zeros(grid.shape))
    st.m[grid.interior] = m
    if c is not None:
        st.c[grid.interior] = c
    if d is not None:
        st.d[grid.interior] = d
    return fill_ghost_neumann(st, grid)


def random_state(grid, rng, vacuum_fraction=0.25):
    shape = (grid.nx,) if grid.dim == 1 else (grid.ny, grid.nx)
    m = rng.uniform(0.0, 3.0, shape)
    m[rng.random(shape) < vacuum_fraction] = 0.0
    return make_state(grid, m, rng.uniform(0.0, 2.0, shape), rng.uniform(0.0, 1.0, shape))


class TestMinmod:
    def test_all_positive_takes_min(self):
        assert minmod((0.3, 0.2, 0.5)) == 0.2

    def test_all_negative_takes_max(self):
        assert minmod((-0.3, -0.2, -0.5)) == -0.2

    def test_mixed_signs_zero(self):
        assert minmod((0.3, -0.2, 0.5)) == 0.0

    def test_zero_entry_zero(self):
        assert minmod((0.3, 0.0, 0.5)) == 0.0


class TestLimitedSlope:
    def test_linear_data_reproduced(self):
        assert limited_slope(1.0, 2.0, 3.0, 1.0, 1.0) == 1.0

    def test_local_max_flattened(self):
        assert limited_slope(1.0, 3.0, 2.0, 1.0, 1.0) == 0.0

    def test_theta_two_hand_value(self):
        assert limited_slope(0.0, 1.0, 4.0, 1.0, 2.0) == 2.0

    def test_theta_zero_kills_slope(self):
        assert limited_slope(0.0, 1.0, 2.0, 1.0, 0.0) == 0.0


class TestVelocity:
    def test_no_gradients(self):
        assert velocity_m(0.7, 0.7, 0.0, 0.1, PM) == 0.0

    def test_enthalpy_difference(self):
        assert velocity_m(0.5, 1.0, 0.0, 0.1, PM) == pytest.approx(-10.0, abs=1e-12)

    def test_chemotactic_part(self):
        p = ModelParams(chi=4.0, delta=1.0)
        assert velocity_m(1.0, 1.0, 0.5, 0.1, p) == pytest.approx(1.0, abs=1e-15)


class TestFluxM:
    def test_upwind_left(self):
        assert flux_m(1.0, 0.7, 0.2, 0.0, 0.0, 0.1) == pytest.approx(0.7)

    def test_downwind_right(self):
        assert flux_m(-1.0, 0.7, 0.4, 0.0, 0.0, 0.1) == pytest.approx(-0.4)

    def test_zero_velocity(self):
        assert flux_m(0.0, 5.0, 7.0, 1.0, -1.0, 0.1) == 0.0

    def test_negative_reconstruction_clamped(self):
        # left endpoint would be 0.1 + 0.05 * (-4) = -0.1; clamps to 0
        assert flux_m(1.0, 0.1, 1.0, -4.0, 0.0, 0.1) == 0.0


class TestFluxC:
    def test_uniform(self):
        assert flux_c(1.5, 1.5, 0.5, PM) == 0.0

    def test_hand_value_and_antisymmetry(self):
        assert flux_c(1.0, 2.0, 0.5, PM) == pytest.approx(-2.0)
        assert flux_c(2.0, 1.0, 0.5, PM) == pytest.approx(2.0)

    def test_antisymmetry_random(self):
        rng = np.random.default_rng(5)
        p = ModelParams(alpha=1.7)
        for _ in range(1000):
            a, b = rng.uniform(0.0, 4.0, 2)
            assert flux_c(a, b, 0.3, p) == pytest.approx(-flux_c(b, a, 0.3, p), abs=1e-14)


class TestComputeFluxes:
    def test_uniform_state_zero_fluxes(self):
        g = Grid.line(8, 1.0)
        st = make_state(g, np.full(8, 1.0), np.full(8, 2.0), np.full(8, 1.0))
        f = compute_fluxes(st, g, PM, 1.5)
        assert not f.fm_x.any() and not f.fc_x.any() and not f.vel_x.any()

    def test_uniform_2d(self):
        g = Grid.box(6, 5, 1.0, 1.0)
        st = make_state(g, np.full((5, 6), 0.8), np.full((5, 6), 1.1), np.full((5, 6), 0.3))
        f = compute_fluxes(st, g, PM, 1.5)
        for arr in (f.fm_x, f.fc_x, f.fm_y, f.fc_y, f.vel_x, f.vel_y):
            assert not arr.any()

    def test_four_cell_oracle_match(self):
        g = Grid.line(4, 0.4)  # dx = 0.1
        m = [0.0, 1.0, 1.0, 0.0]
        c = [0.0, 0.0, 0.0, 0.0]
        st = make_state(g, m, c)
        f = compute_fluxes(st, g, PM, 1.5)
        fm, fc, vel = oracle_fluxes(m, c, g.dx, theta=1.5, gamma=2.0, chi=PM.chi)
        assert np.allclose(f.fm_x, fm, atol=1e-14, rtol=0.0)
        assert np.allclose(f.fc_x, fc, atol=1e-14, rtol=0.0)
        assert np.allclose(f.vel_x, vel, atol=1e-14, rtol=0.0)

    @pytest.mark.parametrize("mode", ["porous", "linear"])
    @pytest.mark.parametrize("theta", [0.0, 1.0, 1.5, 2.0])
    def test_random_states_match_oracle(self, mode, theta):
        rng = np.random.default_rng(hash((mode, theta)) % 2**32)
        gamma = 2.0 if mode == "porous" else 1.5  # gamma unused by linear enthalpy
        p = ModelParams(
            gamma=gamma,
            chi=7.0,
            delta=1.0,
            alpha=1.3,
            diffusion_mode=DiffusionMode(mode),
        )
        g = Grid.line(8, 0.8)
        for _ in range(50):
            st = random_state(g, rng)
            mi = st.m[g.interior].tolist()
            ci = st.c[g.interior].tolist()
            f = compute_fluxes(st, g, p, theta)
            fm, fc, vel = oracle_fluxes(
                mi, ci, g.dx, theta=theta, gamma=gamma, chi=7.0,
                delta=1.0, alpha=1.3, mode=mode,
            )
            assert np.allclose(f.vel_x, vel, atol=1e-13, rtol=1e-13)
            assert np.allclose(f.fm_x, fm, atol=1e-13, rtol=1e-13)
            assert np.allclose(f.fc_x, fc, atol=1e-13, rtol=1e-13)

    def test_boundary_faces_exactly_zero(self):
        rng = np.random.default_rng(17)
        g = Grid.line(16, 2.0)
        for _ in range(20):
            st = random_state(g, rng)
            f = compute_fluxes(st, g, PM, 1.5)
            assert f.fm_x[0] == 0.0 and f.fm_x[-1] == 0.0
            assert f.fc_x[0] == 0.0 and f.fc_x[-1] == 0.0
        g2 = Grid.box(6, 7, 1.0, 1.5)
        st = random_state(g2, rng)
        f = compute_fluxes(st, g2, PM, 1.5)
        assert not f.fm_x[:, 0].any() and not f.fm_x[:, -1].any()
        assert not f.fm_y[0, :].any() and not f.fm_y[-1, :].any()
        assert not f.fc_x[:, 0].any() and not f.fc_x[:, -1].any()
        assert not f.fc_y[0, :].any() and not f.fc_y[-1, :].any()

    def test_theta_zero_is_first_order_upwind(self):
        rng = np.random.default_rng(23)
        g = Grid.line(12, 1.0)
        st = random_state(g, rng)
        f = compute_fluxes(st, g, PM, 0.0)
        assert not f.sm_x.any() and not f.sc_x.any()
        up = np.maximum(f.vel_x, 0.0)
        down = np.minimum(f.vel_x, 0.0)
        me = st.m
        expected = up * me[1:-2] + down * me[2:-1]
        assert np.allclose(f.fm_x, expected, atol=1e-15, rtol=0.0)

    def test_no_new_extrema_from_reconstruction(self):
        rng = np.random.default_rng(29)
        g = Grid.line(32, 1.0)
        half = 0.5 * g.dx
        for kind in ("monotone", "oscillatory", "random"):
            for trial in range(30):
                if kind == "monotone":
                    m = np.sort(rng.uniform(0.0, 3.0, 32))
                elif kind == "oscillatory":
                    x = np.linspace(0.0, 6 * np.pi, 32)
                    m = 1.5 + rng.uniform(0.5, 1.4) * np.sin(x + rng.uniform(0, 7))
                else:
                    m = rng.uniform(0.0, 3.0, 32)
                st = make_state(g, m)
                for theta in (1.0, 1.5, 2.0):
                    f = compute_fluxes(st, g, PM, theta)
                    me = st.m
                    s = f.sm_x
                    right = me[g.interior] + half * s
                    left = me[g.interior] - half * s
                    nbr_hi = np.maximum(me[1:-3], np.maximum(me[2:-2], me[3:-1]))
                    nbr_lo = np.minimum(me[1:-3], np.minimum(me[2:-2], me[3:-1]))
                    assert np.all(right <= nbr_hi + 1e-13) and np.all(right >= nbr_lo - 1e-13)
                    assert np.all(left <= nbr_hi + 1e-13) and np.all(left >= nbr_lo - 1e-13)

    def test_2d_y_constant_matches_1d(self):
        rng = np.random.default_rng(31)
        n = 10
        m = rng.uniform(0.0, 2.0, n)
        c = rng.uniform(0.0, 2.0, n)
        g1 = Grid.line(n, 1.0)
        st1 = make_state(g1, m, c)
        f1 = compute_fluxes(st1, g1, PM, 1.5)
        g2 = Grid.box(n, 5, 1.0, 0.5)
        st2 = make_state(g2, np.tile(m, (5, 1)), np.tile(c, (5, 1)))
        f2 = compute_fluxes(st2, g2, PM, 1.5)
        for row in range(5):
            assert np.allclose(f2.fm_x[row], f1.fm_x, atol=1e-15, rtol=0.0)
            assert np.allclose(f2.fc_x[row], f1.fc_x, atol=1e-15, rtol=0.0)
        assert not f2.fm_y.any() and not f2.fc_y.any()

    def test_2d_transpose_symmetry(self):
        rng = np.random.default_rng(37)
        n = 8
        g = Grid.box(n, n, 1.0, 1.0)
        mi = rng.uniform(0.0, 2.0, (n, n))
        ci = rng.uniform(0.0, 2.0, (n, n))
        fa = compute_fluxes(make_state(g, mi, ci), g, PM, 1.5)
        fb = compute_fluxes(make_state(g, mi.T, ci.T), g, PM, 1.5)
        assert np.allclose(fa.fm_x, fb.fm_y.T, atol=1e-15, rtol=0.0)
        assert np.allclose(fa.fc_x, fb.fc_y.T, atol=1e-15, rtol=0.0)

    def test_nan_aborts_with_diagnostic(self):
        g = Grid.line(6, 1.0)
        st = make_state(g, np.full(6, 1.0), np.full(6, 1.0))
        st.c[g.ghost + 2] = np.nan
        with pytest.raises(SolverError, match="non-finite"):
            compute_fluxes(st, g, PM, 1.5)
