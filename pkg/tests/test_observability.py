import numpy as np
import pytest

from sidewise import (CoefficientField, SpaceTimeField, TimeSignal, beta,
                      check_energy_bound, discretization_allowance,
                      dual_pairing_factored, empirical_observability_ratio,
                      extend_parity, extract_flux, h1_star_norm, make_grid,
                      observability_report, sample_boundary_data,
                      sidewise_energy, solve_adjoint, solve_forward,
                      theoretical_observability_constant)

UNIT = CoefficientField.constant(1.0)


def piecewise_rho():
    xs = np.linspace(0, 1, 41)
    rho = np.interp(xs, [0, 0.45, 0.5, 1.0], [1.0, 1.0, 1.5, 1.5])
    return CoefficientField(1.0, rho, np.ones(41))


def adjoint_sample(coeff, n=100, horizon=3.0, seed=0):
    grid = make_grid(coeff, n, horizon)
    s0 = sample_boundary_data(coeff, grid, 1, seed=seed)[0]
    psi = solve_adjoint(coeff, grid, s0)
    return grid, s0, psi


class TestParityExtension:
    def test_zero_field(self):
        grid = make_grid(UNIT, 40, 2.0)
        field = SpaceTimeField(grid, np.zeros((grid.N + 1, grid.M + 1)))
        ext = extend_parity(field)
        assert ext.grid.T == pytest.approx(4.0)
        assert np.all(ext.values == 0.0)

    def test_even_symmetry_exact(self):
        _, _, psi = adjoint_sample(UNIT)
        ext = extend_parity(psi)
        m = psi.grid.M
        for k in (1, 5, 20):
            assert np.array_equal(ext.values[:, m + k], ext.values[:, m - k])

    def test_restriction_recovers_original(self):
        _, _, psi = adjoint_sample(UNIT)
        ext = extend_parity(psi)
        assert np.array_equal(ext.values[:, :psi.grid.M + 1], psi.values)

    def test_discrete_equation_across_seam(self):
        grid, _, psi = adjoint_sample(UNIT, n=80)
        ext = extend_parity(psi)
        v = ext.values
        m = grid.M
        lam2 = (grid.dt / grid.dx) ** 2
        resid = (v[1:-1, m + 1] - 2 * v[1:-1, m] + v[1:-1, m - 1]
                 - lam2 * (v[2:, m] - 2 * v[1:-1, m] + v[:-2, m]))
        assert np.abs(resid).max() < 1e-12 * max(np.abs(v).max(), 1.0)

    def test_rejects_nonzero_final_data(self):
        grid = make_grid(UNIT, 40, 2.0)
        y0 = np.sin(np.pi * grid.x)
        y = solve_forward(UNIT, grid, y0, np.zeros(grid.N + 1),
                          TimeSignal.zeros_like_grid(grid),
                          TimeSignal.zeros_like_grid(grid))
        with pytest.raises(ValueError, match="final"):
            extend_parity(y)


class TestSidewiseEnergy:
    def test_zero_field(self):
        grid = make_grid(UNIT, 40, 2.0)
        ext = extend_parity(SpaceTimeField(grid, np.zeros((grid.N + 1, grid.M + 1))))
        assert sidewise_energy(ext, UNIT, 5) == 0.0

    def test_left_end_reduces_to_flux_energy(self):
        # psi(0,.) = 0 makes psi_t(0,.) vanish, so F(0) is the a(0)-weighted
        # flux energy over the original horizon
        grid, _, psi = adjoint_sample(UNIT, n=200)
        ext = extend_parity(psi)
        f0 = sidewise_energy(ext, UNIT, 0)
        flux = extract_flux(psi, "left").values
        ref = np.trapezoid(flux ** 2, dx=grid.dt)
        assert f0 == pytest.approx(ref, rel=1e-10)

    def test_profile_grid_convergence(self):
        profiles = []
        for n in (100, 200):
            grid = make_grid(UNIT, n, 3.0)
            s0 = sample_boundary_data(UNIT, grid, 1, seed=3)[0]
            ext = extend_parity(solve_adjoint(UNIT, grid, s0))
            xs = np.linspace(0.1, 0.9, 9)
            prof = [sidewise_energy(ext, UNIT, int(round(x * n))) for x in xs]
            profiles.append(np.asarray(prof))
        rel = np.abs(profiles[1] - profiles[0]).max() / profiles[1].max()
        assert rel < 5e-2

    def test_empty_cone_rejected(self):
        coeff = CoefficientField(1.0, np.full(3, 4.0), np.ones(3))   # beta = 2
        grid = make_grid(coeff, 40, 1.8)   # 2T = 3.6 < 2 beta L: cone empty at x=L
        ext = extend_parity(SpaceTimeField(grid, np.zeros((grid.N + 1, grid.M + 1))))
        with pytest.raises(ValueError, match="cone"):
            sidewise_energy(ext, coeff, grid.N)


class TestEnergyBound:
    def test_zero_field_passes(self):
        grid = make_grid(UNIT, 40, 2.0)
        ext = extend_parity(SpaceTimeField(grid, np.zeros((grid.N + 1, grid.M + 1))))
        assert check_energy_bound(ext, UNIT) == 0.0

    def test_constant_coefficients_hold(self):
        grid, _, psi = adjoint_sample(UNIT, n=200)
        margin = check_energy_bound(extend_parity(psi), UNIT)
        assert margin > -discretization_allowance(200)

    def test_piecewise_ensemble_holds(self):
        coeff = piecewise_rho()
        grid = make_grid(coeff, 100, 3.0)
        tol = discretization_allowance(100)
        for s0 in sample_boundary_data(coeff, grid, 10, seed=5):
            ext = extend_parity(solve_adjoint(coeff, grid, s0))
            assert check_energy_bound(ext, coeff) > -tol


class TestH1Norm:
    def test_zero(self):
        sig = TimeSignal(0.0, 0.01, np.zeros(301), active_from=1.0)
        assert h1_star_norm(sig) == 0.0

    def test_linear_ramp(self):
        # s0 = t - 1 on (1, 2): norm^2 = 1/3 + 1
        dt = 1e-3
        t = dt * np.arange(2001)
        vals = np.where(t >= 1.0, t - 1.0, 0.0)
        sig = TimeSignal(0.0, dt, vals, active_from=1.0)
        assert h1_star_norm(sig) ** 2 == pytest.approx(4.0 / 3.0, rel=1e-4)

    def test_homogeneity(self):
        grid = make_grid(UNIT, 60, 3.0)
        s0 = sample_boundary_data(UNIT, grid, 1, seed=8)[0]
        doubled = TimeSignal(0.0, s0.dt, 2.0 * s0.values, s0.active_from)
        assert h1_star_norm(doubled) == pytest.approx(2 * h1_star_norm(s0), rel=1e-12)


class TestFactoredPairing:
    def test_zero_q(self):
        grid = make_grid(UNIT, 60, 3.0)
        s0 = sample_boundary_data(UNIT, grid, 1, seed=1)[0]
        phi = TimeSignal(0.0, grid.dt, 3.0 - grid.t)
        q = TimeSignal.zeros_like_grid(grid)
        assert dual_pairing_factored(s0, phi, q) == 0.0

    def test_vanishing_where_derivative_lives(self):
        # s0 constant after a short ramp; phi*q supported where s0' = 0
        grid = make_grid(UNIT, 100, 3.0)
        cut = grid.time_index(1.0)
        t = grid.t
        ramp_end = 1.3
        vals = np.clip((t - 1.0) / (ramp_end - 1.0), 0.0, 1.0)
        vals[:cut + 1] = 0.0
        s0 = TimeSignal(0.0, grid.dt, vals, active_from=cut * grid.dt)
        z = (t - 2.2) / 0.3
        support = np.where(np.abs(z) < 1, np.exp(1 - 1 / np.maximum(1e-300, 1 - z ** 2)), 0.0)
        phi = TimeSignal(0.0, grid.dt, support * (3.0 - t))
        q = TimeSignal(0.0, grid.dt, np.ones(grid.M + 1))
        assert abs(dual_pairing_factored(s0, phi, q)) < 1e-12

    def test_polynomial_against_antiderivative(self):
        # s0 = (t-1)^2, phi = 3-t, q = 1 on (1,3):
        # -int_1^3 2(t-1)(3-t) dt = -8/3 (computed by hand from the primitive)
        dt = 5e-4
        t = dt * np.arange(6001)
        vals = np.where(t >= 1.0, (t - 1.0) ** 2, 0.0)
        s0 = TimeSignal(0.0, dt, vals, active_from=1.0)
        phi = TimeSignal(0.0, dt, 3.0 - t)
        q = TimeSignal(0.0, dt, np.ones(t.size))
        assert dual_pairing_factored(s0, phi, q) == pytest.approx(-8.0 / 3.0, rel=1e-5)

    def test_rejects_nonvanishing_phi(self):
        grid = make_grid(UNIT, 60, 3.0)
        s0 = sample_boundary_data(UNIT, grid, 1, seed=1)[0]
        phi = TimeSignal(0.0, grid.dt, np.ones(grid.M + 1))
        with pytest.raises(ValueError, match="phi"):
            dual_pairing_factored(s0, phi, TimeSignal.zeros_like_grid(grid))


class TestObservabilityRatio:
    def test_scale_invariance(self):
        grid = make_grid(UNIT, 100, 3.0)
        s0 = sample_boundary_data(UNIT, grid, 1, seed=2)[0]
        r1 = empirical_observability_ratio(UNIT, grid, s0)
        s2 = TimeSignal(0.0, s0.dt, 3.7 * s0.values, s0.active_from)
        r2 = empirical_observability_ratio(UNIT, grid, s2)
        assert r2 == pytest.approx(r1, rel=1e-12)

    def test_ensemble_below_constant(self):
        grid = make_grid(UNIT, 100, 3.0)
        c1 = theoretical_observability_constant(UNIT)
        tol = discretization_allowance(100)
        for s0 in sample_boundary_data(UNIT, grid, 10, seed=6):
            assert empirical_observability_ratio(UNIT, grid, s0) <= c1 * (1 + tol)

    def test_sampler_is_deterministic(self):
        grid = make_grid(UNIT, 60, 3.0)
        a = sample_boundary_data(UNIT, grid, 3, seed=9)
        b = sample_boundary_data(UNIT, grid, 3, seed=9)
        for sa, sb in zip(a, b):
            assert np.array_equal(sa.values, sb.values)


class TestReport:
    def test_full_report(self):
        coeff = piecewise_rho()
        grid = make_grid(coeff, 100, 3.0)
        rep = observability_report(coeff, grid, n_samples=8, seed=12)
        assert rep.violations == 0
        assert rep.C2_empirical > 0
        assert rep.ratios.shape == (8,)
        assert rep.F_profile.shape == (grid.N + 1,)
        assert rep.min_time == pytest.approx(beta(coeff))
        assert np.all(rep.ratios <= rep.C1_theoretical * (1 + rep.disc_tol))
