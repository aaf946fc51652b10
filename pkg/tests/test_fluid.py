"""Tests for the Dufour-extended fluid solver."""

import numpy as np
import pytest

from maxwellgas.errors import DomainError, PositivityError
from maxwellgas.fields import FieldState, Grid, conserved_totals
from maxwellgas.fluid import (
    boost,
    compute_fluxes,
    euler_flux,
    heat_flux,
    lattice_equation_of_state,
    rhs,
    run,
    short_euler_rhs,
    stable_time_step,
    step,
    unboost,
    viscous_stress,
    viscous_work_equivalence,
)
from maxwellgas.stencils import gradient
from maxwellgas.verify import (
    convergence_slope,
    dufour_flux_errors,
    frame_difference_slope,
    viscous_work_slope,
    wave_state,
)


class TestConstitutiveLaws:
    """Tests for the viscous stress and the heat flux."""

    def test_stress_is_symmetric_and_traceless(self, transport_table):
        grad_u = np.random.default_rng(3).normal(size=(3, 3))
        tau = viscous_stress(grad_u, 1.3, transport_table)
        assert np.allclose(tau, tau.T, atol=1e-15)
        assert abs(np.trace(tau)) < 1e-14

    def test_stokes_relation(self, transport_table):
        """Simple shear gives tau_xy = lambda_shear theta^(1/2) du_x/dy."""
        grad_u = np.zeros((3, 3))
        grad_u[0, 1] = 0.7
        tau = viscous_stress(grad_u, 1.0, transport_table)
        assert tau[0, 1] == pytest.approx(transport_table.lambda_shear * 0.7, rel=1e-14)
        assert tau[0, 0] == 0.0

    def test_viscosity_grows_as_root_temperature(self, transport_table):
        grad_u = np.random.default_rng(5).normal(size=(3, 3))
        hot = viscous_stress(grad_u, 4.0, transport_table)
        cold = viscous_stress(grad_u, 1.0, transport_table)
        assert np.allclose(hot, 2.0 * cold, rtol=1e-14)

    def test_dufour_flux_down_density_gradient(self, transport_table):
        """Isothermal gas at rest: q = -lambda_dufour theta^(3/2) grad log rho."""
        g = np.array([0.2, 0.0, -0.1])
        q = heat_flux(np.zeros(3), g, 2.0, np.zeros(3), np.zeros((3, 3)), transport_table)
        assert np.allclose(q, -transport_table.lambda_dufour * 2.0 ** 1.5 * g, rtol=1e-14)

    def test_fourier_flux(self, transport_table):
        g = np.array([0.0, 0.3, 0.0])
        q = heat_flux(g, np.zeros(3), 1.0, np.zeros(3), np.zeros((3, 3)), transport_table)
        assert q[1] == pytest.approx(-transport_table.lambda_fourier * 0.3, rel=1e-14)


class TestFaceFluxes:
    """Tests for the discrete face fluxes."""

    def test_dufour_face_flux_converges_at_second_order(self, nondim, transport_table):
        slope, errors = dufour_flux_errors(nondim, transport_table)
        assert slope == pytest.approx(2.0, abs=0.2)
        assert errors[-1] < 1e-2

    def test_face_heat_flux_has_one_entry_per_face(self, nondim, transport_table):
        (flux,) = compute_fluxes(wave_state(32), transport_table, nondim)
        assert flux.heat.shape == (33,)
        assert flux.stress.shape[-1] == 33

    def test_reflective_wall_blocks_mass(self, nondim, transport_table):
        state = wave_state(32, "reflective")
        (flux,) = compute_fluxes(state, transport_table, nondim)
        assert flux.mass[0] == 0.0
        assert flux.mass[-1] == 0.0

    def test_viscous_work_groupings_agree(self, nondim, transport_table):
        cells = np.array([32, 64, 128])
        errors = [viscous_work_equivalence(wave_state(int(n)), transport_table, nondim) for n in cells]
        assert convergence_slope(cells, errors) == pytest.approx(2.0, abs=0.3)

    def test_viscous_work_agrees_on_random_fields(self, nondim, transport_table):
        slope, errors = viscous_work_slope(nondim, transport_table)
        assert slope == pytest.approx(2.0, abs=0.3)
        assert errors[-1] < errors[0]

    def test_viscous_work_detects_mis_bound_viscosity(self, nondim, transport_table):
        """A viscosity that is not k_B lambda2 / 3m leaves a discrepancy that does not refine away."""
        wrong = transport_table.with_overrides(viscosity=3.0 * transport_table.lambda_shear)
        errors = [viscous_work_equivalence(wave_state(n), wrong, nondim) for n in (64, 256)]
        assert errors[-1] > 1e-3
        assert errors[-1] > 0.5 * errors[0]
        assert viscous_work_equivalence(wave_state(256), transport_table, nondim) < 1e-3

    def test_viscous_work_vanishes_for_constant_velocity(self, nondim, transport_table, periodic_grid):
        x = periodic_grid.coordinates(0)
        state = FieldState(grid=periodic_grid, rho=1.0, u=np.array([0.3, -0.2, 0.1]),
                           theta=1.0 + 0.2 * np.sin(2 * np.pi * x))
        assert viscous_work_equivalence(state, transport_table, nondim) < 1e-14

    def test_zero_coefficients_give_euler_fluxes(self, nondim, transport_table):
        """With every transport coefficient zero the face fluxes are the averaged Euler fluxes."""
        inviscid = transport_table.with_overrides(viscosity=0.0, conductivity=0.0, dufour=0.0)
        state = wave_state(32)
        (flux,) = compute_fluxes(state, inviscid, nondim)
        padded = [np.concatenate([f[..., -1:], f, f[..., :1]], axis=-1)
                  for f in (state.rho, state.u, state.theta)]
        mass, momentum, energy = euler_flux(*padded, 0, nondim)
        assert np.all(flux.heat == 0.0)
        assert np.all(flux.stress == 0.0)
        assert np.allclose(flux.mass, 0.5 * (mass[:-1] + mass[1:]), rtol=0, atol=1e-15)
        assert np.allclose(flux.momentum, 0.5 * (momentum[:, :-1] + momentum[:, 1:]), rtol=0, atol=1e-15)
        assert np.allclose(flux.energy, 0.5 * (energy[:-1] + energy[1:]), rtol=0, atol=1e-15)


class TestStep:
    """Tests for time stepping."""

    def test_uniform_state_is_fixed(self, nondim, transport_table, periodic_grid):
        state = FieldState.uniform(periodic_grid, 0.8, [0.3, -0.1, 0.2], 1.4)
        result = run(state, transport_table, nondim, t_end=0.05, output_every=100)
        final = result.final
        assert np.allclose(final.rho, 0.8, rtol=0, atol=1e-14)
        assert np.allclose(final.u[0], 0.3, rtol=0, atol=1e-14)
        assert np.allclose(final.theta, 1.4, rtol=0, atol=1e-14)

    def test_periodic_conservation(self, nondim, transport_table):
        """Mass, momentum and energy totals survive 1000 steps on 128 cells."""
        state = wave_state(128)
        before = conserved_totals(state, nondim)
        for _ in range(1000):
            state = step(state, stable_time_step(state, transport_table, nondim), transport_table, nondim)
        after = conserved_totals(state, nondim)
        assert after["mass"] == pytest.approx(before["mass"], rel=1e-13)
        assert np.allclose(after["momentum"], before["momentum"], rtol=0, atol=1e-11)
        assert after["energy"] == pytest.approx(before["energy"], rel=1e-11)

    def test_reflective_conservation(self, nondim, transport_table):
        state = wave_state(32, "reflective")
        before = conserved_totals(state, nondim)
        result = run(state, transport_table, nondim, t_end=0.02, output_every=10)
        after = result.totals[-1]
        assert after["mass"] == pytest.approx(before["mass"], rel=1e-13)
        assert after["energy"] == pytest.approx(before["energy"], rel=1e-12)

    def test_cfl_violation(self, nondim, transport_table, smooth_state):
        bound = stable_time_step(smooth_state, transport_table, nondim)
        with pytest.raises(DomainError, match="CFL violation"):
            step(smooth_state, 10.0 * bound, transport_table, nondim)

    def test_unknown_scheme(self, nondim, transport_table, smooth_state):
        with pytest.raises(DomainError, match="Unknown scheme"):
            step(smooth_state, 1e-5, transport_table, nondim, scheme="rk4")

    def test_positivity_error_names_cell(self, periodic_grid):
        theta = np.ones(64)
        theta[5] = -0.1
        state = FieldState(grid=periodic_grid, rho=1.0, u=np.zeros(3), theta=theta, t=0.25)
        with pytest.raises(PositivityError) as excinfo:
            state.check_positive()
        assert excinfo.value.field == "theta"
        assert excinfo.value.index == (5,)
        assert excinfo.value.to_dict()["t"] == 0.25

    def test_temperature_bump_spreads(self, nondim, transport_table, periodic_grid):
        """An isobaric bump at rest keeps energy while its temperature variance falls."""
        x = periodic_grid.coordinates(0)
        theta = 1.0 + 0.05 * np.exp(-0.5 * ((x - 0.5) / 0.08) ** 2)
        state = FieldState(grid=periodic_grid, rho=1.0 / theta, u=np.zeros(3), theta=theta)
        result = run(state, transport_table, nondim, t_end=0.02, output_every=20)
        variance = [np.var(s.theta) for s in result.snapshots]
        assert np.all(np.diff(variance) < 0)
        energy = [t["energy"] for t in result.totals]
        assert np.allclose(energy, energy[0], rtol=1e-11, atol=0)

    def test_shear_layer_dissipates_kinetic_energy(self, nondim, transport_table):
        """Viscous heating moves the shear layer's kinetic energy into heat."""
        grid = Grid.uniform(128, 1.0, "periodic")
        x = grid.coordinates(0)
        u = np.zeros((3, 128))
        u[1] = 0.2 * (np.tanh((x - 0.25) / 0.05) - np.tanh((x - 0.75) / 0.05) - 1.0)
        state = FieldState(grid=grid, rho=1.0, u=u, theta=1.0)
        result = run(state, transport_table, nondim, t_end=0.01, output_every=25)
        kinetic = [float(np.sum(0.5 * s.rho * np.sum(s.u ** 2, axis=0))) for s in result.snapshots]
        assert np.all(np.diff(kinetic) < 0)
        energy = [t["energy"] for t in result.totals]
        assert np.allclose(energy, energy[0], rtol=1e-11, atol=0)

    def test_run_records_snapshots(self, nondim, transport_table, smooth_state):
        result = run(smooth_state, transport_table, nondim, t_end=0.01, output_every=3)
        assert result.snapshots[0] is smooth_state
        assert result.final.t == pytest.approx(0.01)
        assert len(result.totals) == len(result.dt_history) + 1


class TestGalilean:
    """Tests for frame changes."""

    def test_boost_round_trip(self, smooth_state):
        moved = smooth_state.with_time(0.3)
        back = unboost(boost(moved, [0.4, 0, 0]), [0.4, 0, 0])
        assert np.allclose(back.rho, moved.rho, atol=1e-13)
        assert np.allclose(back.u, moved.u, atol=1e-13)

    def test_boost_needs_periodic_axis(self):
        state = wave_state(16, "reflective").with_time(1.0)
        with pytest.raises(DomainError, match="reflective"):
            boost(state, [0.1, 0, 0])

    def test_frame_difference_converges_at_second_order(self, nondim, transport_table):
        """Evolving then boosting matches boosting then evolving as h -> 0."""
        slope, errors = frame_difference_slope(nondim, transport_table.scaled(10.0))
        assert slope == pytest.approx(2.0, abs=0.3)
        assert errors[-1] < errors[0]


class TestLatticeEquationOfState:
    def test_dilute_limit_is_ideal(self, nondim, periodic_grid):
        state = FieldState.uniform(periodic_grid, 1e-4, [0, 0, 0], 2.0)
        assert np.allclose(lattice_equation_of_state(state, nondim), 2e-4, rtol=1e-4)

    def test_full_occupation_rejected(self, nondim, periodic_grid):
        state = FieldState.uniform(periodic_grid, 1.0, [0, 0, 0], 1.0)
        with pytest.raises(DomainError, match="Occupation"):
            lattice_equation_of_state(state, nondim)


class TestEulerFlux:
    """Tests for the perfect-gas Euler fluxes."""

    def test_gas_at_rest_carries_only_pressure(self, nondim):
        rho = np.array([0.5, 2.0])
        theta = np.array([1.5, 0.25])
        mass, momentum, energy = euler_flux(rho, np.zeros((3, 2)), theta, 0, nondim)
        assert np.all(mass == 0) and np.all(energy == 0)
        assert np.allclose(momentum[0], rho * theta)
        assert np.all(momentum[1:] == 0)

    def test_moving_gas(self, nondim):
        u = np.array([[0.3], [0.4], [0.0]])
        mass, momentum, energy = euler_flux(np.array([2.0]), u, np.array([1.0]), 1, nondim)
        assert mass[0] == pytest.approx(0.8)
        assert momentum[:, 0] == pytest.approx([0.24, 0.32 + 2.0, 0.0])
        assert energy[0] == pytest.approx(0.8 * (2.5 + 0.125))


class TestShortEuler:
    """Tests for the material derivatives of the Euler system."""

    def test_uniform_state(self, nondim, periodic_grid):
        d = short_euler_rhs(FieldState.uniform(periodic_grid, 1.2, [0.3, 0, 0], 0.9), nondim)
        assert np.all(d.D_rho == 0) and np.all(d.D_u == 0) and np.all(d.D_theta == 0)

    def test_gas_at_rest_keeps_temperature(self, nondim, periodic_grid):
        x = periodic_grid.coordinates(0)
        state = FieldState(grid=periodic_grid, rho=1.0, u=np.zeros(3), theta=1.0 + 0.2 * np.sin(2 * np.pi * x))
        d = short_euler_rhs(state, nondim)
        assert np.all(d.D_theta == 0)
        assert np.all(d.D_rho == 0)

    def test_acceleration_matches_momentum_update(self, nondim, transport_table, periodic_grid):
        """At rest, d(rho u)/dt / rho from the flux update equals D u."""
        inviscid = transport_table.with_overrides(viscosity=0.0, conductivity=0.0, dufour=0.0)
        x = periodic_grid.coordinates(0)
        state = FieldState(grid=periodic_grid, rho=1.0 + 0.1 * np.sin(2 * np.pi * x), u=np.zeros(3),
                           theta=1.0 + 0.05 * np.cos(2 * np.pi * x))
        _, d_momentum, _ = rhs(state, inviscid, nondim)
        expected = short_euler_rhs(state, nondim).D_u
        assert np.allclose(d_momentum / state.rho, expected, rtol=1e-12, atol=1e-12)

    def test_density_derivative_consistent_with_flux_update(self, nondim, transport_table):
        """d rho/dt + u.grad rho from the fluxes approaches D rho at second order."""
        inviscid = transport_table.with_overrides(viscosity=0.0, conductivity=0.0, dufour=0.0)
        cells = np.array([32, 64, 128])
        errors = []
        for n in cells:
            state = wave_state(int(n))
            d_mass, _, _ = rhs(state, inviscid, nondim)
            material = d_mass + state.u[0] * gradient(state.rho, state.grid)[0]
            errors.append(np.max(np.abs(material - short_euler_rhs(state, nondim).D_rho)))
        assert convergence_slope(cells, errors) == pytest.approx(2.0, abs=0.2)
