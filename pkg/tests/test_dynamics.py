"""
Tests for the Driven-Dissipative Dynamics

The linear cavity (Ec = 0) has a closed-form response, so it is the oracle
for the steady-state solver, the input-output relations and the
demodulated two-tone evolution. Powers are chosen so that photon numbers
stay far below one unless a test is about saturation or truncation.
"""

import math

import numpy as np
import pytest

from models.drive import DriveSpec, Port, Tone
from models.quantum import DensityMatrix, Trajectory
from models.solver import SolverSettings, TwoToneMethod
from simulation import circuit, dynamics, spectrum
from simulation.dynamics import DemodWindow, DrivenHamiltonian, ResonatorModel
from simulation.errors import DomainError, WindowTooShortError

LINEAR_CAVITY = ResonatorModel(f01_GHz=4.7, Ec_GHz=0.0, kappa_c_MHz=12.0, kappa_i_MHz=3.0)


def linear_settings(**overrides):
    data = {"fock_dim": 5, "max_fock_dim": 12, "fock_step": 5}
    data.update(overrides)
    return SolverSettings(**data)


# ==============================================================================
# DRIVE AND LOSS CHANNELS
# ==============================================================================

class TestDriveNormalization:

    def test_drive_amplitude_matches_photon_flux(self):
        eps = dynamics.drive_amplitude(100.0, 4.7, 12.0)
        kappa_c = circuit.mhz_to_angular_per_s(12.0)
        a_in = dynamics.input_amplitude(100.0, 4.7)
        assert eps == pytest.approx(math.sqrt(kappa_c) * a_in)

    def test_zero_power_gives_zero_drive(self):
        assert dynamics.drive_amplitude(0.0, 4.7, 12.0) == 0.0

    def test_negative_power_rejected(self):
        with pytest.raises(DomainError):
            dynamics.drive_amplitude(-1.0, 4.7, 12.0)

    def test_three_collapse_channels(self):
        c_ops = dynamics.collapse_operators(LINEAR_CAVITY, 4)
        assert len(c_ops) == 3
        kappa_c = circuit.mhz_to_angular_per_ns(12.0)
        assert c_ops[0].entries[0, 1] == pytest.approx(math.sqrt(kappa_c))
        assert c_ops[2].entries[0, 1] == pytest.approx(math.sqrt(circuit.mhz_to_angular_per_ns(3.0)))

    def test_model_from_params_uses_transmon_f01(self, reference_params):
        model = ResonatorModel.from_params(reference_params)
        assert model.f01_GHz == pytest.approx(4.715596, abs=1e-5)
        assert model.kappa_total_MHz == pytest.approx(27.0)

    def test_rotating_frame_rejects_two_tones(self):
        H = spectrum.kerr_hamiltonian(4.7, 0.29, 4)
        drive = DriveSpec.pump_probe(4.7, 1.0, 4.4, 1.0)
        with pytest.raises(DomainError):
            dynamics.rotating_frame_hamiltonian(H, drive, 1.0)


# ==============================================================================
# STEADY STATE
# ==============================================================================

class TestSteadyState:

    def test_liouvillian_preserves_trace(self):
        H = spectrum.kerr_hamiltonian(4.7, 0.29, 4)
        L = dynamics.liouvillian(H, dynamics.collapse_operators(LINEAR_CAVITY, 4))
        trace_row = np.eye(4).reshape(-1)
        assert np.allclose(trace_row @ L, 0.0, atol=1e-12)

    def test_linear_cavity_photon_number(self):
        """
        SCENARIO: A linear cavity driven on resonance
        GIVEN: Ec = 0, kappa_c = 12 MHz per port, kappa_i = 3 MHz, P = 100 aW
        WHEN: the steady state is solved
        THEN: <n> matches 4 kappa_c P / (kappa_tot^2 h f)
        """
        drive = DriveSpec.single(4.7, 100.0)
        result = dynamics.solve_with_escalation(LINEAR_CAVITY, drive, linear_settings())

        expected = circuit.linear_photon_number(100.0, 4.7, 12.0, 3.0)
        assert result.truncation_ok
        assert result.n_expect == pytest.approx(expected, rel=1e-3)

    def test_steady_state_is_a_valid_density_matrix(self, reference_params):
        drive = DriveSpec.single(4.7156, 500.0)
        result = dynamics.solve_with_escalation(reference_params, drive, linear_settings())
        assert result.rho.violations() == []
        assert result.residual < 1e-10

    @pytest.mark.parametrize("detuning_MHz", [-20.0, 0.0, 7.5, 40.0])
    def test_linear_transmission_matches_closed_form(self, detuning_MHz):
        f = 4.7 + detuning_MHz * 1e-3
        drive = DriveSpec.single(f, 1.0)
        ss = dynamics.solve_with_escalation(LINEAR_CAVITY, drive, linear_settings())
        t, T, R = dynamics.transmission(ss, drive, LINEAR_CAVITY)

        t_lin, r_lin = dynamics.linear_response(f, LINEAR_CAVITY)
        assert t == pytest.approx(t_lin, rel=1e-4, abs=1e-8)
        assert T == pytest.approx(abs(t_lin) ** 2, rel=1e-4)
        assert R == pytest.approx(abs(r_lin) ** 2, rel=1e-3, abs=1e-8)

    def test_reference_device_weak_drive_on_resonance(self, reference_params):
        model = ResonatorModel.from_params(reference_params)
        drive = DriveSpec.single(model.f01_GHz, 0.01)
        ss = dynamics.solve_with_escalation(model, drive, linear_settings())
        _, T, R = dynamics.transmission(ss, drive, model)

        assert T == pytest.approx((24 / 27) ** 2, rel=1e-3)
        assert R == pytest.approx((3 / 27) ** 2, rel=0.02)

    def test_transmission_saturates_at_high_power(self, reference_params):
        """
        SCENARIO: Bleaching of the single-photon line
        GIVEN: the reference device driven at f01
        WHEN: the input power goes from 8.6 aW to 1000 aW
        THEN: the transmission drops by at least an order of magnitude
        """
        model = ResonatorModel.from_params(reference_params)
        low = DriveSpec.single(model.f01_GHz, 8.6)
        high = DriveSpec.single(model.f01_GHz, 1000.0)
        settings = SolverSettings()

        _, T_low, _ = dynamics.transmission(dynamics.solve_with_escalation(model, low, settings), low, model)
        _, T_high, _ = dynamics.transmission(dynamics.solve_with_escalation(model, high, settings), high, model)
        assert T_high <= 0.1 * T_low

    def test_right_port_input_mirrors_left_port(self, reference_params):
        model = ResonatorModel.from_params(reference_params)
        kappa_in, kappa_out = dynamics.port_rates(model, Port.LEFT)
        assert dynamics.port_rates(model, Port.RIGHT) == (kappa_out, kappa_in)

        left = DriveSpec.single(model.f01_GHz + 0.004, 1.0)
        right = DriveSpec(tones=[Tone(f_GHz=model.f01_GHz + 0.004, P_aW=1.0, port=Port.RIGHT)])
        ss = dynamics.solve_with_escalation(model, left, linear_settings())
        t_left, T_left, R_left = dynamics.transmission(ss, left, model)
        t_right, T_right, R_right = dynamics.transmission(ss, right, model)
        assert t_right == pytest.approx(t_left, rel=1e-12)
        assert (T_right, R_right) == pytest.approx((T_left, R_left), rel=1e-12)

    def test_transmission_undefined_at_zero_power(self):
        drive = DriveSpec.single(4.7, 0.0)
        ss = dynamics.solve_with_escalation(LINEAR_CAVITY, drive, linear_settings())
        assert ss.n_expect == pytest.approx(0.0, abs=1e-12)
        with pytest.raises(DomainError):
            dynamics.transmission(ss, drive, LINEAR_CAVITY)

    def test_linear_response_on_resonance(self, reference_params):
        model = ResonatorModel.from_params(reference_params)
        t, r = dynamics.linear_response(model.f01_GHz, model)
        assert abs(t) ** 2 == pytest.approx(0.790, abs=1e-3)
        assert abs(r) ** 2 == pytest.approx(0.0123, abs=1e-4)


class TestFockEscalation:

    def test_escalates_until_top_level_is_empty(self):
        drive = DriveSpec.single(4.7, 100.0)
        settings = SolverSettings(fock_dim=3, max_fock_dim=20, fock_step=5)
        result = dynamics.solve_with_escalation(LINEAR_CAVITY, drive, settings)
        assert result.fock_dim == 8
        assert result.truncation_ok
        assert result.top_population < settings.truncation_tol

    def test_flags_truncation_at_maximum_dimension(self):
        """
        SCENARIO: A strongly driven linear cavity with a tiny Fock cap
        GIVEN: tens of photons but max_fock_dim = 4
        WHEN: the escalation loop reaches the cap
        THEN: the last result comes back with truncation_ok = False
        """
        drive = DriveSpec.single(4.7, 1e4)
        settings = SolverSettings(fock_dim=3, max_fock_dim=4, fock_step=5)
        result = dynamics.solve_with_escalation(LINEAR_CAVITY, drive, settings)
        assert result.fock_dim == 4
        assert not result.truncation_ok


# ==============================================================================
# TIME EVOLUTION AND DEMODULATION
# ==============================================================================

class TestTimeEvolution:

    def test_single_tone_evolution_relaxes_to_steady_state(self, reference_params):
        model = ResonatorModel.from_params(reference_params)
        drive = DriveSpec.single(model.f01_GHz + 0.005, 200.0)
        dim = 6
        eps = dynamics.drive_amplitude(200.0, drive.tones[0].f_GHz, model.kappa_c_MHz)
        H_rf = dynamics.rotating_frame_hamiltonian(
            spectrum.kerr_hamiltonian(model.f01_GHz, model.Ec_GHz, dim), drive, eps
        )
        c_ops = dynamics.collapse_operators(model, dim)

        trajectory = dynamics.time_evolve(
            DrivenHamiltonian(static=H_rf),
            c_ops,
            DensityMatrix.fock_state(dim, 0),
            (0.0, 250.0),
            t_eval=np.linspace(0.0, 250.0, 11),
        )
        ss = dynamics.steady_state(H_rf, c_ops)

        assert trajectory.max_trace_error < 1e-7
        assert trajectory.a_expect[-1] == pytest.approx(ss.a_expect, abs=1e-4 * abs(ss.a_expect) + 1e-9)

    def test_initial_state_dimension_must_match(self):
        H = dynamics.rotating_frame_hamiltonian(
            spectrum.kerr_hamiltonian(4.7, 0.0, 4), DriveSpec.single(4.7, 1.0), 1.0
        )
        with pytest.raises(DomainError):
            dynamics.time_evolve(
                DrivenHamiltonian(static=H),
                dynamics.collapse_operators(LINEAR_CAVITY, 4),
                DensityMatrix.fock_state(5, 0),
                (0.0, 1.0),
            )

    def test_weak_probe_without_pump_matches_linear_response(self, reference_params):
        """
        SCENARIO: Two-tone run with the pump switched off
        GIVEN: pump at 4.6 GHz with zero power, weak probe on f01
        WHEN: the evolution is demodulated at the probe frequency
        THEN: the probe transmission equals the linear on-resonance value
        """
        model = ResonatorModel.from_params(reference_params)
        drive = DriveSpec.pump_probe(4.6, 0.0, model.f01_GHz, 0.01)
        settings = SolverSettings(
            fock_dim=4, max_fock_dim=8, transient_kappa_units=20.0,
            window_beats=20, samples_per_beat=32,
        )
        response = dynamics.probe_response(model, drive, model.f01_GHz, settings)

        assert response.T == pytest.approx((24 / 27) ** 2, rel=0.01)
        assert response.P_out_aW > 0
        assert response.truncation_ok

    def test_probe_power_must_be_positive(self, reference_params):
        drive = DriveSpec.pump_probe(4.6, 1.0, 4.7, 0.0)
        with pytest.raises(DomainError):
            dynamics.probe_response(reference_params, drive, 4.7, SolverSettings(fock_dim=4))


class TestPeriodicRegime:

    def test_linear_cavity_orbit_holds_both_linear_responses(self):
        """
        SCENARIO: Two tones on a linear cavity
        GIVEN: Ec = 0, tones at 4.68 and 4.70 GHz
        WHEN: the periodic orbit is demodulated at either tone
        THEN: each tone sees its own closed-form linear transmission
        """
        drive = DriveSpec.pump_probe(4.68, 1.0, 4.70, 1.0)
        settings = SolverSettings(fock_dim=6, max_fock_dim=12, fock_step=3)
        for f in (4.68, 4.70):
            response = dynamics.probe_response(LINEAR_CAVITY, drive, f, settings)
            t_lin, _ = dynamics.linear_response(f, LINEAR_CAVITY)
            assert response.T == pytest.approx(abs(t_lin) ** 2, rel=1e-4)
            assert response.truncation_ok

    def test_orbit_closes_with_unit_trace(self):
        drive = DriveSpec.pump_probe(4.68, 1.0, 4.70, 1.0)
        hamiltonian = dynamics.two_tone_hamiltonian(LINEAR_CAVITY, drive, 5)
        trajectory = dynamics.periodic_steady_state(
            hamiltonian, dynamics.collapse_operators(LINEAR_CAVITY, 5), period=50.0, samples=16
        )
        assert trajectory.times.size == 16
        assert trajectory.times[-1] == pytest.approx(50.0 * 15 / 16)
        assert trajectory.max_trace_error < 1e-7
        assert trajectory.notes["residual"] < 1e-6

    def test_agrees_with_transient_evolution(self, reference_params):
        """
        SCENARIO: Pump on f01, weak probe on f01 - Ec
        GIVEN: the reference device at a fixed Fock dimension
        WHEN: the probe is solved by the periodic fixed point and by evolving
              the vacuum through the transient
        THEN: both give the same probe transmission
        """
        model = ResonatorModel.from_params(reference_params)
        drive = DriveSpec.pump_probe(model.f01_GHz, 300.0, model.f01_GHz - model.Ec_GHz, 1.0)
        common = dict(
            fock_dim=6, two_tone_fock_dim=6, max_fock_dim=6,
            transient_kappa_units=20.0, window_beats=20, samples_per_beat=32,
        )
        periodic = dynamics.probe_response(
            model, drive, drive.tones[1].f_GHz, SolverSettings(**common)
        )
        transient = dynamics.probe_response(
            model, drive, drive.tones[1].f_GHz,
            SolverSettings(two_tone_method=TwoToneMethod.TRANSIENT, **common),
        )
        assert periodic.T == pytest.approx(transient.T, rel=1e-3)
        assert periodic.P_out_total_aW == pytest.approx(transient.P_out_total_aW, rel=1e-3)

    def test_tone_roles_swap_at_equal_powers(self, reference_params):
        model = ResonatorModel.from_params(reference_params)
        f_a, f_b = model.f01_GHz, model.f01_GHz - model.Ec_GHz
        forward = dynamics.probe_response(model, DriveSpec.pump_probe(f_a, 30.0, f_b, 30.0), f_b)
        swapped = dynamics.probe_response(model, DriveSpec.pump_probe(f_b, 30.0, f_a, 30.0), f_b)
        assert swapped.T == pytest.approx(forward.T, rel=1e-5)
        assert swapped.P_out_aW == pytest.approx(forward.P_out_aW, rel=1e-5)

    def test_invalid_period_and_sampling(self):
        hamiltonian = dynamics.two_tone_hamiltonian(LINEAR_CAVITY, DriveSpec.pump_probe(4.68, 1.0, 4.70, 1.0), 4)
        c_ops = dynamics.collapse_operators(LINEAR_CAVITY, 4)
        with pytest.raises(DomainError):
            dynamics.periodic_steady_state(hamiltonian, c_ops, period=0.0)
        with pytest.raises(DomainError):
            dynamics.periodic_steady_state(hamiltonian, c_ops, period=50.0, samples=1)


class TestDemodulation:

    @staticmethod
    def synthetic_trajectory(stop: float, amplitude: complex, offset: float) -> Trajectory:
        times = np.arange(0.0, stop, 0.01)
        a = 0.3 + amplitude * np.exp(-1j * 2 * math.pi * offset * times)
        return Trajectory(
            times=times,
            a_expect=a,
            populations=np.zeros((times.size, 3)),
            traces=np.ones(times.size),
            frame_frequency=4.5,
        )

    def test_extracts_component_at_target(self):
        trajectory = self.synthetic_trajectory(60.0, 0.2j, 0.5)
        amplitude = dynamics.demodulate(trajectory, 5.0, DemodWindow(t_start=10.0, duration=40.0))
        assert amplitude == pytest.approx(0.2j, abs=1e-6)

    def test_zero_offset_returns_window_mean(self):
        trajectory = self.synthetic_trajectory(60.0, 0.2j, 0.5)
        amplitude = dynamics.demodulate(trajectory, 4.5, DemodWindow(t_start=10.0, duration=40.0))
        assert amplitude == pytest.approx(0.3, abs=1e-6)

    def test_too_few_periods(self):
        trajectory = self.synthetic_trajectory(60.0, 0.2j, 0.5)
        with pytest.raises(WindowTooShortError):
            dynamics.demodulate(trajectory, 5.0, DemodWindow(t_start=10.0, duration=10.0))

    def test_trajectory_shorter_than_window(self):
        trajectory = self.synthetic_trajectory(30.0, 0.2j, 0.5)
        with pytest.raises(WindowTooShortError):
            dynamics.demodulate(trajectory, 5.0, DemodWindow(t_start=10.0, duration=40.0))

    def test_probe_grid_starts_after_transient(self, reference_params):
        model = ResonatorModel.from_params(reference_params)
        settings = SolverSettings(window_beats=5, samples_per_beat=8)
        times, window = dynamics.probe_time_grid(model, 4.6, 4.7, settings)
        assert window.t_start >= settings.transient_kappa_units / model.kappa_total
        assert times.size == 5 * 8 + 1
        assert window.duration == pytest.approx(50.0)

    def test_probe_grid_rejects_equal_frequencies(self, reference_params):
        model = ResonatorModel.from_params(reference_params)
        with pytest.raises(DomainError):
            dynamics.probe_time_grid(model, 4.7, 4.7, SolverSettings())
