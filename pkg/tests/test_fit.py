"""
Tests for Parameter Extraction

Lorentzian and flux-arc fits are checked on traces generated from their
own models, first noiseless (exact recovery) and then with seeded noise.
The Kerr extraction runs on small synthetic two-tone maps.
"""

import numpy as np
import pytest

from models.fit import Trace, TraceKind
from models.scan import Axis, ScanGrid, ScanResult
from simulation import dynamics
from simulation.dynamics import ResonatorModel
from simulation.errors import (
    DegenerateGeometryError,
    DomainError,
    FitConvergenceError,
    InsufficientSpanError,
    NoPeakFoundError,
)
from simulation.fit import (
    extract_kerr,
    fit_flux_arc,
    fit_lorentzian,
    flux_arc_model,
    ingest_trace,
    initial_guess,
    lorentzian_model,
    synthetic_trace,
)

FREQS = np.linspace(4.6656, 4.7656, 401)


# ==============================================================================
# LINESHAPES
# ==============================================================================

class TestLineshape:

    def test_matches_linear_response(self):
        model = ResonatorModel(f01_GHz=4.7156, Ec_GHz=0.0, kappa_c_MHz=12.0, kappa_i_MHz=3.0)
        for f in (4.70, 4.7156, 4.73):
            t, r = dynamics.linear_response(f, model)
            assert lorentzian_model(np.array([f]), 4.7156, 12.0, 3.0)[0] == pytest.approx(abs(t) ** 2)
            assert lorentzian_model(
                np.array([f]), 4.7156, 12.0, 3.0, kind=TraceKind.REFLECTION
            )[0] == pytest.approx(abs(r) ** 2)

    def test_lossless_transmission_and_reflection_sum_to_one(self):
        T = lorentzian_model(FREQS, 4.7156, 12.0, 0.0)
        R = lorentzian_model(FREQS, 4.7156, 12.0, 0.0, kind=TraceKind.REFLECTION)
        np.testing.assert_allclose(T + R, 1.0, rtol=1e-12)

    def test_seeded_noise_is_reproducible(self):
        first = synthetic_trace(FREQS, 4.7156, 12.0, 3.0, noise=0.02, seed=7)
        second = synthetic_trace(FREQS, 4.7156, 12.0, 3.0, noise=0.02, seed=7)
        np.testing.assert_array_equal(first.y, second.y)
        assert (first.y >= 0).all()

    def test_initial_guess_near_truth(self):
        trace = synthetic_trace(FREQS, 4.7156, 12.0, 3.0)
        f0, kappa_c, kappa_i = initial_guess(trace, TraceKind.TRANSMISSION)
        assert f0 == pytest.approx(4.7156, abs=0.5e-3)
        assert kappa_c == pytest.approx(12.0, rel=0.1)
        assert kappa_i > 0


# ==============================================================================
# LORENTZIAN FITS
# ==============================================================================

class TestLorentzianFit:

    def test_noiseless_transmission_recovered_exactly(self):
        """
        SCENARIO: Fit a trace generated by the model itself
        GIVEN: f01 = 4.7156 GHz, kappa_c = 12 MHz, kappa_i = 3 MHz, no noise
        WHEN: the transmission fit runs with the amplitude scale fixed
        THEN: all three parameters come back to 1e-6 relative
        """
        result = fit_lorentzian(synthetic_trace(FREQS, 4.7156, 12.0, 3.0))

        assert result.converged
        assert result.params["f01"] == pytest.approx(4.7156, rel=1e-6)
        assert result.params["kappa_c"] == pytest.approx(12.0, rel=1e-6)
        assert result.params["kappa_i"] == pytest.approx(3.0, rel=1e-6)
        assert result.residual_rms < 1e-8
        assert result.extras["T0"] == pytest.approx((24 / 27) ** 2, rel=1e-6)

    def test_noiseless_reflection_recovered(self):
        trace = synthetic_trace(FREQS, 4.7156, 12.0, 3.0, kind=TraceKind.REFLECTION)
        result = fit_lorentzian(trace, kind=TraceKind.REFLECTION)
        assert result.params["f01"] == pytest.approx(4.7156, rel=1e-6)
        assert result.params["kappa_c"] == pytest.approx(12.0, rel=1e-5)
        assert result.params["kappa_i"] == pytest.approx(3.0, rel=1e-4)

    def test_noisy_trace_within_tolerance(self):
        trace = synthetic_trace(FREQS, 4.7156, 12.0, 3.0, noise=0.01, seed=7)
        result = fit_lorentzian(trace)
        assert result.params["f01"] == pytest.approx(4.7156, abs=0.2e-3)
        assert result.params["kappa_c"] == pytest.approx(12.0, rel=0.05)
        assert result.stderr["kappa_c"] > 0

    def test_two_percent_noise_recovers_device_in_most_trials(self):
        """
        SCENARIO: Repeated fits of noisy traces
        GIVEN: 100 seeded traces of the reference line with 2% noise
        WHEN: each trace is fitted
        THEN: at least 95 of them recover f01, kappa_c and kappa_i within 5%
        """
        truth = {"f01": 4.7156, "kappa_c": 12.0, "kappa_i": 3.0}
        recovered = 0
        for seed in range(100):
            trace = synthetic_trace(FREQS, 4.7156, 12.0, 3.0, noise=0.02, seed=seed)
            try:
                result = fit_lorentzian(trace)
            except FitConvergenceError:
                continue
            if all(abs(result.params[name] / value - 1) <= 0.05 for name, value in truth.items()):
                recovered += 1
        assert recovered >= 95

    def test_standard_errors_shrink_with_point_count(self):
        """
        SCENARIO: The same span sampled with 101 and with 401 points
        GIVEN: ten seeded 2% noise traces at each density
        WHEN: the fits run
        THEN: the mean standard errors scale as one over the square root of N
        """
        def mean_stderr(n_points: int) -> np.ndarray:
            freqs = np.linspace(4.6656, 4.7656, n_points)
            errors = []
            for seed in range(10):
                result = fit_lorentzian(synthetic_trace(freqs, 4.7156, 12.0, 3.0, noise=0.02, seed=seed))
                errors.append([result.stderr[name] for name in ("f01", "kappa_c", "kappa_i")])
            return np.mean(errors, axis=0)

        ratio = mean_stderr(101) / mean_stderr(401)
        np.testing.assert_allclose(ratio, np.sqrt(401 / 101), rtol=0.15)

    def test_free_scale_with_fixed_internal_loss(self):
        trace = synthetic_trace(FREQS, 4.7156, 12.0, 3.0, scale=0.5)
        result = fit_lorentzian(trace, free_scale=True, kappa_i_fixed=3.0)
        assert result.params["scale"] == pytest.approx(0.5, rel=1e-5)
        assert result.params["kappa_c"] == pytest.approx(12.0, rel=1e-5)
        assert result.stderr["kappa_i"] == 0.0
        assert "kappa_i" not in result.param_order

    def test_free_scale_needs_fixed_internal_loss(self):
        with pytest.raises(DomainError):
            fit_lorentzian(synthetic_trace(FREQS, 4.7156, 12.0, 3.0), free_scale=True)

    def test_too_narrow_span(self):
        trace = synthetic_trace(np.linspace(4.71, 4.72, 21), 4.7156, 12.0, 3.0)
        with pytest.raises(InsufficientSpanError):
            fit_lorentzian(trace)

    def test_too_few_points(self):
        trace = synthetic_trace(np.linspace(4.6, 4.8, 4), 4.7156, 12.0, 3.0)
        with pytest.raises(InsufficientSpanError):
            fit_lorentzian(trace)

    def test_to_dict_lists_estimates_and_errors(self):
        data = fit_lorentzian(synthetic_trace(FREQS, 4.7156, 12.0, 3.0)).to_dict()
        for key in ("f01", "f01_stderr", "kappa_c", "kappa_i", "residual_rms", "converged", "kind"):
            assert key in data


# ==============================================================================
# FLUX ARC
# ==============================================================================

class TestFluxArc:

    def test_reference_points_give_ej_max(self):
        points = [(0.0, 4.7156), (0.1, 4.5916), (0.2, 4.2123), (0.3, 3.5476), (0.4, 2.4926)]
        result = fit_flux_arc(points, Ec=0.29)
        assert result.params["EJ_max"] == pytest.approx(10.8, rel=1e-4)
        assert result.params["Ec"] == 0.29
        assert result.param_order == ("EJ_max",)

    def test_ej_and_ec_recovered_together(self):
        flux = np.linspace(0.0, 0.4, 9)
        f01 = flux_arc_model(flux, 10.8, 0.29, 0.0)
        result = fit_flux_arc(zip(flux, f01))
        assert result.params["EJ_max"] == pytest.approx(10.8, rel=1e-6)
        assert result.params["Ec"] == pytest.approx(0.29, rel=1e-6)

    def test_asymmetry_recovered(self):
        """
        SCENARIO: An asymmetric SQUID tuned close to half a flux quantum
        GIVEN: points generated with d = 0.2 out to 0.45 Phi0
        WHEN: the arc is fitted with Ec fixed and asymmetry free
        THEN: d comes back as 0.2
        """
        flux = np.linspace(0.0, 0.45, 10)
        f01 = flux_arc_model(flux, 10.8, 0.29, 0.2)
        result = fit_flux_arc(zip(flux, f01), Ec=0.29, fit_asymmetry=True)
        assert result.params["d"] == pytest.approx(0.2, rel=1e-5)
        assert result.params["EJ_max"] == pytest.approx(10.8, rel=1e-6)

    def test_too_few_points(self):
        with pytest.raises(InsufficientSpanError):
            fit_flux_arc([(0.0, 4.7), (0.2, 4.2), (0.4, 2.5)])

    def test_too_small_flux_span(self):
        points = [(f, 4.7) for f in np.linspace(0.0, 0.1, 6)]
        with pytest.raises(InsufficientSpanError):
            fit_flux_arc(points)

    def test_mirror_points_are_degenerate(self):
        points = [(0.1, 4.59), (-0.1, 4.59), (0.9, 4.59), (1.1, 4.59), (-0.9, 4.59)]
        with pytest.raises(DegenerateGeometryError):
            fit_flux_arc(points)


# ==============================================================================
# KERR SHIFT
# ==============================================================================

def two_tone_result(T) -> ScanResult:
    grid = ScanGrid(Axis("f2", "GHz", tuple(np.linspace(4.3, 4.5, 41))), Axis("P1", "aW", (0.0, 100.0)))
    T = np.asarray(T, dtype=float)
    return ScanResult(grid=grid, values=T.astype(complex), T=T, P_out_aW=T, converged=np.ones(T.shape, bool))


class TestKerrExtraction:

    def test_pump_induced_peak_gives_ec(self):
        f2 = np.linspace(4.3, 4.5, 41)
        background = np.full(41, 0.01)
        pumped = background + 0.2 * np.exp(-((f2 - 4.425) ** 2) / (2 * 0.006 ** 2))
        result = extract_kerr(two_tone_result([background, pumped]), f01=4.7156, configured_Ec=0.29)

        assert result.params["Ec"] == pytest.approx(0.29, abs=0.0025)
        assert result.stderr["Ec"] == pytest.approx(0.0025)
        assert result.extras["pump_aW"] == 100.0
        assert result.extras["configured_Ec_GHz"] == 0.29

    def test_linear_map_has_no_peak(self):
        f2 = np.linspace(4.3, 4.5, 41)
        row = 0.01 + 0.001 * f2
        with pytest.raises(NoPeakFoundError):
            extract_kerr(two_tone_result([row, row]), f01=4.7156)

    def test_all_flagged_map(self):
        nan = np.full(41, np.nan)
        with pytest.raises(NoPeakFoundError):
            extract_kerr(two_tone_result([nan, nan]), f01=4.7156)


# ==============================================================================
# TRACE INGESTION
# ==============================================================================

class TestTraceIngestion:

    def test_reads_two_and_three_columns(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("frequency_GHz,value,sigma\n4.70,0.5,0.01\n4.71,0.6,0.01\n4.72,0.5,0.02\n")
        trace = ingest_trace(path)
        assert len(trace) == 3
        assert trace.sigma.tolist() == [0.01, 0.01, 0.02]

        path.write_text("frequency_GHz,value\n4.70,0.5\n4.71,0.6\n")
        assert ingest_trace(path).sigma is None

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(DomainError):
            ingest_trace(path)

    def test_wrong_column_count(self, tmp_path):
        path = tmp_path / "wide.csv"
        path.write_text("a,b,c,d\n1,2,3,4\n")
        with pytest.raises(DomainError):
            ingest_trace(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "header.csv"
        path.write_text("frequency_GHz,value\n")
        with pytest.raises(DomainError):
            ingest_trace(path)

    def test_trace_rejects_negative_values(self):
        with pytest.raises(ValueError):
            Trace(x=np.array([1.0, 2.0]), y=np.array([0.1, -0.1]))

    def test_trace_rejects_non_monotone_frequencies(self):
        with pytest.raises(ValueError):
            Trace(x=np.array([1.0, 3.0, 2.0]), y=np.array([0.1, 0.2, 0.3]))
