"""
Fit - Parameter Extraction from Traces and Maps

1. fit_lorentzian: f01, kappa_c, kappa_i from a transmission or reflection
   trace, using the same input-output lineshape as the dynamics module
2. fit_flux_arc: EJ_max, Ec and SQUID asymmetry from f01 versus flux
3. extract_kerr: Ec from the pump-induced probe peak of a two-tone map

All least-squares problems go through lmfit with the trust-region
reflective solver (method="least_squares").

Lineshapes, with Delta = f - f01 in MHz and kappa_tot = 2 kappa_c + kappa_i:
    T(f) = scale * kappa_c^2 / ((kappa_tot/2)^2 + Delta^2)
    R(f) = scale * ((kappa_i/2)^2 + Delta^2) / ((kappa_tot/2)^2 + Delta^2)
With scale fixed to 1 the peak depth and the width separate kappa_c from
kappa_i; a free scale needs kappa_i held fixed.
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from lmfit import Minimizer, Parameters

from models.fit import FitResult, Trace, TraceKind
from models.scan import ScanResult
from simulation.errors import (
    DegenerateGeometryError,
    DomainError,
    FitConvergenceError,
    InsufficientSpanError,
    NoPeakFoundError,
)
from simulation.spectroscopy import detect_row_peaks

logger = logging.getLogger(__name__)

MIN_SPAN_LINEWIDTHS = 3.0
MIN_ARC_POINTS = 5
MIN_ARC_SPAN_PHI0 = 0.3

TIGHT_TOLERANCES = {"ftol": 1e-14, "xtol": 1e-14, "gtol": 1e-14}


# ==================== LINESHAPES ====================

def lorentzian_model(
    f_GHz: np.ndarray,
    f01: float,
    kappa_c: float,
    kappa_i: float,
    scale: float = 1.0,
    kind: TraceKind = TraceKind.TRANSMISSION,
) -> np.ndarray:
    """
    |t|^2 or |r|^2 of the linear resonator; rates in MHz. Vectorized form
    of dynamics.linear_response.
    """
    delta = (np.asarray(f_GHz, dtype=float) - f01) * 1e3
    half_width_sq = (0.5 * (2 * kappa_c + kappa_i)) ** 2
    if kind is TraceKind.TRANSMISSION:
        values = kappa_c ** 2 / (half_width_sq + delta ** 2)
    else:
        values = ((0.5 * kappa_i) ** 2 + delta ** 2) / (half_width_sq + delta ** 2)
    return scale * values


def synthetic_trace(
    f_GHz: Sequence[float],
    f01: float,
    kappa_c: float,
    kappa_i: float,
    kind: TraceKind = TraceKind.TRANSMISSION,
    scale: float = 1.0,
    noise: float = 0.0,
    seed: Optional[int] = None,
) -> Trace:
    """
    A model trace, optionally with multiplicative Gaussian noise
    y * (1 + noise * N(0, 1)) drawn from a seeded generator.
    """
    x = np.asarray(f_GHz, dtype=float)
    y = lorentzian_model(x, f01, kappa_c, kappa_i, scale, kind)
    if noise > 0:
        rng = np.random.default_rng(seed)
        y = y * (1.0 + noise * rng.standard_normal(x.size))
        y = np.clip(y, 0.0, None)
    return Trace(x=x, y=y)


def ingest_trace(path: Union[str, Path]) -> Trace:
    """
    Read a trace CSV: a one-line header, then frequency_GHz, value and an
    optional sigma column.
    """
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise DomainError(f"{path} is empty")
        rows = [row for row in reader if row]
    if len(header) not in (2, 3):
        raise DomainError(f"{path}: expected 2 or 3 columns, header has {len(header)}")

    data = np.array([[float(v) for v in row[: len(header)]] for row in rows], dtype=float)
    if data.size == 0:
        raise DomainError(f"{path} holds no data rows")
    sigma = data[:, 2] if len(header) == 3 else None
    logger.debug(f"Ingested {len(rows)} points from {path}")
    return Trace(x=data[:, 0], y=data[:, 1], sigma=sigma)


# ==================== LORENTZIAN FIT ====================

def _half_width_crossings(x: np.ndarray, excess: np.ndarray, index: int) -> float:
    """Full width at half maximum of a peak in `excess`, in the units of x."""
    half = excess[index] / 2
    left = index
    while left > 0 and excess[left] > half:
        left -= 1
    right = index
    while right < x.size - 1 and excess[right] > half:
        right += 1
    return abs(x[right] - x[left])


def initial_guess(trace: Trace, kind: TraceKind) -> Tuple[float, float, float]:
    """(f01, kappa_c, kappa_i) from the extremum location, its depth and the FWHM."""
    x, y = trace.x, trace.y
    if kind is TraceKind.TRANSMISSION:
        index = int(np.argmax(y))
        width = _half_width_crossings(x, y - np.min(y), index) * 1e3
        kappa_tot = max(width, 1e-3)
        depth = float(np.clip(y[index], 1e-6, 1.0))
        kappa_c = kappa_tot * np.sqrt(depth) / 2
    else:
        index = int(np.argmin(y))
        width = _half_width_crossings(x, np.max(y) - y, index) * 1e3
        kappa_tot = max(width, 1e-3)
        floor = float(np.clip(y[index], 0.0, 1.0))
        kappa_c = kappa_tot * (1 - np.sqrt(floor)) / 2
    kappa_i = max(kappa_tot - 2 * kappa_c, 0.05 * kappa_tot)
    return float(x[index]), float(kappa_c), float(kappa_i)


def _lorentzian_residual(pars, x, y, weights, kind):
    v = pars.valuesdict()
    model = lorentzian_model(x, v["f01"], v["kappa_c"], v["kappa_i"], v["scale"], kind)
    return (model - y) * weights


def _fit_result(result, names: Sequence[str], residual_rms: float, extras=None) -> FitResult:
    varying = tuple(result.var_names)
    if result.covar is not None:
        covariance = np.array(result.covar, dtype=float)
    else:
        covariance = np.full((len(varying), len(varying)), np.nan)
    params = {name: float(result.params[name].value) for name in names}
    stderr = {}
    for name in names:
        parameter = result.params[name]
        if not parameter.vary:
            stderr[name] = 0.0
        else:
            stderr[name] = float(parameter.stderr) if parameter.stderr is not None else float("nan")
    return FitResult(
        params=params,
        stderr=stderr,
        covariance=covariance,
        param_order=varying,
        residual_rms=residual_rms,
        converged=bool(result.success),
        iterations=int(result.nfev),
        extras=dict(extras or {}),
    )


def fit_lorentzian(
    trace: Trace,
    kind: TraceKind = TraceKind.TRANSMISSION,
    free_scale: bool = False,
    kappa_i_fixed: Optional[float] = None,
    max_nfev: int = 2000,
) -> FitResult:
    """
    Fit f01 (GHz), kappa_c and kappa_i (MHz) and the amplitude scale.

    The trace must span at least three linewidths of the initial guess.
    """
    if free_scale and kappa_i_fixed is None:
        raise DomainError("a free amplitude scale needs kappa_i held fixed")
    if len(trace) < 5:
        raise InsufficientSpanError(f"need at least 5 points, got {len(trace)}")

    f0, kappa_c0, kappa_i0 = initial_guess(trace, kind)
    if kappa_i_fixed is not None:
        kappa_i0 = kappa_i_fixed
    span_MHz = float(np.ptp(trace.x)) * 1e3
    kappa_tot0 = 2 * kappa_c0 + kappa_i0
    if span_MHz < MIN_SPAN_LINEWIDTHS * kappa_tot0:
        raise InsufficientSpanError(
            f"trace spans {span_MHz:.3g} MHz, need {MIN_SPAN_LINEWIDTHS:g} linewidths "
            f"({MIN_SPAN_LINEWIDTHS * kappa_tot0:.3g} MHz)"
        )

    params = Parameters()
    params.add("f01", value=f0, min=float(np.min(trace.x)), max=float(np.max(trace.x)))
    params.add("kappa_c", value=kappa_c0, min=0.0)
    params.add("kappa_i", value=kappa_i0, min=0.0, vary=kappa_i_fixed is None)
    params.add("scale", value=1.0, min=0.0, vary=free_scale)

    weights = 1.0 / trace.sigma if trace.sigma is not None else np.ones(len(trace))
    minimizer = Minimizer(
        _lorentzian_residual, params, fcn_args=(trace.x, trace.y, weights, kind)
    )
    result = minimizer.minimize(method="least_squares", max_nfev=max_nfev, **TIGHT_TOLERANCES)
    if not result.success:
        raise FitConvergenceError(f"Lorentzian fit did not converge: {result.message}")

    v = result.params.valuesdict()
    model = lorentzian_model(trace.x, v["f01"], v["kappa_c"], v["kappa_i"], v["scale"], kind)
    rms = float(np.sqrt(np.mean((model - trace.y) ** 2)))
    kappa_tot = 2 * v["kappa_c"] + v["kappa_i"]
    extras = {
        "kind": kind.value,
        "kappa_total_MHz": kappa_tot,
        "T0": (2 * v["kappa_c"] / kappa_tot) ** 2 if kappa_tot > 0 else float("nan"),
    }
    logger.info(
        f"Lorentzian fit: f01={v['f01']:.6f} GHz, kappa_c={v['kappa_c']:.4f} MHz, "
        f"kappa_i={v['kappa_i']:.4f} MHz, rms={rms:.2e}"
    )
    return _fit_result(result, ("f01", "kappa_c", "kappa_i", "scale"), rms, extras)


# ==================== FLUX ARC ====================

def flux_arc_model(flux: np.ndarray, EJ_max: float, Ec: float, d: float) -> np.ndarray:
    """f01(flux) = sqrt(8 EJ(flux) Ec) - Ec with the asymmetric-SQUID EJ(flux)."""
    phase = np.pi * np.asarray(flux, dtype=float)
    ej = EJ_max * np.sqrt(np.cos(phase) ** 2 + (d * np.sin(phase)) ** 2)
    return np.sqrt(8 * ej * Ec) - Ec


def _arc_residual(pars, flux, f01):
    v = pars.valuesdict()
    return flux_arc_model(flux, v["EJ_max"], v["Ec"], v["d"]) - f01


def fit_flux_arc(
    points: Iterable[Tuple[float, float]],
    Ec: Optional[float] = None,
    fit_asymmetry: bool = False,
    Ec_guess: float = 0.3,
    max_nfev: int = 5000,
) -> FitResult:
    """
    Fit EJ_max (GHz), Ec (GHz) and the asymmetry d to (flux, f01) points.

    Ec is held fixed when given. d stays 0 unless fit_asymmetry is set; the
    model depends on d^2 only, so the reported d is |d|.
    """
    data = np.asarray(list(points), dtype=float)
    if data.ndim != 2 or data.shape[0] < MIN_ARC_POINTS or data.shape[1] != 2:
        raise InsufficientSpanError(f"need at least {MIN_ARC_POINTS} (flux, f01) points")
    flux, f01 = data[:, 0], data[:, 1]
    if np.ptp(flux) < MIN_ARC_SPAN_PHI0:
        raise InsufficientSpanError(
            f"flux points span {np.ptp(flux):.3g} Phi0, need {MIN_ARC_SPAN_PHI0}"
        )
    cosines = np.abs(np.cos(np.pi * flux))
    if np.ptp(cosines) < 1e-12:
        raise DegenerateGeometryError("all flux points share one |cos(pi flux)|")

    ec0 = Ec if Ec is not None else Ec_guess
    best = int(np.argmax(cosines))
    ej0 = (f01[best] + ec0) ** 2 / (8 * ec0) / max(cosines[best], 1e-3)

    params = Parameters()
    params.add("EJ_max", value=ej0, min=0.0)
    params.add("Ec", value=ec0, min=0.0, vary=Ec is None)
    params.add("d", value=0.1 if fit_asymmetry else 0.0, vary=fit_asymmetry)

    minimizer = Minimizer(_arc_residual, params, fcn_args=(flux, f01))
    result = minimizer.minimize(method="least_squares", max_nfev=max_nfev, **TIGHT_TOLERANCES)
    if not result.success:
        raise FitConvergenceError(f"flux-arc fit did not converge: {result.message}")

    result.params["d"].value = abs(result.params["d"].value)
    v = result.params.valuesdict()
    rms = float(np.sqrt(np.mean((flux_arc_model(flux, v["EJ_max"], v["Ec"], v["d"]) - f01) ** 2)))
    logger.info(f"Flux-arc fit: EJ_max={v['EJ_max']:.6f} GHz, Ec={v['Ec']:.6f} GHz, d={v['d']:.3g}")
    return _fit_result(result, ("EJ_max", "Ec", "d"), rms)


# ==================== KERR SHIFT ====================

def _pump_off_reference(result: ScanResult) -> np.ndarray:
    if "T_pump_off" in result.auxiliary:
        return np.asarray(result.auxiliary["T_pump_off"], dtype=float)
    pump = np.asarray(result.grid.y_axis.values)
    off_rows = np.nonzero(pump == 0)[0]
    if off_rows.size:
        return np.repeat(result.T[off_rows[:1], :], result.grid.shape[0], axis=0)
    return np.zeros(result.grid.shape)


def extract_kerr(
    result: ScanResult,
    f01: float,
    prominence_fraction: float = 0.05,
    configured_Ec: Optional[float] = None,
) -> FitResult:
    """
    Ec = f01 - f2 of the strongest pump-induced probe peak.

    Peaks are searched in the probe transmission minus the pump-off
    reference, row by row over pumped rows, with the prominence threshold
    taken relative to the dynamic range of the whole map. The uncertainty
    is half the probe-frequency step.
    """
    T = np.asarray(result.T, dtype=float)
    finite = np.isfinite(T)
    if not np.any(finite):
        raise NoPeakFoundError("map holds no finite transmission values")
    dynamic_range = float(np.max(T[finite]) - np.min(T[finite]))
    threshold = prominence_fraction * dynamic_range

    excess = ScanResult(
        grid=result.grid,
        values=result.values,
        T=T - _pump_off_reference(result),
        P_out_aW=result.P_out_aW,
        converged=result.converged,
    )
    best = None
    for row, pump in enumerate(result.grid.y_axis.values):
        if pump <= 0:
            continue
        for peak in detect_row_peaks(excess, row, prominence_fraction=1e-9):
            if peak.prominence >= threshold and (best is None or peak.prominence > best.prominence):
                best = peak
    if best is None or dynamic_range <= 0:
        raise NoPeakFoundError("no pump-induced probe peak above the prominence threshold")

    delta_f = f01 - best.x
    step = result.grid.x_axis.step
    extras = {"f_peak_GHz": best.x, "pump_aW": best.y, "delta_f_GHz": delta_f}
    if configured_Ec is not None:
        extras["configured_Ec_GHz"] = configured_Ec
    logger.info(f"Kerr shift: f01 - f_peak = {delta_f:.6f} GHz at pump {best.y:g} aW")
    return FitResult(
        params={"Ec": delta_f},
        stderr={"Ec": step / 2},
        covariance=np.array([[(step / 2) ** 2]]),
        param_order=("Ec",),
        residual_rms=0.0,
        converged=True,
        iterations=0,
        extras=extras,
    )
