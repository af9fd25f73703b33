"""
Dynamics - Driven-Dissipative Evolution of the Kerr Resonator

This module is the physics engine. It covers:

1. Loss channels: sqrt(kappa_L) a, sqrt(kappa_R) a, sqrt(kappa_i) a
2. Port power to drive amplitude: eps = sqrt(kappa_c P / (h f))
3. Rotating-frame Hamiltonian for one tone (time independent)
4. Lindblad steady state by a dense linear solve with trace constraint
5. Input-output transmission and reflection
6. Time evolution for bichromatic drives, in the frame of tone 1
7. The periodic regime of a bichromatic drive from its one-period propagator
8. Demodulation of <a>(t) at the probe frequency

Conventions:
- time in ns, Hamiltonians and rates in rad/ns
- a_in = sqrt(P / hf) is the incoming photon-flux amplitude
- for a tone entering the left port t = i sqrt(kappa_R) <a> / a_in,
  r = 1 - i sqrt(kappa_L) <a> / a_in, and the roles swap for the right port,
  which gives the linear on-resonance T = (2 kappa_c / (2 kappa_c + kappa_i))^2
- density matrices are vectorized row-major: vec(A X B) = (A kron B^T) vec(X)
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.integrate import solve_ivp

from models.circuit import CircuitParams
from models.drive import DriveSpec, Port
from models.quantum import (
    BasisTag,
    DensityMatrix,
    QuantumOperatorMatrix,
    SteadyStateResult,
    Trajectory,
)
from models.solver import SolverSettings, TwoToneMethod
from simulation import circuit, spectrum
from simulation.errors import (
    DomainError,
    SingularLiouvillianError,
    StiffnessError,
    WindowTooShortError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResonatorModel:
    """
    The four numbers the dynamics engine needs.

    Built from CircuitParams for real devices; built directly when a test or
    oracle needs Ec = 0 (a linear cavity) at a fixed f01.
    """

    f01_GHz: float
    Ec_GHz: float
    kappa_c_MHz: float
    kappa_i_MHz: float = 0.0

    @classmethod
    def from_params(cls, p: CircuitParams) -> "ResonatorModel":
        f01, _ = circuit.resonance_frequencies(p)
        return cls(f01, p.Ec_GHz, p.kappa_c_MHz, p.kappa_i_MHz)

    @property
    def kappa_total_MHz(self) -> float:
        return 2 * self.kappa_c_MHz + self.kappa_i_MHz

    @property
    def kappa_total(self) -> float:
        """Total loss rate in rad/ns."""
        return circuit.mhz_to_angular_per_ns(self.kappa_total_MHz)


ModelLike = Union[CircuitParams, ResonatorModel]


def _as_model(model: ModelLike) -> ResonatorModel:
    return ResonatorModel.from_params(model) if isinstance(model, CircuitParams) else model


# ==================== LOSS CHANNELS AND DRIVE ====================

def loss_rates(model: ModelLike) -> Tuple[float, float, float]:
    """(kappa_L, kappa_R, kappa_i) in rad/ns, symmetric ports kappa_L = kappa_R = kappa_c."""
    kappa_c = circuit.mhz_to_angular_per_ns(model.kappa_c_MHz)
    return kappa_c, kappa_c, circuit.mhz_to_angular_per_ns(model.kappa_i_MHz)


def collapse_operators(model: ModelLike, fock_dim: int) -> List[QuantumOperatorMatrix]:
    """[sqrt(kappa_L) a, sqrt(kappa_R) a, sqrt(kappa_i) a] in sqrt(rad/ns)."""
    if fock_dim < spectrum.MIN_KERR_DIM:
        raise DomainError(f"fock_dim must be at least {spectrum.MIN_KERR_DIM}, got {fock_dim}")
    a, _ = spectrum.ladder_operators(fock_dim)
    return [a * math.sqrt(rate) for rate in loss_rates(model)]


def drive_amplitude(P_aW: float, f_GHz: float, kappa_c_MHz: float) -> float:
    """
    Drive amplitude eps = sqrt(kappa_c P / (h f)) in rad/s.

    This is the normalization for which the linear steady state holds
    <n> = 4 kappa_c P / ((2 kappa_c + kappa_i)^2 h f).
    """
    if P_aW < 0:
        raise DomainError(f"input power must be non-negative, got {P_aW} aW")
    kappa_c = circuit.mhz_to_angular_per_s(kappa_c_MHz)
    photon_flux = P_aW * circuit.ATTOWATT / circuit.photon_energy(f_GHz)
    return math.sqrt(kappa_c * photon_flux)


def input_amplitude(P_aW: float, f_GHz: float) -> float:
    """a_in = sqrt(P / hf) in sqrt(photons/s)."""
    return math.sqrt(P_aW * circuit.ATTOWATT / circuit.photon_energy(f_GHz))


# ==================== HAMILTONIANS ====================

def rotating_frame_hamiltonian(
    H_kerr: QuantumOperatorMatrix,
    drive: DriveSpec,
    epsilon: float,
) -> QuantumOperatorMatrix:
    """
    Single-tone Hamiltonian in the frame of the drive, in rad/ns:
        H_rf = 2 pi (E_n - n f_d) + eps (a + a^dagger)
    which for the Kerr ladder is Delta n - (Ec/2) n(n-1) + eps (a + a^dagger).

    epsilon is given in rad/s, as returned by drive_amplitude.
    """
    if not drive.is_single_tone:
        raise DomainError("rotating_frame_hamiltonian takes a single tone; use time_evolve for two")
    f_drive = drive.tones[0].f_GHz
    dim = H_kerr.dim
    n = np.arange(dim, dtype=float)
    levels = np.real(H_kerr.diagonal()) - n * f_drive
    a, a_dag = spectrum.ladder_operators(dim)
    eps = epsilon * 1e-9
    matrix = circuit.ghz_to_angular_per_ns(1.0) * np.diag(levels) + eps * (a.entries + a_dag.entries)
    return QuantumOperatorMatrix(matrix, BasisTag.FOCK)


@dataclass(frozen=True)
class DrivenHamiltonian:
    """
    H(t) = static + sum_k coefficient_k(t) * operator_k, in rad/ns.

    Calling the object returns the Hamiltonian at time t, so it doubles as
    the H(t) callback; time_evolve uses the split form to precompute the
    superoperators once.
    """

    static: QuantumOperatorMatrix
    terms: Tuple[Tuple[QuantumOperatorMatrix, Callable[[float], complex]], ...] = ()

    def __call__(self, t: float) -> QuantumOperatorMatrix:
        matrix = self.static.entries.copy()
        for operator, coefficient in self.terms:
            matrix = matrix + coefficient(t) * operator.entries
        return QuantumOperatorMatrix(matrix, self.static.basis_tag)

    @property
    def dim(self) -> int:
        return self.static.dim


def two_tone_hamiltonian(
    model: ResonatorModel,
    drive: DriveSpec,
    fock_dim: int,
) -> DrivenHamiltonian:
    """
    Bichromatic drive in the frame rotating at tone 1. Tone 2 appears at
    the beat frequency f2 - f1:
        H = (w01 - w1) n - (Ec/2) n(n-1) + eps1 (a + a^dag)
            + eps2 (a^dag e^{-i d t} + a e^{i d t}),   d = 2 pi (f2 - f1)
    Both tones start with zero phase; the map quantities do not depend on
    the relative phase when f1 != f2.
    """
    tone1, tone2 = drive.tones
    H_kerr = spectrum.kerr_hamiltonian(model.f01_GHz, model.Ec_GHz, fock_dim)
    eps1 = drive_amplitude(tone1.P_aW, tone1.f_GHz, model.kappa_c_MHz)
    eps2 = drive_amplitude(tone2.P_aW, tone2.f_GHz, model.kappa_c_MHz) * 1e-9
    static = rotating_frame_hamiltonian(H_kerr, DriveSpec(tones=[tone1]), eps1)
    a, a_dag = spectrum.ladder_operators(fock_dim)
    beat = circuit.ghz_to_angular_per_ns(tone2.f_GHz - tone1.f_GHz)
    terms = (
        (a_dag * eps2, lambda t: np.exp(-1j * beat * t)),
        (a * eps2, lambda t: np.exp(1j * beat * t)),
    )
    return DrivenHamiltonian(static=static, terms=terms)


# ==================== LIOUVILLIAN ====================

def commutator_superoperator(H: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> -i [H, rho]."""
    identity = np.eye(H.shape[0])
    return -1j * (np.kron(H, identity) - np.kron(identity, H.T))


def liouvillian(H: QuantumOperatorMatrix, c_ops: Sequence[QuantumOperatorMatrix]) -> np.ndarray:
    """Dense Lindblad generator acting on row-major vec(rho)."""
    dim = H.dim
    identity = np.eye(dim)
    L = commutator_superoperator(H.entries)
    for c_op in c_ops:
        C = c_op.entries
        CdC = C.conj().T @ C
        L = L + np.kron(C, C.conj()) - 0.5 * np.kron(CdC, identity) - 0.5 * np.kron(identity, CdC.T)
    return L


def _build_result(rho: np.ndarray, residual: float) -> SteadyStateResult:
    dim = rho.shape[0]
    a, a_dag = spectrum.ladder_operators(dim)
    state = DensityMatrix(QuantumOperatorMatrix(rho, BasisTag.FOCK))
    n_expect = state.expect(a_dag @ a).real
    return SteadyStateResult(
        rho=state,
        a_expect=state.expect(a),
        n_expect=max(n_expect, 0.0),
        residual=residual,
        fock_dim=dim,
        top_population=float(np.real(rho[-1, -1])),
    )


def steady_state(
    H_rf: QuantumOperatorMatrix,
    c_ops: Sequence[QuantumOperatorMatrix],
    residual_tol: float = 1e-10,
) -> SteadyStateResult:
    """
    Null vector of the Lindblad generator with unit trace.

    One row of L (the equation for rho_00, linearly dependent on the others
    because L preserves the trace) is replaced by the trace condition and
    the dense system is solved directly. The reported residual is
    ||L vec(rho)|| relative to ||L||_F.
    """
    dim = H_rf.dim
    L = liouvillian(H_rf, c_ops)
    system = L.copy()
    trace_row = np.zeros(dim * dim, dtype=complex)
    trace_row[:: dim + 1] = 1.0
    system[0, :] = trace_row
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0

    try:
        solution = linalg.solve(system, rhs)
    except (linalg.LinAlgError, ValueError) as e:
        raise SingularLiouvillianError(f"steady-state system is singular: {e}") from e
    if not np.all(np.isfinite(solution)):
        raise SingularLiouvillianError("steady-state solve produced non-finite entries")

    rho = solution.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho)

    scale = max(1.0, float(np.linalg.norm(L)))
    residual = float(np.linalg.norm(L @ rho.reshape(-1))) / scale
    if residual > residual_tol:
        raise SingularLiouvillianError(
            f"steady-state residual {residual:.2e} exceeds tolerance {residual_tol:.0e}; "
            "the Liouvillian kernel is likely degenerate"
        )
    return _build_result(rho, residual)


def solve_with_escalation(
    model: ModelLike,
    drive: DriveSpec,
    settings: Optional[SolverSettings] = None,
) -> SteadyStateResult:
    """
    Steady state for one tone with automatic Fock-dimension escalation.

    The dimension grows by settings.fock_step until the top level holds less
    than settings.truncation_tol. At settings.max_fock_dim the last result is
    returned with truncation_ok=False.
    """
    settings = settings or SolverSettings()
    model = _as_model(model)
    tone = drive.tones[0]
    epsilon = drive_amplitude(tone.P_aW, tone.f_GHz, model.kappa_c_MHz)

    dim = settings.fock_dim
    while True:
        H_kerr = spectrum.kerr_hamiltonian(model.f01_GHz, model.Ec_GHz, dim)
        H_rf = rotating_frame_hamiltonian(H_kerr, drive, epsilon)
        result = steady_state(H_rf, collapse_operators(model, dim), settings.residual_tol)
        if result.top_population < settings.truncation_tol:
            return result
        if dim >= settings.max_fock_dim:
            logger.warning(
                f"Top Fock population {result.top_population:.2e} at the maximum dimension {dim}"
            )
            return replace(result, truncation_ok=False)
        logger.warning(
            f"Top Fock population {result.top_population:.2e} at dim={dim}; escalating"
        )
        dim = min(dim + settings.fock_step, settings.max_fock_dim)


# ==================== INPUT-OUTPUT ====================

def port_rates(model: ModelLike, port: Port = Port.LEFT) -> Tuple[float, float]:
    """(kappa_in, kappa_out) in rad/s for a tone entering at `port`."""
    kappa_L, kappa_R, _ = (rate * 1e9 for rate in loss_rates(model))
    return (kappa_L, kappa_R) if port is Port.LEFT else (kappa_R, kappa_L)


def transmission(
    ss: SteadyStateResult,
    drive: DriveSpec,
    model: ModelLike,
) -> Tuple[complex, float, float]:
    """
    (t, T, R) for a single-tone steady state. T is measured at the port
    opposite the tone's input port, R at the input port.
    """
    if not drive.is_single_tone:
        raise DomainError("transmission needs a single-tone steady state")
    tone = drive.tones[0]
    if tone.P_aW <= 0:
        raise DomainError("transmission is undefined at zero input power")
    a_in = input_amplitude(tone.P_aW, tone.f_GHz)
    kappa_in, kappa_out = port_rates(model, tone.port)
    t = 1j * math.sqrt(kappa_out) * ss.a_expect / a_in
    r = 1.0 - 1j * math.sqrt(kappa_in) * ss.a_expect / a_in
    return complex(t), float(abs(t) ** 2), float(abs(r) ** 2)


def linear_response(f_GHz: float, model: ModelLike) -> Tuple[complex, complex]:
    """Closed-form linear (t, r) at drive frequency f: t = kappa_c / (kappa_tot/2 + i Delta)."""
    model = _as_model(model)
    detuning_MHz = (model.f01_GHz - f_GHz) * 1e3
    denominator = 0.5 * model.kappa_total_MHz + 1j * detuning_MHz
    t = model.kappa_c_MHz / denominator
    return complex(t), complex(1.0 - t)


def output_power_aW(amplitude: complex, f_GHz: float, kappa_c_MHz: float) -> float:
    """Coherent power leaving the output port, kappa_c h f |amplitude|^2, in aW."""
    kappa = circuit.mhz_to_angular_per_s(kappa_c_MHz)
    return kappa * circuit.photon_energy(f_GHz) * abs(amplitude) ** 2 / circuit.ATTOWATT


# ==================== TIME EVOLUTION ====================

def time_evolve(
    hamiltonian: DrivenHamiltonian,
    c_ops: Sequence[QuantumOperatorMatrix],
    rho0: DensityMatrix,
    t_span: Tuple[float, float],
    t_eval: Optional[np.ndarray] = None,
    frame_frequency: float = 0.0,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> Trajectory:
    """
    Integrate the master equation with an adaptive DOP853 stepper.

    Returns <a>(t), Fock populations and the trace at the sample times.
    """
    dim = hamiltonian.dim
    if rho0.dim != dim:
        raise DomainError(f"rho0 has dimension {rho0.dim}, Hamiltonian {dim}")

    L0 = liouvillian(hamiltonian.static, c_ops)
    drives = [
        (commutator_superoperator(operator.entries), coefficient)
        for operator, coefficient in hamiltonian.terms
    ]

    def rhs(t, y):
        dy = L0 @ y
        for superop, coefficient in drives:
            dy = dy + coefficient(t) * (superop @ y)
        return dy

    solution = solve_ivp(
        rhs,
        t_span,
        np.asarray(rho0.matrix.entries, dtype=complex).reshape(-1),
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
    )
    if solution.status < 0:
        raise StiffnessError(f"integration failed at t={solution.t[-1]:.4g} ns: {solution.message}")

    rhos = solution.y.T.reshape(-1, dim, dim)
    a, _ = spectrum.ladder_operators(dim)
    a_expect = np.einsum("ij,tji->t", a.entries, rhos)
    populations = np.real(np.einsum("tii->ti", rhos))
    traces = np.real(np.einsum("tii->t", rhos))

    trajectory = Trajectory(
        times=solution.t,
        a_expect=a_expect,
        populations=populations,
        traces=traces,
        frame_frequency=frame_frequency,
        fock_dim=dim,
    )
    if trajectory.max_trace_error > 1e-7:
        logger.warning(f"Trace drifted by {trajectory.max_trace_error:.2e} during evolution")
    return trajectory


# ==================== PERIODIC REGIME ====================

def _level_phases(static: QuantumOperatorMatrix) -> np.ndarray:
    """theta_p = h_n - h_m at vec index p = n*dim + m, h the diagonal of the static Hamiltonian."""
    h = np.real(np.diag(static.entries))
    return (h[:, None] - h[None, :]).reshape(-1)


def _observable_rows(dim: int) -> np.ndarray:
    """Rows that map row-major vec(rho) to Tr(a rho) and the populations rho_nn."""
    a, _ = spectrum.ladder_operators(dim)
    rows = np.zeros((dim + 1, dim * dim), dtype=complex)
    rows[0] = a.entries.T.reshape(-1)
    rows[1 + np.arange(dim), np.arange(dim) * (dim + 1)] = 1.0
    return rows


def periodic_steady_state(
    hamiltonian: DrivenHamiltonian,
    c_ops: Sequence[QuantumOperatorMatrix],
    period: float,
    samples: int = 32,
    frame_frequency: float = 0.0,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    residual_tol: float = 1e-6,
) -> Trajectory:
    """
    The periodic regime of a drive that repeats every `period` ns, sampled
    at `samples` evenly spaced times of one period starting at t = 0.

    The one-period propagator is integrated with DOP853 for all dim^2 basis
    states at once, in the interaction picture of the diagonal of the
    static Hamiltonian so the fast level phases are exact. Its fixed point
    with unit trace is the state at t = 0 of the periodic orbit; the
    samples follow from the propagators recorded along the way.
    """
    dim = hamiltonian.dim
    size = dim * dim
    if samples < 2:
        raise DomainError(f"need at least two samples per period, got {samples}")
    if period <= 0:
        raise DomainError(f"period must be positive, got {period} ns")

    theta = _level_phases(hamiltonian.static)
    L_rest = liouvillian(hamiltonian.static, c_ops) + np.diag(1j * theta)
    drives = [
        (commutator_superoperator(operator.entries), coefficient)
        for operator, coefficient in hamiltonian.terms
    ]

    def rhs(t, y):
        phase = np.exp(1j * theta * t)
        generator = L_rest.copy()
        for superop, coefficient in drives:
            generator += coefficient(t) * superop
        X = y.reshape(size, size)
        return (phase[:, None] * (generator @ (phase.conj()[:, None] * X))).reshape(-1)

    observables = _observable_rows(dim)
    dt = period / samples
    X = np.eye(size, dtype=complex).reshape(-1)
    sampled = []
    for k in range(samples):
        t0, t1 = k * dt, (k + 1) * dt
        sampled.append((observables * np.exp(-1j * theta * t0)[None, :]) @ X.reshape(size, size))
        solution = solve_ivp(rhs, (t0, t1), X, method="DOP853", rtol=rtol, atol=atol)
        if solution.status < 0:
            raise StiffnessError(
                f"propagator integration failed at t={solution.t[-1]:.4g} ns: {solution.message}"
            )
        X = solution.y[:, -1]
    monodromy = np.exp(-1j * theta * period)[:, None] * X.reshape(size, size)

    system = monodromy - np.eye(size)
    system[0, :] = 0.0
    system[0, :: dim + 1] = 1.0
    rhs_vector = np.zeros(size, dtype=complex)
    rhs_vector[0] = 1.0
    try:
        rho0 = linalg.solve(system, rhs_vector)
    except (linalg.LinAlgError, ValueError) as e:
        raise SingularLiouvillianError(f"periodic fixed point is singular: {e}") from e
    residual = float(np.linalg.norm(monodromy @ rho0 - rho0))
    if not np.isfinite(residual) or residual > residual_tol:
        raise SingularLiouvillianError(
            f"periodic fixed point residual {residual:.2e} exceeds tolerance {residual_tol:.0e}"
        )

    values = np.array([rows @ rho0 for rows in sampled])
    populations = np.real(values[:, 1:])
    trajectory = Trajectory(
        times=dt * np.arange(samples),
        a_expect=values[:, 0],
        populations=populations,
        traces=populations.sum(axis=1),
        frame_frequency=frame_frequency,
        fock_dim=dim,
        notes={"residual": residual, "period": period},
    )
    if trajectory.max_trace_error > 1e-7:
        logger.warning(f"Trace of the periodic orbit off by {trajectory.max_trace_error:.2e}")
    return trajectory


@dataclass(frozen=True)
class DemodWindow:
    """Averaging window: start time and duration in ns."""

    t_start: float
    duration: float
    min_periods: int = 20


def demodulate(
    trajectory: Trajectory,
    f_target: float,
    window: DemodWindow,
    beat_GHz: Optional[float] = None,
) -> complex:
    """
    Complex amplitude of <a>(t) at f_target.

    Projects onto exp(-i 2 pi (f_target - f_frame) t) over an integer number
    of beat periods inside the window. beat_GHz sets the period used for the
    integer count; it defaults to |f_target - f_frame|. A zero beat averages
    over the whole window.
    """
    offset = f_target - trajectory.frame_frequency
    beat = abs(offset) if beat_GHz is None else abs(beat_GHz)

    if beat > 0:
        periods = math.floor(window.duration * beat + 1e-9)
        if periods < window.min_periods:
            raise WindowTooShortError(
                f"window of {window.duration:.4g} ns holds {periods} beat periods, "
                f"need {window.min_periods}"
            )
        t_stop = window.t_start + periods / beat
    else:
        t_stop = window.t_start + window.duration

    times = trajectory.times
    if times.size < 2:
        raise WindowTooShortError("trajectory holds fewer than two samples")
    tolerance = 1e-9 * max(1.0, t_stop)
    # the window is half-open, so the last sample may sit one step before t_stop
    spacing = float(np.median(np.diff(times)))
    if times[-1] + spacing < t_stop - tolerance:
        raise WindowTooShortError(
            f"trajectory ends at {times[-1]:.4g} ns, window needs {t_stop:.4g} ns"
        )
    mask = (times >= window.t_start - tolerance) & (times < t_stop - tolerance)
    if not np.any(mask):
        raise WindowTooShortError("no samples inside the demodulation window")

    times = trajectory.times[mask]
    phase = np.exp(1j * 2 * math.pi * offset * times)
    return complex(np.mean(trajectory.a_expect[mask] * phase))


# ==================== TWO-TONE PROBE ====================

@dataclass(frozen=True)
class ProbeResponse:
    amplitude: complex      # demodulated <a> component at the probe frequency
    t: complex              # probe transmission amplitude
    T: float
    P_out_aW: float         # coherent probe output power
    P_out_total_aW: float   # kappa_out h f_probe <n>, window average
    fock_dim: int
    truncation_ok: bool = True


def probe_time_grid(
    model: ResonatorModel,
    f1_GHz: float,
    f2_GHz: float,
    settings: SolverSettings,
) -> Tuple[np.ndarray, DemodWindow]:
    """Sample times covering the transient plus an integer number of beat periods."""
    beat = abs(f2_GHz - f1_GHz)
    if beat == 0:
        raise DomainError("probe and pump share one frequency")
    transient = settings.transient_kappa_units / model.kappa_total
    period = 1.0 / beat
    # start on the sampling lattice so the window holds whole periods
    dt = period / settings.samples_per_beat
    t_start = math.ceil(transient / dt) * dt
    n_samples = settings.window_beats * settings.samples_per_beat
    times = t_start + dt * np.arange(n_samples + 1)
    window = DemodWindow(t_start=t_start, duration=settings.window_beats * period,
                         min_periods=settings.window_beats)
    return times, window


def two_tone_trajectory(
    model: ResonatorModel,
    drive: DriveSpec,
    fock_dim: int,
    settings: SolverSettings,
) -> Tuple[Trajectory, DemodWindow]:
    """
    Trajectory of a bichromatic drive in the tone-1 frame and the window to
    demodulate it over.

    The periodic method samples one beat period of the periodic orbit; the
    transient method (also used above settings.periodic_max_fock_dim)
    evolves the vacuum through the transient and window_beats periods.
    """
    tone1, tone2 = drive.tones
    hamiltonian = two_tone_hamiltonian(model, drive, fock_dim)
    c_ops = collapse_operators(model, fock_dim)

    periodic = (
        settings.two_tone_method is TwoToneMethod.PERIODIC
        and fock_dim <= settings.periodic_max_fock_dim
    )
    if periodic:
        beat = abs(tone2.f_GHz - tone1.f_GHz)
        if beat == 0:
            raise DomainError("probe and pump share one frequency")
        period = 1.0 / beat
        trajectory = periodic_steady_state(
            hamiltonian,
            c_ops,
            period,
            samples=settings.samples_per_beat,
            frame_frequency=tone1.f_GHz,
            rtol=settings.rtol,
            atol=settings.atol,
        )
        return trajectory, DemodWindow(t_start=0.0, duration=period, min_periods=1)

    times, window = probe_time_grid(model, tone1.f_GHz, tone2.f_GHz, settings)
    trajectory = time_evolve(
        hamiltonian,
        c_ops,
        DensityMatrix.fock_state(fock_dim, 0),
        (0.0, float(times[-1])),
        t_eval=times,
        frame_frequency=tone1.f_GHz,
        rtol=settings.rtol,
        atol=settings.atol,
    )
    return trajectory, window


def probe_response(
    model: ModelLike,
    drive: DriveSpec,
    f_target: float,
    settings: Optional[SolverSettings] = None,
) -> ProbeResponse:
    """
    Demodulate the bichromatic response at f_target. The Fock dimension
    starts at settings.two_tone_start_dim and escalates while the top
    level is populated.
    """
    settings = settings or SolverSettings()
    model = _as_model(model)
    if drive.is_single_tone:
        raise DomainError("probe_response needs two tones")
    tone1, tone2 = drive.tones
    probe = tone2 if f_target == tone2.f_GHz else tone1
    if probe.P_aW <= 0:
        raise DomainError("probe transmission is undefined at zero probe power")

    dim = settings.two_tone_start_dim
    while True:
        trajectory, window = two_tone_trajectory(model, drive, dim, settings)
        if trajectory.top_population < settings.truncation_tol:
            break
        if dim >= settings.max_fock_dim:
            logger.warning(
                f"Top Fock population {trajectory.top_population:.2e} at the maximum dimension {dim}"
            )
            break
        logger.warning(f"Top Fock population {trajectory.top_population:.2e} at dim={dim}; escalating")
        dim = min(dim + settings.fock_step, settings.max_fock_dim)

    beat = abs(tone2.f_GHz - tone1.f_GHz)
    amplitude = demodulate(trajectory, f_target, window, beat_GHz=beat)
    a_in = input_amplitude(probe.P_aW, probe.f_GHz)
    _, kappa_out = port_rates(model, probe.port)
    t = 1j * math.sqrt(kappa_out) * amplitude / a_in

    tolerance = 1e-9 * max(1.0, window.t_start + window.duration)
    in_window = (trajectory.times >= window.t_start - tolerance) & (
        trajectory.times < window.t_start + window.duration - tolerance
    )
    n_mean = float(np.mean(trajectory.populations[in_window] @ np.arange(dim)))
    total = kappa_out * circuit.photon_energy(f_target) * n_mean / circuit.ATTOWATT
    return ProbeResponse(
        amplitude=amplitude,
        t=complex(t),
        T=float(abs(t) ** 2),
        P_out_aW=output_power_aW(amplitude, f_target, model.kappa_c_MHz),
        P_out_total_aW=total,
        fock_dim=dim,
        truncation_ok=trajectory.top_population < settings.truncation_tol,
    )
