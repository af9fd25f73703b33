"""
Spectroscopy - Parameter Scans, Conservation Lines and Feature Detection

Every map here is a grid of independent cells:

    one_tone_map       drive frequency x drive power, steady state
    saturation_curve   drive power at fixed frequency, steady state
    two_tone_map       probe frequency x pump power, time evolution
    power_power_map    probe power x pump power at fixed frequencies
    energy_diagram     pump frequency x probe frequency at fixed powers

A scan builds CellTasks and hands them to a CellRunner. SerialRunner runs
them in order in the calling thread; agents.pool.AgentPoolRunner spreads
them over SolverAgents through the MessageBroker. Cells are pure
functions of their task, and ScanResult.assemble places outcomes by
(row, col), so serial and pooled runs give identical maps.

Map convention: values[row, col], row along the y axis, col along x.
"""

import asyncio
import logging
import math
import uuid
import warnings
from dataclasses import dataclass
from typing import Any, Awaitable, Callable, Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy import ndimage
from scipy.signal import find_peaks, peak_prominences

from core.event_bus import Event, EventBus, EventType
from models.circuit import CircuitParams
from models.drive import DriveSpec, Tone
from models.quantum import Spectrum
from models.scan import (
    Axis,
    CellKind,
    CellOutcome,
    CellTask,
    ConservationLine,
    ScanGrid,
    ScanResult,
)
from models.solver import SolverSettings
from simulation import circuit, dynamics
from simulation.errors import DomainError, SimulationError

logger = logging.getLogger(__name__)

OutcomeCallback = Callable[[CellOutcome], Awaitable[None]]


# ==================== CELL EVALUATION ====================

def _combined_tone(drive: DriveSpec) -> Tone:
    """Two phase-synchronized tones at one frequency act as one tone of summed amplitude."""
    tone1, tone2 = drive.tones
    power = (math.sqrt(tone1.P_aW) + math.sqrt(tone2.P_aW)) ** 2
    return Tone(f_GHz=tone1.f_GHz, P_aW=power, port=tone1.port)


def _one_tone_outcome(task: CellTask, drive: DriveSpec) -> CellOutcome:
    tone = drive.tones[0]
    ss = dynamics.solve_with_escalation(task.params, drive, task.settings)
    t, T, _ = dynamics.transmission(ss, drive, task.params)
    kappa = circuit.mhz_to_angular_per_s(task.params.kappa_c_MHz)
    total = kappa * circuit.photon_energy(tone.f_GHz) * ss.n_expect / circuit.ATTOWATT
    return CellOutcome(
        row=task.row,
        col=task.col,
        amplitude=t,
        T=T,
        P_out_aW=T * tone.P_aW,
        P_out_total_aW=total,
        converged=ss.truncation_ok,
        fock_dim=ss.fock_dim,
    )


def _two_tone_outcome(task: CellTask) -> CellOutcome:
    drive = task.drive
    tone1, tone2 = drive.tones
    if tone1.f_GHz == tone2.f_GHz:
        if not drive.same_frequency:
            raise DomainError("tones share one frequency and are not synchronized")
        return _one_tone_outcome(task, DriveSpec(tones=[_combined_tone(drive)]))

    probe, pump = (tone2, tone1) if task.target_GHz == tone2.f_GHz else (tone1, tone2)
    if probe.P_aW == 0:
        # no probe drive, nothing oscillates at the probe frequency
        return CellOutcome(
            row=task.row, col=task.col, amplitude=0j, T=float("nan"),
            P_out_aW=0.0, P_out_total_aW=float("nan"), converged=True,
            fock_dim=task.settings.two_tone_start_dim,
        )
    if pump.P_aW == 0:
        # pump off: the probe alone is a time-independent problem in its own frame
        return _one_tone_outcome(task, DriveSpec(tones=[probe]))

    response = dynamics.probe_response(task.params, drive, task.target_GHz, task.settings)
    return CellOutcome(
        row=task.row,
        col=task.col,
        amplitude=response.t,
        T=response.T,
        P_out_aW=response.P_out_aW,
        P_out_total_aW=response.P_out_total_aW,
        converged=response.truncation_ok,
        fock_dim=response.fock_dim,
    )


def evaluate_cell(task: CellTask) -> CellOutcome:
    """
    Evaluate one grid cell. Solver failures become a flagged outcome
    (converged=False, NaN values) instead of an exception.
    """
    try:
        if task.kind is CellKind.ONE_TONE:
            outcome = _one_tone_outcome(task, task.drive)
        else:
            outcome = _two_tone_outcome(task)
    except SimulationError as e:
        logger.warning(f"Cell ({task.row}, {task.col}) flagged: {type(e).__name__}: {e}")
        return CellOutcome.failed(task.row, task.col, f"{type(e).__name__}: {e}")

    logger.debug(f"Cell ({task.row}, {task.col}): T={outcome.T:.6g}, dim={outcome.fock_dim}")
    return outcome


# ==================== RUNNERS ====================

class CellRunner(Protocol):
    async def run(
        self,
        tasks: Sequence[CellTask],
        on_outcome: Optional[OutcomeCallback] = None,
    ) -> List[CellOutcome]:
        ...


class SerialRunner:
    """Evaluates cells one after another."""

    async def run(
        self,
        tasks: Sequence[CellTask],
        on_outcome: Optional[OutcomeCallback] = None,
    ) -> List[CellOutcome]:
        outcomes = []
        for task in tasks:
            outcome = evaluate_cell(task)
            outcomes.append(outcome)
            if on_outcome:
                await on_outcome(outcome)
            # let other coroutines (event subscribers) run between cells
            await asyncio.sleep(0)
        return outcomes


async def run_scan(
    name: str,
    grid: ScanGrid,
    tasks: Sequence[CellTask],
    runner: Optional[CellRunner] = None,
    event_bus: Optional[EventBus] = None,
    meta: Optional[Dict[str, Any]] = None,
) -> ScanResult:
    """
    Run the tasks of one grid and assemble the result, publishing progress
    events when an event bus is given.
    """
    runner = runner or SerialRunner()
    scan_id = f"{name}-{uuid.uuid4().hex[:8]}"
    start_dim = tasks[0].settings.fock_dim if tasks else 0

    async def publish(event_type: EventType, data: Dict[str, Any]):
        if event_bus is not None:
            await event_bus.publish(Event(event_type=event_type, data=data, scan_id=scan_id))

    async def on_outcome(outcome: CellOutcome):
        cell = {"row": outcome.row, "col": outcome.col}
        if outcome.error is not None or not outcome.converged:
            await publish(EventType.CELL_FAILED, {**cell, "error": outcome.error or "truncation"})
        else:
            await publish(EventType.CELL_COMPLETED, {**cell, "T": outcome.T})
        if outcome.fock_dim > start_dim:
            await publish(EventType.TRUNCATION_ESCALATED, {**cell, "fock_dim": outcome.fock_dim})

    logger.info(f"Scan {scan_id} started: {len(tasks)} cells on a {grid.shape[0]}x{grid.shape[1]} grid")
    await publish(EventType.SCAN_STARTED, {"name": name, "cells": len(tasks), "shape": list(grid.shape)})

    outcomes = await runner.run(tasks, on_outcome)
    result = ScanResult.assemble(grid, outcomes, meta={"scan": name, **(meta or {})})

    await publish(EventType.SCAN_FINISHED, {"name": name, "failures": result.failure_count})
    if result.failure_count:
        logger.warning(f"Scan {scan_id} finished with {result.failure_count} flagged cells")
    else:
        logger.info(f"Scan {scan_id} finished")
    return result


def _meta(params: CircuitParams, settings: SolverSettings, **extra) -> Dict[str, Any]:
    return {
        "circuit": params.model_dump(mode="json"),
        "solver": settings.model_dump(mode="json"),
        **extra,
    }


# ==================== SINGLE-TONE SCANS ====================

async def one_tone_map(
    params: CircuitParams,
    f_GHz: Sequence[float],
    P_aW: Sequence[float],
    settings: Optional[SolverSettings] = None,
    runner: Optional[CellRunner] = None,
    event_bus: Optional[EventBus] = None,
) -> ScanResult:
    """
    Steady-state transmission over drive frequency (x) and drive power (y).

    auxiliary["n_linear"] holds the photon number the equivalent linear
    resonator would hold on resonance at each row's power.
    """
    settings = settings or SolverSettings()
    grid = ScanGrid(Axis("f1", "GHz", tuple(f_GHz)), Axis("P1", "aW", tuple(P_aW)))
    tasks = [
        CellTask(CellKind.ONE_TONE, row, col, params, settings, DriveSpec.single(f, P), f)
        for row, col, f, P in grid.cells()
    ]
    result = await run_scan("onetone", grid, tasks, runner, event_bus, _meta(params, settings))

    f01, _ = circuit.resonance_frequencies(params)
    n_linear = np.array([
        circuit.linear_photon_number(P, f01, params.kappa_c_MHz, params.kappa_i_MHz)
        for P in grid.y_axis.values
    ])
    result.auxiliary["n_linear"] = np.repeat(n_linear[:, None], grid.shape[1], axis=1)
    return result


@dataclass
class SaturationCurve:
    """Output power versus input power at a fixed drive frequency."""

    f_GHz: float
    P_in_aW: np.ndarray
    P_out_aW: np.ndarray          # coherent, T * P_in
    P_out_total_aW: np.ndarray    # kappa_R h f <n>
    converged: np.ndarray
    linear_slope: float
    plateau_aW: float
    plateau_spread: float
    kappa_c_hf_aW: float

    @property
    def plateau_units(self) -> float:
        """Plateau in units of kappa_c h f."""
        return self.plateau_aW / self.kappa_c_hf_aW

    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.P_in_aW.tolist(), self.P_out_aW.tolist()))

    def to_result(self) -> ScanResult:
        grid = ScanGrid(Axis("f1", "GHz", (self.f_GHz,)), Axis("P1", "aW", tuple(self.P_in_aW)))
        T = self.P_out_aW / np.where(self.P_in_aW > 0, self.P_in_aW, np.nan)
        return ScanResult(
            grid=grid,
            values=T.astype(complex)[:, None],
            T=T[:, None],
            P_out_aW=self.P_out_aW[:, None],
            converged=self.converged[:, None],
            P_out_total_aW=self.P_out_total_aW[:, None],
            meta={
                "scan": "saturation",
                "linear_slope": self.linear_slope,
                "plateau_aW": self.plateau_aW,
                "plateau_kappa_c_hf": self.plateau_units,
                "plateau_spread": self.plateau_spread,
            },
        )


def detect_plateau(P_in: np.ndarray, P_out: np.ndarray) -> Tuple[float, float]:
    """
    Plateau level over the top decade of input power: the median output
    there, with (max - min) / median as a flatness measure.
    """
    finite = np.isfinite(P_out) & (P_in > 0)
    if not np.any(finite):
        return float("nan"), float("nan")
    top = finite & (P_in >= np.max(P_in[finite]) / 10)
    values = P_out[top]
    level = float(np.median(values))
    spread = float((np.max(values) - np.min(values)) / level) if level > 0 else float("nan")
    return level, spread


async def saturation_curve(
    params: CircuitParams,
    P_aW: Sequence[float],
    f_GHz: Optional[float] = None,
    settings: Optional[SolverSettings] = None,
    runner: Optional[CellRunner] = None,
    event_bus: Optional[EventBus] = None,
) -> SaturationCurve:
    """
    Output power against input power at f01 (or a given frequency).

    P_out is the coherent output T * P_in. The low-power slope is P_out/P_in
    at the weakest power and the plateau is detected on P_out over the top
    decade; the total emitted power kappa_c h f <n> rides along as an
    auxiliary column.
    """
    settings = settings or SolverSettings()
    if f_GHz is None:
        f_GHz, _ = circuit.resonance_frequencies(params)
    result = await one_tone_map(params, [f_GHz], P_aW, settings, runner, event_bus)

    P_in = np.asarray(result.grid.y_axis.values)
    P_out = result.P_out_aW[:, 0]
    P_total = result.P_out_total_aW[:, 0]
    weakest = int(np.argmin(P_in))
    slope = float(P_out[weakest] / P_in[weakest]) if P_in[weakest] > 0 else float("nan")
    level, spread = detect_plateau(P_in, P_out)

    kappa = circuit.mhz_to_angular_per_s(params.kappa_c_MHz)
    kappa_c_hf = kappa * circuit.photon_energy(f_GHz) / circuit.ATTOWATT
    logger.info(
        f"Saturation at {f_GHz:.6f} GHz: slope={slope:.4f}, plateau={level / kappa_c_hf:.3f} kappa_c h f"
    )
    return SaturationCurve(
        f_GHz=f_GHz,
        P_in_aW=P_in,
        P_out_aW=P_out,
        P_out_total_aW=P_total,
        converged=result.converged[:, 0],
        linear_slope=slope,
        plateau_aW=level,
        plateau_spread=spread,
        kappa_c_hf_aW=kappa_c_hf,
    )


# ==================== TWO-TONE SCANS ====================

def _two_tone_task(row, col, params, settings, f1, P1, f2, P2, same_frequency) -> CellTask:
    if f1 == f2 and not same_frequency:
        # skip validation so the cell is flagged by evaluate_cell instead of aborting the map
        drive = DriveSpec.model_construct(
            tones=[Tone(f_GHz=f1, P_aW=P1), Tone(f_GHz=f2, P_aW=P2)], same_frequency=False
        )
    else:
        drive = DriveSpec.pump_probe(f1, P1, f2, P2, same_frequency=same_frequency)
    return CellTask(CellKind.TWO_TONE, row, col, params, settings, drive, f2)


async def two_tone_map(
    params: CircuitParams,
    f1_GHz: float,
    P1_aW: Sequence[float],
    f2_GHz: Sequence[float],
    P2_aW: float,
    settings: Optional[SolverSettings] = None,
    runner: Optional[CellRunner] = None,
    event_bus: Optional[EventBus] = None,
    same_frequency: bool = False,
) -> ScanResult:
    """
    Probe transmission over probe frequency (x) and pump power (y), with the
    pump held at f1.

    A pump-off row is computed alongside and stored as
    auxiliary["T_pump_off"] for contrast.
    """
    settings = settings or SolverSettings()
    grid = ScanGrid(Axis("f2", "GHz", tuple(f2_GHz)), Axis("P1", "aW", tuple(P1_aW)))
    tasks = [
        _two_tone_task(row, col, params, settings, f1_GHz, P1, f2, P2_aW, same_frequency)
        for row, col, f2, P1 in grid.cells()
    ]
    meta = _meta(params, settings, f1_GHz=f1_GHz, P2_aW=P2_aW)
    result = await run_scan("twotone", grid, tasks, runner, event_bus, meta)

    off_grid = ScanGrid(grid.x_axis, Axis("P1", "aW", (0.0,)))
    off_tasks = [
        _two_tone_task(0, col, params, settings, f1_GHz, 0.0, f2, P2_aW, same_frequency)
        for _, col, f2, _ in off_grid.cells()
    ]
    pump_off = await run_scan("twotone-pump-off", off_grid, off_tasks, runner, event_bus)
    result.auxiliary["T_pump_off"] = np.repeat(pump_off.T, grid.shape[0], axis=0)
    return result


async def power_power_map(
    params: CircuitParams,
    P1_aW: Sequence[float],
    P2_aW: Sequence[float],
    f1_GHz: Optional[float] = None,
    f2_GHz: Optional[float] = None,
    settings: Optional[SolverSettings] = None,
    runner: Optional[CellRunner] = None,
    event_bus: Optional[EventBus] = None,
) -> ScanResult:
    """
    Probe output power over probe power (x) and pump power (y) with the pump
    at f01 and the probe at f12 by default.

    meta records the brightest cell and whether the output rolls over
    before the high-power corner.
    """
    settings = settings or SolverSettings()
    f01, f12 = circuit.resonance_frequencies(params)
    f1 = f01 if f1_GHz is None else f1_GHz
    f2 = f12 if f2_GHz is None else f2_GHz

    grid = ScanGrid(Axis("P2", "aW", tuple(P2_aW)), Axis("P1", "aW", tuple(P1_aW)))
    tasks = [
        _two_tone_task(row, col, params, settings, f1, P1, f2, P2, False)
        for row, col, P2, P1 in grid.cells()
    ]
    meta = _meta(params, settings, f1_GHz=f1, f2_GHz=f2)
    result = await run_scan("powermap", grid, tasks, runner, event_bus, meta)

    if np.any(np.isfinite(result.P_out_aW)):
        row, col = np.unravel_index(np.nanargmax(result.P_out_aW), result.P_out_aW.shape)
        result.meta["peak_P_out_aW"] = float(result.P_out_aW[row, col])
        result.meta["peak_P1_aW"] = grid.y_axis.values[row]
        result.meta["peak_P2_aW"] = grid.x_axis.values[col]
        corner = result.P_out_aW[-1, -1]
        result.meta["rollover"] = bool(np.isfinite(corner) and corner < result.meta["peak_P_out_aW"])
    return result


async def energy_diagram(
    params: CircuitParams,
    f1_GHz: Sequence[float],
    f2_GHz: Sequence[float],
    P1_aW: float,
    P2_aW: float,
    settings: Optional[SolverSettings] = None,
    runner: Optional[CellRunner] = None,
    event_bus: Optional[EventBus] = None,
    same_frequency: bool = False,
) -> ScanResult:
    """
    Probe transmission over pump frequency (x) and probe frequency (y) at
    fixed powers. Cells with f1 == f2 are flagged unless same_frequency is set.
    """
    settings = settings or SolverSettings()
    grid = ScanGrid(Axis("f1", "GHz", tuple(f1_GHz)), Axis("f2", "GHz", tuple(f2_GHz)))
    tasks = [
        _two_tone_task(row, col, params, settings, f1, P1_aW, f2, P2_aW, same_frequency)
        for row, col, f1, f2 in grid.cells()
    ]
    meta = _meta(params, settings, P1_aW=P1_aW, P2_aW=P2_aW)
    return await run_scan("diagram", grid, tasks, runner, event_bus, meta)


# ==================== CONSERVATION LINES ====================

# (m, k, i, j): m photons of tone 1 and k of tone 2 drive level i to level j
DEFAULT_LINES: Tuple[Tuple[int, int, int, int], ...] = (
    (1, 0, 0, 1),
    (1, 0, 1, 2),
    (1, 1, 0, 2),
    (2, 1, 0, 3),
)


def conservation_line(
    spec: Spectrum,
    order: Tuple[int, int],
    target: Tuple[int, int],
    window: Tuple[float, float],
    n_points: int = 201,
) -> ConservationLine:
    """
    Locus of m f1 + k f2 = E_j - E_i inside the square window [lo, hi]^2.

    The locus may be empty when the line misses the window.
    """
    m, k = order
    i, j = target
    if m < 0 or k < 0 or (m == 0 and k == 0):
        raise DomainError(f"photon numbers must be non-negative and not both zero, got {order}")
    if i == j:
        raise DomainError(f"transition {i}->{j} has zero energy")
    if not 0 <= i < spec.n_levels or not 0 <= j < spec.n_levels:
        raise DomainError(f"levels ({i}, {j}) outside a {spec.n_levels}-level spectrum")
    if j < i:
        raise DomainError(f"target level {j} lies below initial level {i}")
    lo, hi = sorted(window)
    energy = spec.transition(i, j)

    if k == 0:
        f1 = energy / m
        locus = [(f1, f2) for f2 in np.linspace(lo, hi, n_points)] if lo <= f1 <= hi else []
    elif m == 0:
        f2 = energy / k
        locus = [(f1, f2) for f1 in np.linspace(lo, hi, n_points)] if lo <= f2 <= hi else []
    else:
        # f1 range for which f2 = (E - m f1) / k stays inside the window
        f1_lo = max(lo, (energy - k * hi) / m)
        f1_hi = min(hi, (energy - k * lo) / m)
        locus = []
        if f1_lo <= f1_hi:
            for f1 in np.linspace(f1_lo, f1_hi, n_points):
                locus.append((float(f1), float((energy - m * f1) / k)))

    return ConservationLine(
        order=(m, k),
        target=(i, j),
        energy_GHz=energy,
        locus=tuple((float(a), float(b)) for a, b in locus),
    )


def conservation_lines(
    spec: Spectrum,
    window: Tuple[float, float],
    requests: Sequence[Tuple[int, int, int, int]] = DEFAULT_LINES,
    n_points: int = 201,
) -> List[ConservationLine]:
    """Conservation lines for each (m, k, i, j) request."""
    if spec.n_levels < 4:
        raise DomainError(f"conservation lines need at least 4 levels, got {spec.n_levels}")
    return [
        conservation_line(spec, (m, k), (i, j), window, n_points)
        for m, k, i, j in requests
    ]


# ==================== FEATURE DETECTION ====================

@dataclass(frozen=True)
class Feature:
    """A local extremum of a map: position on the axes and its prominence."""

    x: float
    y: float
    prominence: float

    def to_dict(self) -> Dict[str, float]:
        return {"x": self.x, "y": self.y, "prominence": self.prominence}


def _subpixel(values: np.ndarray, index: int) -> float:
    """Quadratic-interpolated offset of an extremum, in index units."""
    if index <= 0 or index >= values.size - 1:
        return 0.0
    left, center, right = values[index - 1], values[index], values[index + 1]
    curvature = left - 2 * center + right
    if curvature == 0 or not np.isfinite(curvature):
        return 0.0
    return float(np.clip(0.5 * (left - right) / curvature, -0.5, 0.5))


def _axis_position(axis: Axis, fractional_index: float) -> float:
    values = np.asarray(axis.values)
    if values.size == 1:
        return float(values[0])
    return float(np.interp(fractional_index, np.arange(values.size), values))


def _prepared(matrix: np.ndarray, kind: str) -> np.ndarray:
    if kind not in ("peak", "dip"):
        raise DomainError(f"feature kind must be 'peak' or 'dip', got {kind!r}")
    data = np.array(matrix, dtype=float)
    if kind == "dip":
        data = -data
    finite = np.isfinite(data)
    if not np.any(finite):
        return data
    data[~finite] = np.min(data[finite])
    return data


def _threshold(data: np.ndarray, fraction: float, min_prominence: float) -> float:
    return max(fraction * float(np.max(data) - np.min(data)), min_prominence)


def _line_prominence(line: np.ndarray, index: int) -> float:
    if index <= 0 or index >= line.size - 1:
        # an edge sample is only judged against its interior side
        neighbor = line[1] if index == 0 else line[-2]
        return float(max(line[index] - np.min(line), 0.0)) if line[index] > neighbor else 0.0
    return float(peak_prominences(line, [index])[0][0])


def detect_features(
    result: ScanResult,
    kind: str = "peak",
    prominence_fraction: float = 0.05,
    min_prominence: float = 0.0,
    quantity: str = "T",
) -> List[Feature]:
    """
    Local maxima (kind="peak") or minima (kind="dip") of a map.

    A cell counts when it is the extremum of its 3x3 neighborhood and its
    prominence, the smaller of its prominences along the row and along the
    column, reaches max(prominence_fraction * dynamic range, min_prominence).
    Positions are refined by quadratic interpolation along each axis.
    Features come sorted by decreasing prominence.
    """
    matrix = getattr(result, quantity)
    data = _prepared(matrix, kind)
    if data.size == 0 or not np.any(np.isfinite(data)):
        return []
    threshold = _threshold(data, prominence_fraction, min_prominence)
    if threshold <= 0:
        return []

    ny, nx = data.shape
    features: List[Feature] = []
    if ny == 1 or nx == 1:
        line = data.ravel()
        along_x = ny == 1
        peaks, props = find_peaks(line, prominence=threshold)
        for index, prominence in zip(peaks, props["prominences"]):
            position = index + _subpixel(line, int(index))
            if along_x:
                features.append(Feature(_axis_position(result.grid.x_axis, position),
                                        result.grid.y_axis.values[0], float(prominence)))
            else:
                features.append(Feature(result.grid.x_axis.values[0],
                                        _axis_position(result.grid.y_axis, position), float(prominence)))
    else:
        floor = float(np.min(data))
        local_max = ndimage.maximum_filter(data, size=3, mode="nearest") == data
        for row, col in zip(*np.nonzero(local_max)):
            if data[row, col] - floor < threshold:
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)  # zero-prominence cells
                prominence = min(
                    _line_prominence(data[row, :], int(col)),
                    _line_prominence(data[:, col], int(row)),
                )
            if prominence < threshold:
                continue
            x = _axis_position(result.grid.x_axis, col + _subpixel(data[row, :], int(col)))
            y = _axis_position(result.grid.y_axis, row + _subpixel(data[:, col], int(row)))
            features.append(Feature(x, y, prominence))

    features.sort(key=lambda f: (-f.prominence, f.y, f.x))
    return features


def detect_row_peaks(
    result: ScanResult,
    row: int,
    prominence_fraction: float = 0.05,
    quantity: str = "T",
) -> List[Feature]:
    """Peaks of one map row along x, sorted by decreasing prominence."""
    line = _prepared(getattr(result, quantity)[row, :], "peak")
    if line.size < 3:
        return []
    threshold = _threshold(line, prominence_fraction, 0.0)
    if threshold <= 0:
        return []
    peaks, props = find_peaks(line, prominence=threshold)
    y = result.grid.y_axis.values[row]
    features = [
        Feature(_axis_position(result.grid.x_axis, index + _subpixel(line, int(index))), y, float(p))
        for index, p in zip(peaks, props["prominences"])
    ]
    features.sort(key=lambda f: (-f.prominence, f.x))
    return features


def autler_townes_splitting(
    result: ScanResult,
    prominence_fraction: float = 0.05,
) -> List[Tuple[float, float]]:
    """
    (pump power, splitting) per row of a two-tone map: the distance in GHz
    between the two most prominent probe peaks, 0 when fewer than two.
    """
    splittings = []
    for row, P1 in enumerate(result.grid.y_axis.values):
        peaks = detect_row_peaks(result, row, prominence_fraction)
        if len(peaks) < 2:
            splittings.append((P1, 0.0))
            continue
        splittings.append((P1, abs(peaks[0].x - peaks[1].x)))
    return splittings
