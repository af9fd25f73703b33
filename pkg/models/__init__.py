# Domain Models Module
# Value types shared by the simulation, agent and CLI layers

from .circuit import CONSTANTS, CircuitParams, DerivedCircuit, PhysicalConstants
from .drive import DriveSpec, Port, Tone
from .fit import FitResult, Trace, TraceKind
from .quantum import (
    BasisTag,
    DensityMatrix,
    QuantumOperatorMatrix,
    Spectrum,
    SpectrumMethod,
    SteadyStateResult,
    Trajectory,
)
from .scan import Axis, CellKind, CellOutcome, CellTask, ConservationLine, ScanGrid, ScanResult
from .solver import SolverSettings

__all__ = [
    'CONSTANTS', 'CircuitParams', 'DerivedCircuit', 'PhysicalConstants',
    'DriveSpec', 'Port', 'Tone',
    'FitResult', 'Trace', 'TraceKind',
    'BasisTag', 'DensityMatrix', 'QuantumOperatorMatrix', 'Spectrum', 'SpectrumMethod',
    'SteadyStateResult', 'Trajectory',
    'Axis', 'CellKind', 'CellOutcome', 'CellTask', 'ConservationLine', 'ScanGrid', 'ScanResult',
    'SolverSettings',
]
