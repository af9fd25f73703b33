"""
Scan Models - Grids, Cells and Map Results

A scan is a rectangular grid of cells. Each cell is an independent solver
run described by a CellTask and answered by a CellOutcome; a ScanResult
assembles the outcomes by (row, col) so the result never depends on the
order in which workers finished.

Matrix layout: values[row, col] with row indexing the y axis and col the
x axis.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.circuit import CircuitParams
from models.drive import DriveSpec
from models.solver import SolverSettings


@dataclass(frozen=True)
class Axis:
    """A named, unit-tagged, strictly monotone axis."""

    name: str
    unit: str
    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError(f"axis {self.name} is empty")
        diffs = np.diff(values)
        if len(values) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError(f"axis {self.name} must be strictly monotone")
        object.__setattr__(self, "values", values)

    @property
    def label(self) -> str:
        return f"{self.name}_{self.unit}"

    def __len__(self) -> int:
        return len(self.values)

    @property
    def step(self) -> float:
        if len(self.values) < 2:
            return 0.0
        return abs(self.values[1] - self.values[0])


@dataclass(frozen=True)
class ScanGrid:
    x_axis: Axis
    y_axis: Axis
    fixed: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.x_axis) * len(self.y_axis) < 2:
            raise ValueError("a scan grid needs at least two cells")

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.y_axis), len(self.x_axis)

    def cells(self):
        """Yield (row, col, x, y) in row-major order."""
        for row, y in enumerate(self.y_axis.values):
            for col, x in enumerate(self.x_axis.values):
                yield row, col, x, y


class CellKind(Enum):
    ONE_TONE = "one_tone"
    TWO_TONE = "two_tone"


@dataclass(frozen=True)
class CellTask:
    """Everything a worker needs to evaluate one grid cell."""

    kind: CellKind
    row: int
    col: int
    params: CircuitParams
    settings: SolverSettings
    drive: DriveSpec
    target_GHz: float


@dataclass(frozen=True)
class CellOutcome:
    row: int
    col: int
    amplitude: complex = complex("nan")
    T: float = float("nan")
    P_out_aW: float = float("nan")
    P_out_total_aW: float = float("nan")
    converged: bool = False
    fock_dim: int = 0
    error: Optional[str] = None

    @classmethod
    def failed(cls, row: int, col: int, error: str) -> "CellOutcome":
        return cls(row=row, col=col, converged=False, error=error)


@dataclass
class ScanResult:
    """Assembled map: complex probe amplitudes plus derived T and P_out."""

    grid: ScanGrid
    values: np.ndarray
    T: np.ndarray
    P_out_aW: np.ndarray
    converged: np.ndarray
    P_out_total_aW: Optional[np.ndarray] = None
    auxiliary: Dict[str, np.ndarray] = field(default_factory=dict)
    meta: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def assemble(
        cls,
        grid: ScanGrid,
        outcomes: Sequence[CellOutcome],
        meta: Optional[Dict[str, Any]] = None,
    ) -> "ScanResult":
        shape = grid.shape
        values = np.full(shape, complex("nan"), dtype=complex)
        T = np.full(shape, np.nan)
        P_out = np.full(shape, np.nan)
        P_total = np.full(shape, np.nan)
        converged = np.zeros(shape, dtype=bool)
        for outcome in outcomes:
            index = (outcome.row, outcome.col)
            converged[index] = outcome.converged
            if outcome.converged:
                values[index] = outcome.amplitude
                T[index] = outcome.T
                P_out[index] = outcome.P_out_aW
                P_total[index] = outcome.P_out_total_aW
        return cls(
            grid=grid,
            values=values,
            T=T,
            P_out_aW=P_out,
            converged=converged,
            P_out_total_aW=P_total,
            meta=dict(meta or {}),
        )

    @property
    def failure_count(self) -> int:
        return int(np.size(self.converged) - np.count_nonzero(self.converged))

    def row(self, index: int) -> np.ndarray:
        return self.T[index, :]


@dataclass(frozen=True)
class ConservationLine:
    """
    Locus of m*f1 + k*f2 = (E_j - E_i)/h inside a frequency window.

    order = (m, k) photons from tone 1 and tone 2, target = (i, j) levels.
    """

    order: Tuple[int, int]
    target: Tuple[int, int]
    energy_GHz: float
    locus: Tuple[Tuple[float, float], ...]

    @property
    def label(self) -> str:
        m, k = self.order
        i, j = self.target
        return f"{m}f1+{k}f2=E{j}-E{i}"

    def residuals(self) -> List[float]:
        m, k = self.order
        return [m * f1 + k * f2 - self.energy_GHz for f1, f2 in self.locus]

    def distance_to(self, f1: float, f2: float) -> float:
        """Perpendicular distance in GHz from (f1, f2) to the line."""
        m, k = self.order
        return abs(m * f1 + k * f2 - self.energy_GHz) / float(np.hypot(m, k))
