"""
Quantum Models - Operators, Spectra and Density Matrices

These are the value types exchanged between the spectrum and dynamics
modules. All matrices are dense numpy arrays; dimensions stay small (a few
tens of levels), so no sparse machinery is involved.

A QuantumOperatorMatrix is immutable after construction: its array is
flagged read-only, which makes it safe to share between worker threads.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


class BasisTag(Enum):
    """Basis an operator is expressed in."""

    CHARGE = "charge"
    FOCK = "fock"


class SpectrumMethod(Enum):
    EXACT_CHARGE_BASIS = "exact_charge_basis"
    ASYMPTOTIC = "asymptotic"
    KERR = "kerr"


@dataclass(frozen=True, eq=False)
class QuantumOperatorMatrix:
    """
    Dense complex square matrix tagged with its basis.

    Binary operations refuse to mix bases, so a charge-basis Hamiltonian can
    never be combined with Fock-basis ladder operators by accident.
    """

    entries: np.ndarray
    basis_tag: BasisTag = BasisTag.FOCK

    def __post_init__(self):
        matrix = np.array(self.entries, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"operator must be square, got shape {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, "entries", matrix)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def _check_basis(self, other: "QuantumOperatorMatrix"):
        if other.basis_tag is not self.basis_tag:
            raise ValueError(
                f"basis mismatch: {self.basis_tag.value} vs {other.basis_tag.value}"
            )
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "QuantumOperatorMatrix") -> "QuantumOperatorMatrix":
        self._check_basis(other)
        return QuantumOperatorMatrix(self.entries + other.entries, self.basis_tag)

    def __sub__(self, other: "QuantumOperatorMatrix") -> "QuantumOperatorMatrix":
        self._check_basis(other)
        return QuantumOperatorMatrix(self.entries - other.entries, self.basis_tag)

    def __matmul__(self, other: "QuantumOperatorMatrix") -> "QuantumOperatorMatrix":
        self._check_basis(other)
        return QuantumOperatorMatrix(self.entries @ other.entries, self.basis_tag)

    def __mul__(self, scalar: complex) -> "QuantumOperatorMatrix":
        return QuantumOperatorMatrix(self.entries * scalar, self.basis_tag)

    __rmul__ = __mul__

    def dagger(self) -> "QuantumOperatorMatrix":
        return QuantumOperatorMatrix(self.entries.conj().T, self.basis_tag)

    def hermiticity_error(self) -> float:
        """Relative Frobenius norm of H - H^dagger."""
        norm = np.linalg.norm(self.entries)
        if norm == 0:
            return 0.0
        return float(np.linalg.norm(self.entries - self.entries.conj().T) / norm)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.hermiticity_error() <= tol

    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).copy()

    @classmethod
    def identity(cls, dim: int, basis_tag: BasisTag = BasisTag.FOCK) -> "QuantumOperatorMatrix":
        return cls(np.eye(dim, dtype=complex), basis_tag)


@dataclass(frozen=True)
class Spectrum:
    """Lowest eigenenergies E_n/h in GHz, ascending."""

    energies: Tuple[float, ...]
    method_tag: SpectrumMethod

    @property
    def n_levels(self) -> int:
        return len(self.energies)

    def transition(self, i: int, j: int) -> float:
        """(E_j - E_i)/h in GHz."""
        return self.energies[j] - self.energies[i]

    def gaps(self) -> List[float]:
        """Successive gaps E_{n+1} - E_n."""
        return [self.energies[n + 1] - self.energies[n] for n in range(self.n_levels - 1)]

    def relative(self) -> List[float]:
        """Energies measured from the ground state."""
        return [e - self.energies[0] for e in self.energies]

    def is_strictly_ascending(self) -> bool:
        return all(g > 0 for g in self.gaps())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method_tag.value,
            "energies_GHz": list(self.energies),
            "gaps_GHz": self.gaps(),
        }


@dataclass(frozen=True)
class DensityMatrix:
    """A Fock-basis density matrix, optionally stamped with a time in ns."""

    matrix: QuantumOperatorMatrix
    time_tag: Optional[float] = None

    @property
    def dim(self) -> int:
        return self.matrix.dim

    def trace(self) -> complex:
        return complex(np.trace(self.matrix.entries))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix.entries)).copy()

    def expect(self, operator: QuantumOperatorMatrix) -> complex:
        return complex(np.trace(operator.entries @ self.matrix.entries))

    def violations(
        self,
        hermitian_tol: float = 1e-10,
        trace_tol: float = 1e-8,
        positivity_tol: float = 1e-8,
    ) -> List[str]:
        """Return a list of broken invariants (empty when the state is valid)."""
        problems = []
        rho = self.matrix.entries
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        if herm > hermitian_tol:
            problems.append(f"non-Hermitian by {herm:.3e}")
        trace_err = abs(self.trace() - 1.0)
        if trace_err > trace_tol:
            problems.append(f"trace off by {trace_err:.3e}")
        min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
        if min_eig < -positivity_tol:
            problems.append(f"negative eigenvalue {min_eig:.3e}")
        return problems

    @classmethod
    def fock_state(cls, dim: int, n: int = 0) -> "DensityMatrix":
        rho = np.zeros((dim, dim), dtype=complex)
        rho[n, n] = 1.0
        return cls(QuantumOperatorMatrix(rho, BasisTag.FOCK), time_tag=0.0)


@dataclass(frozen=True)
class SteadyStateResult:
    """Output of the Lindblad steady-state solve."""

    rho: DensityMatrix
    a_expect: complex
    n_expect: float
    residual: float
    fock_dim: int = 0
    top_population: float = 0.0
    truncation_ok: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "a_expect_re": self.a_expect.real,
            "a_expect_im": self.a_expect.imag,
            "n_expect": self.n_expect,
            "residual": self.residual,
            "fock_dim": self.fock_dim,
            "top_population": self.top_population,
            "truncation_ok": self.truncation_ok,
        }


@dataclass(frozen=True)
class Trajectory:
    """Sampled time evolution: times in ns, <a>(t), populations(t), trace(t)."""

    times: np.ndarray
    a_expect: np.ndarray
    populations: np.ndarray
    traces: np.ndarray
    frame_frequency: float  # GHz
    fock_dim: int = 0
    notes: Dict[str, Any] = field(default_factory=dict)

    @property
    def top_population(self) -> float:
        return float(np.max(self.populations[:, -1])) if self.populations.size else 0.0

    @property
    def max_trace_error(self) -> float:
        return float(np.max(np.abs(self.traces - 1.0))) if self.traces.size else 0.0
