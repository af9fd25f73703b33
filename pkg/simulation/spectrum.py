"""
Spectrum - Cooper-Pair-Box and Kerr-Oscillator Hamiltonians

Two descriptions of the same junction live here:

1. The exact Cooper-pair-box Hamiltonian in the charge basis
       H/h = sum_m 4Ec (m - n_g)^2 |m><m| - (EJ/2)(|m><m+1| + h.c.),  m in [-N, N]
   which serves as the validation oracle for the level structure.

2. The truncated Kerr (Duffing) ladder in the Fock basis
       H/h = f01 n - (Ec/2) n (n - 1)
   which the dynamics engine drives, because drive and collapse operators
   are natural there and the first two anharmonic gaps carry the physics.

All matrices are dense; dimensions stay around 40 at most.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import linalg

from models.quantum import BasisTag, QuantumOperatorMatrix, Spectrum, SpectrumMethod
from simulation import circuit
from simulation.errors import DomainError, SimulationError

logger = logging.getLogger(__name__)

MIN_CHARGE_CUTOFF = 5
MIN_KERR_DIM = 3


def build_cpb_hamiltonian(
    EJ: float,
    Ec: float,
    n_g: float = 0.0,
    charge_cutoff: int = 20,
) -> QuantumOperatorMatrix:
    """Tridiagonal (2N+1)-dimensional charge-basis Hamiltonian in GHz."""
    if charge_cutoff < MIN_CHARGE_CUTOFF:
        raise DomainError(f"charge cutoff must be at least {MIN_CHARGE_CUTOFF}, got {charge_cutoff}")
    if EJ < 0 or Ec <= 0:
        raise DomainError(f"need EJ >= 0 and Ec > 0, got EJ={EJ}, Ec={Ec}")

    charges = np.arange(-charge_cutoff, charge_cutoff + 1, dtype=float)
    diagonal = 4 * Ec * (charges - n_g) ** 2
    tunneling = np.full(charges.size - 1, -EJ / 2)
    matrix = np.diag(diagonal) + np.diag(tunneling, k=1) + np.diag(tunneling, k=-1)
    return QuantumOperatorMatrix(matrix, BasisTag.CHARGE)


def eigen_spectrum(H: QuantumOperatorMatrix, k: int) -> Spectrum:
    """The k lowest eigenvalues of a Hermitian operator, ascending."""
    if not 1 <= k <= H.dim:
        raise DomainError(f"k must lie in [1, {H.dim}], got {k}")
    if not H.is_hermitian(1e-12):
        raise DomainError(f"operator is not Hermitian (error {H.hermiticity_error():.2e})")

    try:
        values = linalg.eigh(
            H.entries, eigvals_only=True, subset_by_index=[0, k - 1]
        )
    except linalg.LinAlgError as e:
        raise SimulationError(f"eigensolver failed: {e}") from e
    if not np.all(np.isfinite(values)):
        raise SimulationError("eigensolver returned non-finite eigenvalues")

    method = (
        SpectrumMethod.EXACT_CHARGE_BASIS
        if H.basis_tag is BasisTag.CHARGE
        else SpectrumMethod.KERR
    )
    return Spectrum(energies=tuple(float(v) for v in values), method_tag=method)


def cpb_spectrum(
    EJ: float,
    Ec: float,
    n_levels: int = 4,
    n_g: float = 0.0,
    charge_cutoff: int = 20,
) -> Spectrum:
    """Exact charge-basis spectrum, convenience wrapper."""
    return eigen_spectrum(build_cpb_hamiltonian(EJ, Ec, n_g, charge_cutoff), n_levels)


def asymptotic_spectrum(EJ: float, Ec: float, n_levels: int = 4) -> Spectrum:
    energies = tuple(circuit.eigenenergy_asymptotic(n, EJ, Ec) for n in range(n_levels))
    return Spectrum(energies=energies, method_tag=SpectrumMethod.ASYMPTOTIC)


def charge_dispersion(EJ: float, Ec: float, charge_cutoff: int = 20) -> float:
    """|gap01(n_g=0) - gap01(n_g=1/2)| in GHz."""
    at_zero = cpb_spectrum(EJ, Ec, 2, 0.0, charge_cutoff).transition(0, 1)
    at_half = cpb_spectrum(EJ, Ec, 2, 0.5, charge_cutoff).transition(0, 1)
    return abs(at_zero - at_half)


# ==================== FOCK BASIS ====================

def kerr_hamiltonian(f01: float, Ec: float, fock_dim: int) -> QuantumOperatorMatrix:
    """Diagonal Kerr ladder f01 n - (Ec/2) n(n-1) in GHz."""
    if fock_dim < MIN_KERR_DIM:
        raise DomainError(
            f"fock_dim must be at least {MIN_KERR_DIM} to hold two-photon physics, got {fock_dim}"
        )
    n = np.arange(fock_dim, dtype=float)
    return QuantumOperatorMatrix(np.diag(f01 * n - 0.5 * Ec * n * (n - 1)), BasisTag.FOCK)


def kerr_spectrum(f01: float, Ec: float, n_levels: int = 4) -> Spectrum:
    energies = np.real(kerr_hamiltonian(f01, Ec, max(n_levels, MIN_KERR_DIM)).diagonal())
    return Spectrum(
        energies=tuple(float(e) for e in energies[:n_levels]),
        method_tag=SpectrumMethod.KERR,
    )


def ladder_operators(fock_dim: int) -> Tuple[QuantumOperatorMatrix, QuantumOperatorMatrix]:
    """Truncated annihilation and creation operators (a, a^dagger)."""
    if fock_dim < 2:
        raise DomainError(f"fock_dim must be at least 2, got {fock_dim}")
    a = np.diag(np.sqrt(np.arange(1, fock_dim, dtype=float)), k=1)
    annihilation = QuantumOperatorMatrix(a, BasisTag.FOCK)
    return annihilation, annihilation.dagger()


def number_operator(fock_dim: int) -> QuantumOperatorMatrix:
    return QuantumOperatorMatrix(np.diag(np.arange(fock_dim, dtype=float)), BasisTag.FOCK)
