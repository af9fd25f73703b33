"""
Circuit Relations - Closed-Form Transmon and Resonator Formulas

This module collects every closed-form relation between the device
parameters and the observable frequencies:

1. SQUID flux tuning of the Josephson energy
2. Transmon transition frequencies and asymptotic level energies
3. Circuit quantities (L, C_sigma, Z_r, C_c) in SI units
4. Inversions used by the fit module (Ec from the splitting, EJ from f01)
5. Unit conversions shared by the dynamics engine

Energies are E/h in GHz and rates kappa/2pi in MHz everywhere except inside
derived_quantities, which converts to SI.

The asymptotic level formula keeps the (n + 1/2) factor on the plasma term:
    E_n/h = sqrt(8 EJ Ec) (n + 1/2) - (Ec/4)(2n^2 + 2n + 1)
so that E_1 - E_0 and E_2 - E_1 reproduce f01 and f12 exactly.
"""

import logging
import math
from typing import Optional, Tuple

from models.circuit import CONSTANTS, CircuitParams, DerivedCircuit
from simulation.errors import DomainError, TransmonValidityError

logger = logging.getLogger(__name__)


# ==================== UNIT CONVERSIONS ====================

GHZ = 1e9
MHZ = 1e6
ATTOWATT = 1e-18


def ghz_to_angular_per_ns(f_GHz: float) -> float:
    """Frequency in GHz to angular frequency in rad/ns."""
    return 2 * math.pi * f_GHz


def mhz_to_angular_per_ns(f_MHz: float) -> float:
    """Rate kappa/2pi in MHz to kappa in rad/ns."""
    return 2 * math.pi * f_MHz * 1e-3


def mhz_to_angular_per_s(f_MHz: float) -> float:
    return 2 * math.pi * f_MHz * MHZ


def photon_energy(f_GHz: float) -> float:
    """h*f in joules."""
    return CONSTANTS.h * f_GHz * GHZ


# ==================== FLUX TUNING ====================

def ej_at_flux(p: CircuitParams, allow_non_transmon: Optional[bool] = None) -> float:
    """
    Effective Josephson energy of the SQUID at the configured flux (GHz).

    EJ(flux) = EJ_max |cos(pi flux)| sqrt(1 + d^2 tan^2(pi flux)), evaluated
    in the equivalent form EJ_max sqrt(cos^2 + d^2 sin^2) which stays finite
    at half-integer flux.
    """
    phase = math.pi * p.flux_Phi0
    ej = p.EJ_max_GHz * math.sqrt(math.cos(phase) ** 2 + (p.asymmetry_d * math.sin(phase)) ** 2)

    override = p.allow_non_transmon if allow_non_transmon is None else allow_non_transmon
    if not override and ej / p.Ec_GHz <= 1:
        raise TransmonValidityError(
            f"EJ(flux={p.flux_Phi0})/Ec = {ej / p.Ec_GHz:.3g} is outside the transmon regime"
        )
    return ej


# ==================== TRANSMON LEVELS ====================

def _check_positive(**values: float):
    for name, value in values.items():
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")


def transition_frequencies(EJ: float, Ec: float) -> Tuple[float, float]:
    """(f01, f12) in GHz from the leading transmon asymptotics."""
    _check_positive(EJ=EJ, Ec=Ec)
    if EJ / Ec <= 1:
        raise TransmonValidityError(f"EJ/Ec = {EJ / Ec:.3g} must exceed 1")
    plasma = math.sqrt(8 * EJ * Ec)
    f01 = plasma - Ec
    f12 = f01 - Ec
    return f01, f12


def eigenenergy_asymptotic(n: int, EJ: float, Ec: float) -> float:
    """Asymptotic E_n/h in GHz (ground-state offset -EJ omitted)."""
    if n < 0:
        raise DomainError(f"level index must be non-negative, got {n}")
    _check_positive(EJ=EJ, Ec=Ec)
    if EJ / Ec <= 1:
        raise TransmonValidityError(f"EJ/Ec = {EJ / Ec:.3g} must exceed 1")
    plasma = math.sqrt(8 * EJ * Ec)
    return plasma * (n + 0.5) - (Ec / 4) * (2 * n * n + 2 * n + 1)


def ec_from_splitting(f01: float, f12: float) -> float:
    """Charging energy from the first two transitions: Ec = f01 - f12."""
    if f01 <= f12:
        raise DomainError(f"f01 ({f01}) must exceed f12 ({f12})")
    return f01 - f12


def ej_from_f01(f01: float, Ec: float) -> float:
    """Invert f01 = sqrt(8 EJ Ec) - Ec for EJ (GHz)."""
    _check_positive(f01=f01, Ec=Ec)
    return (f01 + Ec) ** 2 / (8 * Ec)


# ==================== CIRCUIT QUANTITIES ====================

def josephson_inductance(EJ: float) -> float:
    """L = hbar^2 / (4 e^2 EJ) in henry, EJ given as E_J/h in GHz."""
    _check_positive(EJ=EJ)
    ej_joule = EJ * GHZ * CONSTANTS.h
    return CONSTANTS.hbar ** 2 / (4 * CONSTANTS.e ** 2 * ej_joule)


def total_capacitance(Ec: float) -> float:
    """C_sigma = e^2 / (2 Ec) in farad, Ec given as E_c/h in GHz."""
    _check_positive(Ec=Ec)
    ec_joule = Ec * GHZ * CONSTANTS.h
    return CONSTANTS.e ** 2 / (2 * ec_joule)


def characteristic_impedance(EJ: float, Ec: float) -> float:
    """Z_r = (hbar/e^2) sqrt(Ec / 2EJ) in ohm."""
    _check_positive(EJ=EJ, Ec=Ec)
    return CONSTANTS.Z_quantum * math.sqrt(Ec / (2 * EJ))


def coupling_capacitance(kappa_c_MHz: float, f01_GHz: float, Z0: float, Zr: float) -> float:
    """C_c = sqrt(kappa_c / (8 pi^3 f01^3 Z0 Zr)) in farad, kappa_c angular."""
    _check_positive(kappa_c=kappa_c_MHz, f01=f01_GHz, Z0=Z0, Zr=Zr)
    kappa = mhz_to_angular_per_s(kappa_c_MHz)
    f = f01_GHz * GHZ
    return math.sqrt(kappa / (8 * math.pi ** 3 * f ** 3 * Z0 * Zr))


def plasma_frequency(L: float, C: float) -> float:
    """1 / (2 pi sqrt(L C)) in GHz."""
    _check_positive(L=L, C=C)
    return 1.0 / (2 * math.pi * math.sqrt(L * C)) / GHZ


def derived_quantities(p: CircuitParams) -> DerivedCircuit:
    """All closed-form circuit quantities at the configured flux point."""
    ej = ej_at_flux(p)
    f01, f12 = transition_frequencies(ej, p.Ec_GHz)
    L = josephson_inductance(ej)
    C_sigma = total_capacitance(p.Ec_GHz)
    Zr = math.sqrt(L / C_sigma)
    C_c = coupling_capacitance(p.kappa_c_MHz, f01, p.Z0_Ohm, Zr)
    logger.debug(f"Derived circuit at flux={p.flux_Phi0}: f01={f01:.6f} GHz, Zr={Zr:.1f} Ohm")
    return DerivedCircuit(f01=f01, f12=f12, L=L, C_sigma=C_sigma, Zr=Zr, C_c=C_c)


def resonance_frequencies(p: CircuitParams) -> Tuple[float, float]:
    """(f01, f12) at the configured flux."""
    return transition_frequencies(ej_at_flux(p), p.Ec_GHz)


# ==================== LINEAR RESONATOR ====================

def linear_photon_number(P_aW: float, f_GHz: float, kappa_c_MHz: float, kappa_i_MHz: float) -> float:
    """
    Mean photon number of the equivalent linear resonator driven on resonance:
        <n> = 4 kappa_c / (2 kappa_c + kappa_i)^2 * P / (h f)
    """
    if P_aW < 0:
        raise DomainError(f"power must be non-negative, got {P_aW}")
    kappa_c = mhz_to_angular_per_s(kappa_c_MHz)
    kappa_tot = mhz_to_angular_per_s(2 * kappa_c_MHz + kappa_i_MHz)
    flux = P_aW * ATTOWATT / photon_energy(f_GHz)
    return 4 * kappa_c / kappa_tot ** 2 * flux
