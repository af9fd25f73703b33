"""
Circuit Models - Physical Device Description

This module holds the value types that describe the single-junction resonator:

1. PhysicalConstants: CODATA values the closed-form relations need
2. CircuitParams: the validated device parameter set (single source of truth)
3. DerivedCircuit: quantities computed from CircuitParams (f01, L, C_sigma, ...)

Unit convention:
- energies are stored as E/h in GHz
- rates are stored as kappa/2pi in MHz
- SI values only appear inside DerivedCircuit

CircuitParams is a pydantic model so the same validation runs for the CLI
config file, the HTTP routes and direct Python use.
"""

from dataclasses import dataclass, asdict
from typing import Any, Dict

from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import constants


@dataclass(frozen=True)
class PhysicalConstants:
    """Planck constants, elementary charge, flux and resistance quanta (SI)."""

    h: float = constants.h
    hbar: float = constants.hbar
    e: float = constants.e

    @property
    def Phi0(self) -> float:
        """Superconducting flux quantum h/2e (Wb)."""
        return self.h / (2 * self.e)

    @property
    def Z_quantum(self) -> float:
        """Impedance scale hbar/e^2 (Ohm)."""
        return self.hbar / self.e ** 2


CONSTANTS = PhysicalConstants()


class CircuitParams(BaseModel):
    """
    Physical parameters of the SQUID-tuned single-junction resonator.

    Field names match the keys of the `circuit` block of a run config, so
    every physical value carries its unit in the name.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    EJ_max_GHz: float = Field(..., gt=0, description="Josephson energy at zero flux, E_J/h")
    Ec_GHz: float = Field(..., gt=0, description="Charging energy E_c/h")
    kappa_c_MHz: float = Field(..., gt=0, description="Per-port coupling rate kappa_c/2pi")
    kappa_i_MHz: float = Field(0.0, ge=0, description="Internal loss rate kappa_i/2pi")
    Z0_Ohm: float = Field(50.0, gt=0, description="Line impedance")
    flux_Phi0: float = Field(0.0, description="Flux bias in units of Phi0")
    asymmetry_d: float = Field(0.0, ge=0, lt=1, description="SQUID junction asymmetry")
    allow_non_transmon: bool = Field(False, description="Skip the EJ(flux)/Ec > 1 check")

    @field_validator("flux_Phi0")
    @classmethod
    def _finite_flux(cls, value: float) -> float:
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError("flux_Phi0 must be finite")
        return value

    @property
    def kappa_total_MHz(self) -> float:
        """Total linewidth 2*kappa_c + kappa_i (both ports plus internal loss)."""
        return 2 * self.kappa_c_MHz + self.kappa_i_MHz

    def with_flux(self, flux_Phi0: float) -> "CircuitParams":
        return self.model_copy(update={"flux_Phi0": flux_Phi0})


@dataclass(frozen=True)
class DerivedCircuit:
    """Closed-form circuit quantities at the configured flux point."""

    f01: float      # GHz
    f12: float      # GHz
    L: float        # H
    C_sigma: float  # F
    Zr: float       # Ohm
    C_c: float      # F

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        return {
            "f01_GHz": data["f01"],
            "f12_GHz": data["f12"],
            "L_H": data["L"],
            "C_sigma_F": data["C_sigma"],
            "Zr_Ohm": data["Zr"],
            "C_c_F": data["C_c"],
        }
