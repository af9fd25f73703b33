"""
Solver Settings

Numerical knobs shared by the spectrum, dynamics and spectroscopy modules.
The field names are the keys of the `solver` block of a run config.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class TwoToneMethod(Enum):
    # one-period propagator and its fixed point
    PERIODIC = "periodic"
    # transient plus window_beats beat periods from the vacuum
    TRANSIENT = "transient"


class SolverSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    # Truncations
    charge_cutoff: int = Field(20, ge=5)
    fock_dim: int = Field(15, ge=3)
    max_fock_dim: int = Field(40, ge=3)
    fock_step: int = Field(5, ge=1)
    truncation_tol: float = Field(1e-6, gt=0)

    # Steady state
    residual_tol: float = Field(1e-10, gt=0)

    # Time evolution (time in ns)
    rtol: float = Field(1e-8, gt=0)
    atol: float = Field(1e-10, gt=0)
    transient_kappa_units: float = Field(10.0, gt=0)
    window_beats: int = Field(20, ge=1)
    samples_per_beat: int = Field(32, ge=4)

    # Two-tone cells start at min(fock_dim, two_tone_fock_dim) and escalate from there
    two_tone_fock_dim: int = Field(8, ge=3)
    two_tone_method: TwoToneMethod = TwoToneMethod.PERIODIC
    # above this dimension the periodic propagator is too large and the transient method runs
    periodic_max_fock_dim: int = Field(14, ge=3)

    # Feature detection
    prominence_fraction: float = Field(0.05, gt=0, lt=1)

    @property
    def two_tone_start_dim(self) -> int:
        return min(self.fock_dim, self.two_tone_fock_dim)
