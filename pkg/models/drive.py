"""
Drive Models - Coherent Tones Applied to the Resonator

A DriveSpec carries one or two tones. Each tone has a frequency in GHz, an
input power in attowatts at the resonator port, and the port it enters.
"""

from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Port(Enum):
    LEFT = "left"
    RIGHT = "right"


class Tone(BaseModel):
    """A single coherent microwave tone."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    f_GHz: float = Field(..., gt=0)
    P_aW: float = Field(..., ge=0)
    port: Port = Port.LEFT


class DriveSpec(BaseModel):
    """
    One or two tones.

    Two tones at the same frequency are rejected unless `same_frequency` is
    set, in which case they are treated as phase-synchronized.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    tones: List[Tone] = Field(..., min_length=1, max_length=2)
    same_frequency: bool = False

    @model_validator(mode="after")
    def _distinct_frequencies(self) -> "DriveSpec":
        if len(self.tones) == 2 and not self.same_frequency:
            if self.tones[0].f_GHz == self.tones[1].f_GHz:
                raise ValueError(
                    "two tones share one frequency; set same_frequency to allow it"
                )
        return self

    @property
    def is_single_tone(self) -> bool:
        return len(self.tones) == 1

    @classmethod
    def single(cls, f_GHz: float, P_aW: float) -> "DriveSpec":
        return cls(tones=[Tone(f_GHz=f_GHz, P_aW=P_aW)])

    @classmethod
    def pump_probe(
        cls, f1_GHz: float, P1_aW: float, f2_GHz: float, P2_aW: float,
        same_frequency: bool = False,
    ) -> "DriveSpec":
        return cls(
            tones=[Tone(f_GHz=f1_GHz, P_aW=P1_aW), Tone(f_GHz=f2_GHz, P_aW=P2_aW)],
            same_frequency=same_frequency,
        )
