"""
Run Configuration - YAML Blocks Validated by pydantic

A run config is a YAML mapping with these blocks:

    circuit:  EJ_max_GHz, Ec_GHz, kappa_c_MHz, kappa_i_MHz, Z0_Ohm, flux_Phi0, ...
    solver:   charge_cutoff, fock_dim, tolerances, window settings
    scan:     axes f1_GHz, f2_GHz, P1_aW, P2_aW as {start, stop, num, log}
    drive:    fixed tone values f1_GHz, f2_GHz, P1_aW, P2_aW, same_frequency
    fit:      trace path or synthetic trace, flux points
    output:   directory, echo_config
    seed:     integer for the synthetic-noise generator

Unknown keys are rejected everywhere. Validation errors are reported with
the dotted key path and the unit carried in the key name.
"""

import hashlib
import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from models.circuit import CircuitParams
from models.fit import TraceKind
from models.solver import SolverSettings

UNIT_SUFFIXES = ("GHz", "MHz", "aW", "Ohm", "Phi0")


class ConfigError(Exception):
    """A run config that cannot be read, parsed or validated."""

    def __init__(self, message: str, key_paths: Optional[List[str]] = None):
        super().__init__(message)
        self.key_paths = key_paths or []


# ==================== BLOCKS ====================

class AxisSpec(BaseModel):
    """A scan axis: num points from start to stop, linear or logarithmic."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    start: float
    stop: float
    num: int = Field(..., ge=1)
    log: bool = False

    @model_validator(mode="after")
    def _check_range(self) -> "AxisSpec":
        if self.num > 1 and self.start == self.stop:
            raise ValueError("start and stop must differ when num > 1")
        if self.log and (self.start <= 0 or self.stop <= 0):
            raise ValueError("a logarithmic axis needs start > 0 and stop > 0")
        return self

    def values(self) -> Tuple[float, ...]:
        if self.num == 1:
            return (float(self.start),)
        if self.log:
            points = np.geomspace(self.start, self.stop, self.num)
        else:
            points = np.linspace(self.start, self.stop, self.num)
        return tuple(float(v) for v in points)


class ScanBlock(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    f1_GHz: Optional[AxisSpec] = None
    f2_GHz: Optional[AxisSpec] = None
    P1_aW: Optional[AxisSpec] = None
    P2_aW: Optional[AxisSpec] = None
    levels_method: Literal["kerr", "exact", "asymptotic"] = "kerr"

    @field_validator("f1_GHz", "f2_GHz")
    @classmethod
    def _positive_frequencies(cls, axis: Optional[AxisSpec]) -> Optional[AxisSpec]:
        if axis is not None and min(axis.start, axis.stop) <= 0:
            raise ValueError("frequencies must be > 0 GHz")
        return axis

    @field_validator("P1_aW", "P2_aW")
    @classmethod
    def _non_negative_powers(cls, axis: Optional[AxisSpec]) -> Optional[AxisSpec]:
        if axis is not None and min(axis.start, axis.stop) < 0:
            raise ValueError("powers must be >= 0 aW")
        return axis


class DriveBlock(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    f1_GHz: Optional[float] = Field(None, gt=0)
    f2_GHz: Optional[float] = Field(None, gt=0)
    P1_aW: Optional[float] = Field(None, ge=0)
    P2_aW: Optional[float] = Field(None, ge=0)
    same_frequency: bool = False


class SyntheticTraceBlock(BaseModel):
    """A model trace around f01 of the configured circuit, with seeded noise."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    span_GHz: float = Field(0.15, gt=0)
    num: int = Field(401, ge=5)
    noise: float = Field(0.0, ge=0)


class FitBlock(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    trace: Optional[Path] = None
    synthetic: Optional[SyntheticTraceBlock] = None
    kind: TraceKind = TraceKind.TRANSMISSION
    free_scale: bool = False
    kappa_i_fixed_MHz: Optional[float] = Field(None, ge=0)
    flux_points: Optional[List[Tuple[float, float]]] = None
    Ec_fixed_GHz: Optional[float] = Field(None, gt=0)
    fit_asymmetry: bool = False


class OutputBlock(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    directory: Optional[Path] = None
    echo_config: bool = True


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    circuit: CircuitParams
    solver: SolverSettings = Field(default_factory=SolverSettings)
    scan: ScanBlock = Field(default_factory=ScanBlock)
    drive: DriveBlock = Field(default_factory=DriveBlock)
    fit: FitBlock = Field(default_factory=FitBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)
    seed: int = 0


# ==================== PARSING ====================

def _unit_of(key: str) -> Optional[str]:
    for suffix in UNIT_SUFFIXES:
        if key.endswith(f"_{suffix}"):
            return suffix
    return None


def describe_validation_error(error: ValidationError) -> Tuple[str, List[str]]:
    """One line per problem: dotted key path, message and the key's unit."""
    lines, paths = [], []
    for problem in error.errors():
        keys = [str(part) for part in problem["loc"]]
        path = ".".join(keys) or "<root>"
        unit = next((_unit_of(k) for k in reversed(keys) if _unit_of(k)), None)
        suffix = f" (unit: {unit})" if unit else ""
        lines.append(f"{path}: {problem['msg']}{suffix}")
        paths.append(path)
    return "\n".join(lines), paths


def config_from_mapping(data: Dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("a run config must be a mapping of blocks")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        message, paths = describe_validation_error(e)
        raise ConfigError(f"invalid run config:\n{message}", paths) from e


def parse_config_text(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"config is not valid YAML: {e}") from e
    if data is None:
        raise ConfigError("config is empty")
    return config_from_mapping(data)


def parse_config(path: Union[str, Path]) -> RunConfig:
    """
    Read and validate a YAML run config. A relative fit.trace path is
    resolved against the directory of the config file.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e

    config = parse_config_text(text)
    trace = config.fit.trace
    if trace is not None and not trace.is_absolute():
        fit_block = config.fit.model_copy(update={"trace": (path.parent / trace).resolve()})
        config = config.model_copy(update={"fit": fit_block})
    return config


def config_to_dict(config: RunConfig) -> Dict:
    return config.model_dump(mode="json")


def dump_config(config: RunConfig) -> str:
    """The validated config with defaults filled in, as YAML."""
    return yaml.safe_dump(config_to_dict(config), sort_keys=False)


def config_hash(config: RunConfig, version: str) -> str:
    """SHA-256 over the canonical JSON of the config and the artifact version."""
    canonical = json.dumps(
        {"version": version, "config": config_to_dict(config)},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ==================== SUBCOMMAND REQUIREMENTS ====================

REQUIRED_KEYS: Dict[str, Tuple[str, ...]] = {
    "spectrum": (),
    "onetone": ("scan.f1_GHz", "scan.P1_aW"),
    "saturation": ("scan.P1_aW",),
    "twotone": ("scan.f2_GHz", "scan.P1_aW", "drive.P2_aW"),
    "powermap": ("scan.P1_aW", "scan.P2_aW"),
    "diagram": ("scan.f1_GHz", "scan.f2_GHz", "drive.P1_aW", "drive.P2_aW"),
    "fit": (),
}


def _lookup(config: RunConfig, dotted: str):
    value = config
    for key in dotted.split("."):
        value = getattr(value, key)
    return value


def check_subcommand(config: RunConfig, name: str):
    """Raise ConfigError when the config lacks what the subcommand needs."""
    if name not in REQUIRED_KEYS:
        raise ConfigError(f"unknown subcommand {name!r}")
    missing = [key for key in REQUIRED_KEYS[name] if _lookup(config, key) is None]
    if name == "fit" and config.fit.trace is None and config.fit.synthetic is None and not config.fit.flux_points:
        missing.append("fit.trace | fit.synthetic | fit.flux_points")
    if missing:
        raise ConfigError(f"subcommand {name!r} needs config keys: {', '.join(missing)}", missing)
