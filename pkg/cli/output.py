"""
Output Writers - CSV Data Files and the Run Manifest

Every data file is an RFC-4180 CSV with a unit-suffixed header:

    maps          long form, one row per cell: x, y, T, P_out_aW, converged, ...
    traces        frequency_GHz, value[, sigma]   (readable by read_trace)
    fit results   one row of named estimates, plus a key: value text report
    lines         one row per locus point of each conservation line

Floats are written with 12 significant digits; flagged cells carry NaN and
converged=false. Writing is deterministic, so identical results give
identical bytes. Only the manifest carries timestamps.
"""

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from models.fit import FitResult, Trace
from models.scan import ConservationLine, ScanResult
from simulation.fit import ingest_trace

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


def format_value(value: Any) -> str:
    """CSV cell text: 12 significant digits, NaN marker, lowercase booleans."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "NaN"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{float(value):.{SIGNIFICANT_DIGITS}g}"
    if isinstance(value, (list, tuple)):
        return " ".join(format_value(v) for v in value)
    return str(value)


def write_rows(path: Union[str, Path], fieldnames: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: format_value(row.get(key, float("nan"))) for key in fieldnames})
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


# ==================== MAPS ====================

def scan_rows(result: ScanResult) -> List[Dict[str, Any]]:
    grid = result.grid
    x_label, y_label = grid.x_axis.label, grid.y_axis.label
    rows = []
    for row, col, x, y in grid.cells():
        record = {
            x_label: x,
            y_label: y,
            "T": result.T[row, col],
            "P_out_aW": result.P_out_aW[row, col],
            "converged": bool(result.converged[row, col]),
        }
        if result.P_out_total_aW is not None:
            record["P_out_total_aW"] = result.P_out_total_aW[row, col]
        for name, values in result.auxiliary.items():
            record[name] = values[row, col]
        rows.append(record)
    return rows


def scan_fieldnames(result: ScanResult) -> List[str]:
    names = [result.grid.x_axis.label, result.grid.y_axis.label, "T", "P_out_aW", "converged"]
    if result.P_out_total_aW is not None:
        names.append("P_out_total_aW")
    names.extend(sorted(result.auxiliary))
    return names


# ==================== WRITERS ====================

def write_trace(trace: Trace, path: Union[str, Path]) -> Path:
    fieldnames = ["frequency_GHz", "value"] + (["sigma"] if trace.sigma is not None else [])
    rows = []
    for index in range(len(trace)):
        row = {"frequency_GHz": trace.x[index], "value": trace.y[index]}
        if trace.sigma is not None:
            row["sigma"] = trace.sigma[index]
        rows.append(row)
    return write_rows(path, fieldnames, rows)


def write_fit(result: FitResult, path: Union[str, Path]) -> Path:
    data = result.to_dict()
    return write_rows(path, list(data), [data])


def write_fit_report(result: FitResult, path: Union[str, Path]) -> Path:
    """Flat key: value text report of a fit."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key}: {format_value(value)}" for key, value in result.to_dict().items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Wrote fit report to {path}")
    return path


def write_lines(lines: Sequence[ConservationLine], path: Union[str, Path]) -> Path:
    fieldnames = ["label", "m", "k", "i", "j", "energy_GHz", "f1_GHz", "f2_GHz"]
    rows = []
    for line in lines:
        m, k = line.order
        i, j = line.target
        for f1, f2 in line.locus:
            rows.append({
                "label": line.label, "m": m, "k": k, "i": i, "j": j,
                "energy_GHz": line.energy_GHz, "f1_GHz": f1, "f2_GHz": f2,
            })
    return write_rows(path, fieldnames, rows)


def write_csv(
    result: Union[ScanResult, Trace, FitResult, Sequence[ConservationLine]],
    path: Union[str, Path],
) -> Path:
    """Write any result kind as CSV; I/O errors propagate as OSError."""
    if isinstance(result, ScanResult):
        return write_rows(path, scan_fieldnames(result), scan_rows(result))
    if isinstance(result, Trace):
        return write_trace(result, path)
    if isinstance(result, FitResult):
        return write_fit(result, path)
    if isinstance(result, (list, tuple)) and all(isinstance(r, ConservationLine) for r in result):
        return write_lines(result, path)
    raise TypeError(f"cannot write {type(result).__name__} as CSV")


def read_trace(path: Union[str, Path]) -> Trace:
    return ingest_trace(path)


def trace_from_scan(result: ScanResult) -> Trace:
    """A 1xN one-tone map as a transmission trace over its frequency axis."""
    if result.grid.shape[0] != 1:
        raise ValueError(f"need a single-row map, got shape {result.grid.shape}")
    keep = np.isfinite(result.T[0])
    x = np.asarray(result.grid.x_axis.values)[keep]
    return Trace(x=x, y=result.T[0][keep])


# ==================== MANIFEST ====================

@dataclass
class RunManifest:
    """Provenance of one CLI run."""

    subcommand: str
    config_hash: str
    version: str
    started: str
    finished: Optional[str] = None
    failures: int = 0
    files: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    def add_file(self, path: Path):
        self.files.append(path.name)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _json_safe(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.floating, float)):
        number = float(value)
        return number if math.isfinite(number) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, Path):
        return str(value)
    return value


def write_manifest(manifest: RunManifest, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_json_safe(manifest.to_dict()), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Wrote manifest to {path}")
    return path
