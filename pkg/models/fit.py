"""
Fit Models - Traces and Fit Results
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np


class TraceKind(Enum):
    TRANSMISSION = "transmission"
    REFLECTION = "reflection"


@dataclass(frozen=True)
class Trace:
    """Frequency trace: x in GHz, y as T or R, optional per-point sigma."""

    x: np.ndarray
    y: np.ndarray
    sigma: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("trace x and y must be 1-D arrays of equal length")
        diffs = np.diff(x)
        if x.size > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("trace x must be strictly monotone")
        if np.any(y < 0):
            raise ValueError("trace values must be non-negative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            if sigma.shape != x.shape:
                raise ValueError("trace sigma must match x in length")
            object.__setattr__(self, "sigma", sigma)

    def __len__(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class FitResult:
    """
    Named estimates with covariance and convergence diagnostics.

    params holds every model parameter, fixed ones included (stderr 0);
    param_order lists the varying ones in covariance order.
    """

    params: Dict[str, float]
    stderr: Dict[str, float]
    covariance: np.ndarray
    param_order: Tuple[str, ...]
    residual_rms: float
    converged: bool
    iterations: int
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        for name in self.params:
            data[name] = self.params[name]
            data[f"{name}_stderr"] = self.stderr.get(name, float("nan"))
        data.update(
            {
                "residual_rms": self.residual_rms,
                "converged": self.converged,
                "iterations": self.iterations,
            }
        )
        data.update(self.extras)
        return data
