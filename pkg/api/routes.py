"""
API Routes - FastAPI Gateway to the Agents

Each route validates its body with a pydantic schema, wraps it in an
AgentMessage and asks the MessageBroker for the answer:

    GET  /api/health              service status and broker stats
    GET  /api/stats               broker and event-bus statistics
    POST /api/spectrum            levels at the flux point (exact, asymptotic, Kerr)
    POST /api/derived             closed-form circuit quantities
    POST /api/steady-state        driven steady state with T and R
    POST /api/conservation-lines  energy-conservation lines in a window
    POST /api/fit/lorentzian      f01, kappa_c, kappa_i from a trace
    POST /api/fit/flux-arc        EJ_max, Ec, d from f01 versus flux

A broker timeout maps to HTTP 500 and an agent error to HTTP 400.
Scans are long-running and stay on the command line.
"""

import logging
from typing import Any, Dict, List, Literal, Optional, Tuple

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from core.agent_base import AgentMessage, MessageType
from core.event_bus import EventBus
from core.message_broker import MessageBroker
from models.circuit import CircuitParams
from models.drive import Tone
from models.fit import TraceKind
from models.solver import SolverSettings

logger = logging.getLogger(__name__)

router = APIRouter()

REQUEST_TIMEOUT = 60.0


# ==================== PYDANTIC SCHEMAS ====================

class CircuitRequest(BaseModel):
    circuit: CircuitParams


class SpectrumRequest(CircuitRequest):
    n_levels: int = Field(4, ge=2, le=20)
    charge_cutoff: int = Field(20, ge=5)


class SteadyStateRequest(CircuitRequest):
    tone: Tone
    solver: Optional[SolverSettings] = None


class LinesRequest(CircuitRequest):
    window_GHz: Tuple[float, float]
    requests: Optional[List[Tuple[int, int, int, int]]] = None
    method: Literal["kerr", "exact", "asymptotic"] = "kerr"
    n_points: int = Field(201, ge=2, le=10000)


class LorentzianRequest(BaseModel):
    x: List[float] = Field(..., description="frequencies in GHz")
    y: List[float] = Field(..., description="T or R values")
    sigma: Optional[List[float]] = None
    kind: TraceKind = TraceKind.TRANSMISSION
    free_scale: bool = False
    kappa_i_fixed_MHz: Optional[float] = Field(None, ge=0)


class FluxArcRequest(BaseModel):
    points: List[Tuple[float, float]] = Field(..., description="(flux_Phi0, f01_GHz) pairs")
    Ec_GHz: Optional[float] = Field(None, gt=0)
    fit_asymmetry: bool = False


# ==================== HELPER FUNCTIONS ====================

def get_broker() -> MessageBroker:
    return MessageBroker()


async def ask_agent(
    message_type: MessageType,
    recipient: str,
    payload: Dict[str, Any],
    failure: str,
) -> Dict[str, Any]:
    """Send a request through the broker and turn failures into HTTP errors."""
    message = AgentMessage(
        type=message_type,
        sender="api_gateway",
        recipient=recipient,
        payload=payload,
    )
    response = await get_broker().request(message, timeout=REQUEST_TIMEOUT)

    if not response:
        raise HTTPException(status_code=500, detail="Request timeout")

    if response.type == MessageType.ERROR or not response.payload.get("success"):
        raise HTTPException(
            status_code=400,
            detail=response.payload.get("error", failure)
        )

    return response.payload


# ==================== LEVEL ROUTES ====================

@router.post("/spectrum", tags=["Levels"])
async def compute_spectrum(request: SpectrumRequest):
    return await ask_agent(
        MessageType.SPECTRUM_COMPUTE,
        "analysis_agent",
        {
            "circuit": request.circuit.model_dump(mode="json"),
            "n_levels": request.n_levels,
            "charge_cutoff": request.charge_cutoff,
        },
        "Spectrum failed",
    )


@router.post("/derived", tags=["Levels"])
async def compute_derived(request: CircuitRequest):
    return await ask_agent(
        MessageType.DERIVED_COMPUTE,
        "analysis_agent",
        {"circuit": request.circuit.model_dump(mode="json")},
        "Derived quantities failed",
    )


@router.post("/conservation-lines", tags=["Levels"])
async def compute_lines(request: LinesRequest):
    return await ask_agent(
        MessageType.LINES_COMPUTE,
        "analysis_agent",
        {
            "circuit": request.circuit.model_dump(mode="json"),
            "window_GHz": list(request.window_GHz),
            "requests": [list(r) for r in request.requests] if request.requests else None,
            "method": request.method,
            "n_points": request.n_points,
        },
        "Conservation lines failed",
    )


# ==================== DYNAMICS ROUTES ====================

@router.post("/steady-state", tags=["Dynamics"])
async def compute_steady_state(request: SteadyStateRequest):
    return await ask_agent(
        MessageType.STEADY_STATE,
        "solver",
        {
            "circuit": request.circuit.model_dump(mode="json"),
            "tone": request.tone.model_dump(mode="json"),
            "solver": request.solver.model_dump(mode="json") if request.solver else None,
        },
        "Steady state failed",
    )


# ==================== FIT ROUTES ====================

@router.post("/fit/lorentzian", tags=["Fits"])
async def fit_lorentzian(request: LorentzianRequest):
    return await ask_agent(
        MessageType.FIT_LORENTZIAN,
        "analysis_agent",
        {
            "x": request.x,
            "y": request.y,
            "sigma": request.sigma,
            "kind": request.kind.value,
            "free_scale": request.free_scale,
            "kappa_i_fixed": request.kappa_i_fixed_MHz,
        },
        "Lorentzian fit failed",
    )


@router.post("/fit/flux-arc", tags=["Fits"])
async def fit_flux_arc(request: FluxArcRequest):
    return await ask_agent(
        MessageType.FIT_FLUX_ARC,
        "analysis_agent",
        {
            "points": [list(p) for p in request.points],
            "Ec_GHz": request.Ec_GHz,
            "fit_asymmetry": request.fit_asymmetry,
        },
        "Flux-arc fit failed",
    )


# ==================== SYSTEM ROUTES ====================

@router.get("/health", tags=["System"])
async def health_check():
    broker = get_broker()
    return {
        "status": "healthy",
        "broker_stats": broker.get_stats()
    }


@router.get("/stats", tags=["System"])
async def stats():
    return {
        "broker": get_broker().get_stats(),
        "events": EventBus().get_stats(),
    }
