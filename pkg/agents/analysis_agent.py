"""
Analysis Agent - Spectra, Circuit Quantities, Conservation Lines and Fits

Everything that is cheap and stateless lives behind this one agent:

1. SPECTRUM_COMPUTE  level structure at the configured flux
                     (exact charge basis, asymptotic, Kerr ladder)
2. DERIVED_COMPUTE   closed-form circuit quantities (f01, f12, L, C_sigma, Zr, C_c)
3. LINES_COMPUTE     energy-conservation lines for the diagram overlay
4. FIT_LORENTZIAN    f01, kappa_c, kappa_i from a T or R trace
5. FIT_FLUX_ARC      EJ_max, Ec, d from f01 versus flux

The report functions below are plain functions so the CLI can call them
without a running broker; the handlers only wrap them.
"""

import asyncio
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

from core.agent_base import Agent, AgentMessage, MessageType, error_payload
from core.event_bus import Event, EventBus, EventType
from models.circuit import CircuitParams
from models.fit import Trace, TraceKind
from models.quantum import Spectrum
from simulation import circuit, fit, spectrum
from simulation.errors import DomainError
from simulation.spectroscopy import DEFAULT_LINES, conservation_lines

logger = logging.getLogger(__name__)

SPECTRUM_METHODS = ("kerr", "exact", "asymptotic")


# ==================== REPORTS ====================

def level_spectrum(
    params: CircuitParams,
    method: str = "kerr",
    n_levels: int = 4,
    charge_cutoff: int = 20,
) -> Spectrum:
    """Bare levels of the junction at its flux point by the chosen method."""
    ej = circuit.ej_at_flux(params)
    if method == "exact":
        return spectrum.cpb_spectrum(ej, params.Ec_GHz, n_levels, charge_cutoff=charge_cutoff)
    if method == "asymptotic":
        return spectrum.asymptotic_spectrum(ej, params.Ec_GHz, n_levels)
    if method == "kerr":
        f01, _ = circuit.transition_frequencies(ej, params.Ec_GHz)
        return spectrum.kerr_spectrum(f01, params.Ec_GHz, n_levels)
    raise DomainError(f"spectrum method must be one of {SPECTRUM_METHODS}, got {method!r}")


def spectrum_report(params: CircuitParams, n_levels: int = 4, charge_cutoff: int = 20) -> Dict[str, Any]:
    ej = circuit.ej_at_flux(params)
    f01, f12 = circuit.transition_frequencies(ej, params.Ec_GHz)
    report = {
        "EJ_GHz": ej,
        "f01_GHz": f01,
        "f12_GHz": f12,
        "charge_dispersion_GHz": spectrum.charge_dispersion(ej, params.Ec_GHz, charge_cutoff),
    }
    for method in ("exact", "asymptotic", "kerr"):
        levels = level_spectrum(params, method, n_levels, charge_cutoff)
        report[method] = {**levels.to_dict(), "relative_GHz": levels.relative()}
    return report


def derived_report(params: CircuitParams) -> Dict[str, Any]:
    return {"EJ_GHz": circuit.ej_at_flux(params), **circuit.derived_quantities(params).to_dict()}


def lines_report(
    params: CircuitParams,
    window: Tuple[float, float],
    requests: Sequence[Tuple[int, int, int, int]] = DEFAULT_LINES,
    method: str = "kerr",
    n_points: int = 201,
) -> List[Dict[str, Any]]:
    levels = level_spectrum(params, method, n_levels=max(4, max(max(r[2:]) for r in requests) + 1))
    lines = conservation_lines(levels, window, requests, n_points)
    return [
        {
            "label": line.label,
            "order": list(line.order),
            "target": list(line.target),
            "energy_GHz": line.energy_GHz,
            "locus": [list(point) for point in line.locus],
        }
        for line in lines
    ]


# ==================== AGENT ====================

class AnalysisAgent(Agent):
    """
    Stateless analysis operations.

    Fits publish FIT_COMPLETED on the event bus so subscribers (the CLI
    run manifest, the stats endpoint) can follow them.
    """

    def __init__(self):
        super().__init__(
            agent_id="analysis_agent",
            name="Analysis Agent"
        )
        self.event_bus = EventBus()

        self.register_handler(MessageType.SPECTRUM_COMPUTE, self._handle_spectrum)
        self.register_handler(MessageType.DERIVED_COMPUTE, self._handle_derived)
        self.register_handler(MessageType.LINES_COMPUTE, self._handle_lines)
        self.register_handler(MessageType.FIT_LORENTZIAN, self._handle_fit_lorentzian)
        self.register_handler(MessageType.FIT_FLUX_ARC, self._handle_fit_flux_arc)

    def get_capabilities(self) -> List[MessageType]:
        return [
            MessageType.SPECTRUM_COMPUTE,
            MessageType.DERIVED_COMPUTE,
            MessageType.LINES_COMPUTE,
            MessageType.FIT_LORENTZIAN,
            MessageType.FIT_FLUX_ARC,
        ]

    async def on_start(self):
        logger.info(f"{self.name} started and ready")

    async def on_stop(self):
        logger.info(f"{self.name} stopping")

    # ==================== LEVELS ====================

    async def _handle_spectrum(self, message: AgentMessage) -> AgentMessage:
        payload = message.payload
        try:
            params = CircuitParams.model_validate(payload.get("circuit", {}))
            report = spectrum_report(
                params,
                n_levels=int(payload.get("n_levels", 4)),
                charge_cutoff=int(payload.get("charge_cutoff", 20)),
            )
        except Exception as e:
            logger.error(f"Spectrum error: {e}")
            return message.create_response(error_payload(e), success=False)
        return message.create_response({"success": True, "spectrum": report})

    async def _handle_derived(self, message: AgentMessage) -> AgentMessage:
        try:
            params = CircuitParams.model_validate(message.payload.get("circuit", {}))
            report = derived_report(params)
        except Exception as e:
            logger.error(f"Derived quantities error: {e}")
            return message.create_response(error_payload(e), success=False)
        return message.create_response({"success": True, "derived": report})

    async def _handle_lines(self, message: AgentMessage) -> AgentMessage:
        payload = message.payload
        try:
            params = CircuitParams.model_validate(payload.get("circuit", {}))
            window = tuple(payload.get("window_GHz", ()))
            if len(window) != 2:
                raise DomainError("window_GHz needs exactly two frequencies")
            requests = [tuple(r) for r in payload.get("requests") or DEFAULT_LINES]
            lines = lines_report(
                params,
                window,
                requests,
                method=payload.get("method", "kerr"),
                n_points=int(payload.get("n_points", 201)),
            )
        except Exception as e:
            logger.error(f"Conservation lines error: {e}")
            return message.create_response(error_payload(e), success=False)
        return message.create_response({"success": True, "lines": lines})

    # ==================== FITS ====================

    async def _publish_fit(self, kind: str, result: Dict[str, Any]):
        await self.event_bus.publish(Event(
            event_type=EventType.FIT_COMPLETED,
            data={"fit": kind, **{k: v for k, v in result.items() if isinstance(v, (int, float, str, bool))}},
        ))

    async def _handle_fit_lorentzian(self, message: AgentMessage) -> AgentMessage:
        payload = message.payload
        try:
            trace = Trace(
                x=payload["x"],
                y=payload["y"],
                sigma=payload.get("sigma"),
            )
            kind = TraceKind(payload.get("kind", TraceKind.TRANSMISSION.value))
            kappa_i_fixed: Optional[float] = payload.get("kappa_i_fixed")
            result = await asyncio.to_thread(
                fit.fit_lorentzian,
                trace,
                kind,
                bool(payload.get("free_scale", False)),
                kappa_i_fixed,
            )
        except KeyError as e:
            return message.create_response(
                {"success": False, "error": f"missing field {e}", "error_type": "KeyError"},
                success=False
            )
        except Exception as e:
            logger.error(f"Lorentzian fit error: {e}")
            return message.create_response(error_payload(e), success=False)

        report = result.to_dict()
        await self._publish_fit("lorentzian", report)
        return message.create_response({"success": True, "fit": report})

    async def _handle_fit_flux_arc(self, message: AgentMessage) -> AgentMessage:
        payload = message.payload
        try:
            points = [tuple(point) for point in payload["points"]]
            result = await asyncio.to_thread(
                fit.fit_flux_arc,
                points,
                payload.get("Ec_GHz"),
                bool(payload.get("fit_asymmetry", False)),
            )
        except KeyError as e:
            return message.create_response(
                {"success": False, "error": f"missing field {e}", "error_type": "KeyError"},
                success=False
            )
        except Exception as e:
            logger.error(f"Flux-arc fit error: {e}")
            return message.create_response(error_payload(e), success=False)

        report = result.to_dict()
        await self._publish_fit("flux_arc", report)
        return message.create_response({"success": True, "fit": report})
