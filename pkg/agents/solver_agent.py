"""
Solver Agent - Evaluates Scan Cells and Single Steady States

Several SolverAgents form the worker pool of a scan. The broker routes
CELL_EVALUATE messages round-robin over them; each agent works through its
inbox one cell at a time. Cells run in the process executor the agent was
given, or in a worker thread without one, so the event loop keeps routing
messages to the other agents meanwhile.

Handled messages:
1. CELL_EVALUATE  payload {"task": CellTask}       -> {"outcome": CellOutcome}
2. STEADY_STATE   payload {"circuit", "tone", "solver"?} -> steady state + T, R
"""

import asyncio
import logging
from concurrent.futures import Executor
from typing import Any, Dict, List, Optional

from core.agent_base import Agent, AgentMessage, MessageType, error_payload
from models.circuit import CircuitParams
from models.drive import DriveSpec, Tone
from models.scan import CellTask
from models.solver import SolverSettings
from simulation import dynamics
from simulation.spectroscopy import evaluate_cell

logger = logging.getLogger(__name__)


def steady_state_report(params: CircuitParams, tone: Tone, settings: SolverSettings) -> Dict[str, Any]:
    """Steady state of a single tone, with transmission and reflection."""
    drive = DriveSpec(tones=[tone])
    ss = dynamics.solve_with_escalation(params, drive, settings)
    t, T, R = dynamics.transmission(ss, drive, params)
    return {
        **ss.to_dict(),
        "t_re": t.real,
        "t_im": t.imag,
        "T": T,
        "R": R,
        "f_GHz": tone.f_GHz,
        "P_aW": tone.P_aW,
    }


class SolverAgent(Agent):
    """
    One worker of the scan pool.

    Cells are pure functions of their task, so the agent keeps no state
    beyond a processed-cell counter. Agents of one pool share an executor.
    """

    def __init__(self, index: int = 0, executor: Optional[Executor] = None):
        super().__init__(
            agent_id=f"solver_agent_{index}",
            name=f"Solver Agent {index}"
        )
        self.cells_evaluated = 0
        self._executor = executor

        self.register_handler(MessageType.CELL_EVALUATE, self._handle_cell)
        self.register_handler(MessageType.STEADY_STATE, self._handle_steady_state)

    def get_capabilities(self) -> List[MessageType]:
        return [MessageType.CELL_EVALUATE, MessageType.STEADY_STATE]

    async def on_start(self):
        logger.info(f"{self.name} started and ready")

    async def on_stop(self):
        logger.info(f"{self.name} stopping after {self.cells_evaluated} cells")

    async def _handle_cell(self, message: AgentMessage) -> AgentMessage:
        task = message.payload.get("task")
        if not isinstance(task, CellTask):
            return message.create_response(
                {"success": False, "error": "payload needs a CellTask under 'task'", "error_type": "TypeError"},
                success=False
            )

        # evaluate_cell never raises for solver failures; it flags the cell
        if self._executor is None:
            outcome = await asyncio.to_thread(evaluate_cell, task)
        else:
            loop = asyncio.get_running_loop()
            outcome = await loop.run_in_executor(self._executor, evaluate_cell, task)
        self.cells_evaluated += 1
        return message.create_response({"success": True, "outcome": outcome})

    async def _handle_steady_state(self, message: AgentMessage) -> AgentMessage:
        payload = message.payload
        try:
            params = CircuitParams.model_validate(payload.get("circuit", {}))
            tone = Tone.model_validate(payload.get("tone", {}))
            settings = SolverSettings.model_validate(payload.get("solver") or {})
            report = await asyncio.to_thread(steady_state_report, params, tone, settings)
        except Exception as e:
            logger.error(f"Steady state error: {e}")
            return message.create_response(error_payload(e), success=False)

        return message.create_response({"success": True, "result": report})
