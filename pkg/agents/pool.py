"""
Agent Pool - Scan Cells Spread Over SolverAgents

AgentPoolRunner is the parallel CellRunner. It sends one CELL_EVALUATE
request per cell through the MessageBroker, never more at once than there
are SolverAgents, so every request starts on an idle agent and its timeout
covers the evaluation alone. Outcomes are reported as they complete and
the scan assembles them by (row, col), so the map is identical to a
serial run.

solver_pool() is the async context manager the CLI uses to bring a pool
up and down around one run. By default its agents hand their cells to a
shared ProcessPoolExecutor with one worker process per agent.
"""

import asyncio
import logging
from concurrent.futures import ProcessPoolExecutor
from contextlib import asynccontextmanager
from typing import AsyncIterator, List, Optional, Sequence

from core.agent_base import AgentMessage, MessageType
from core.message_broker import MessageBroker
from models.scan import CellOutcome, CellTask
from simulation.spectroscopy import OutcomeCallback
from agents.analysis_agent import AnalysisAgent
from agents.solver_agent import SolverAgent

logger = logging.getLogger(__name__)


class AgentPoolRunner:
    """
    Runs cells on whatever SolverAgents the broker knows about.

    A request that times out or comes back as an error becomes a flagged
    cell; it never aborts the scan.
    """

    def __init__(self, broker: Optional[MessageBroker] = None, timeout: Optional[float] = 600.0):
        self.broker = broker or MessageBroker()
        self.timeout = timeout

    @property
    def size(self) -> int:
        return len(self.broker.get_capable_agents(MessageType.CELL_EVALUATE))

    async def _evaluate(self, task: CellTask, slots: asyncio.Semaphore) -> CellOutcome:
        async with slots:
            message = AgentMessage(
                type=MessageType.CELL_EVALUATE,
                sender="scan_runner",
                recipient="solver",
                payload={"task": task},
            )
            response = await self.broker.request(message, timeout=self.timeout)
        if response is None:
            return CellOutcome.failed(task.row, task.col, "solver request timed out")
        if response.type == MessageType.ERROR or not response.payload.get("success"):
            return CellOutcome.failed(task.row, task.col, response.payload.get("error", "solver error"))
        return response.payload["outcome"]

    async def run(
        self,
        tasks: Sequence[CellTask],
        on_outcome: Optional[OutcomeCallback] = None,
    ) -> List[CellOutcome]:
        if self.size == 0:
            raise RuntimeError("no solver agents registered with the broker")
        logger.debug(f"Dispatching {len(tasks)} cells to {self.size} solver agents")

        slots = asyncio.Semaphore(self.size)
        pending = [asyncio.create_task(self._evaluate(task, slots)) for task in tasks]
        outcomes = []
        for finished in asyncio.as_completed(pending):
            outcome = await finished
            outcomes.append(outcome)
            if on_outcome:
                await on_outcome(outcome)
        return outcomes


@asynccontextmanager
async def solver_pool(
    size: int,
    timeout: Optional[float] = 600.0,
    with_analysis: bool = False,
    processes: bool = True,
) -> AsyncIterator[AgentPoolRunner]:
    """
    Register and start `size` SolverAgents (plus an AnalysisAgent if asked).

    With processes=False the agents evaluate cells in worker threads of the
    event loop's process instead of worker processes.
    """
    if size < 1:
        raise ValueError(f"pool size must be at least 1, got {size}")
    executor = ProcessPoolExecutor(max_workers=size) if processes else None
    broker = MessageBroker()
    agents = [SolverAgent(index, executor) for index in range(size)]
    if with_analysis:
        agents.append(AnalysisAgent())
    for agent in agents:
        broker.register_agent(agent)
    await asyncio.gather(*(agent.start() for agent in agents))
    logger.info(f"Solver pool up with {size} agents ({'processes' if processes else 'threads'})")
    try:
        yield AgentPoolRunner(broker, timeout)
    finally:
        await asyncio.gather(*(agent.stop() for agent in agents))
        for agent in agents:
            broker.unregister_agent(agent.agent_id)
        if executor is not None:
            await asyncio.to_thread(executor.shutdown, wait=True, cancel_futures=True)
        logger.info("Solver pool down")
