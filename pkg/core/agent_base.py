"""
Agent Base Module - Foundation of the Agent-Based Architecture

An agent is an autonomous worker that:
1. Owns an inbox and processes one message at a time
2. Talks to other components only through the MessageBroker
3. Registers a handler per message type it understands

Key pieces:
- AgentMessage: the structured envelope exchanged through the broker
- MessageType: every operation an agent can be asked to perform
- Agent: abstract base class holding the inbox loop and lifecycle

Because an agent handles its inbox sequentially, N solver agents bound the
number of cells computed at once to N. Numerical handlers run in a process
executor or a worker thread so the event loop stays responsive.
"""

import asyncio
import logging
import uuid
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)


class MessageType(Enum):
    """
    Every operation routed through the broker.

    Each value names one command; capability-based routing picks the agent
    that registered it.
    """

    # Solver operations (SolverAgent)
    CELL_EVALUATE = "cell_evaluate"
    STEADY_STATE = "steady_state"

    # Analysis operations (AnalysisAgent)
    SPECTRUM_COMPUTE = "spectrum_compute"
    DERIVED_COMPUTE = "derived_compute"
    LINES_COMPUTE = "lines_compute"
    FIT_LORENTZIAN = "fit_lorentzian"
    FIT_FLUX_ARC = "fit_flux_arc"

    # Replies
    RESPONSE = "response"
    ERROR = "error"


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class AgentMessage:
    """
    A message passed between agents.

    Fields:
    - id: unique identifier, used to correlate the response
    - type: the operation (MessageType)
    - sender / recipient: agent ids; recipient may be a capability-routed
      placeholder such as "solver"
    - payload: operation arguments or results
    - correlation_id: on responses, the id of the request answered
    """

    type: MessageType
    sender: str
    recipient: str
    payload: Dict[str, Any]
    id: str = field(default_factory=lambda: str(uuid.uuid4()))
    correlation_id: Optional[str] = None
    timestamp: datetime = field(default_factory=utc_now)

    def to_dict(self) -> Dict[str, Any]:
        """Convert message to a dictionary for logging.

        Payloads may hold numpy arrays or model objects, so only their keys
        are recorded.
        """
        return {
            "id": self.id,
            "type": self.type.value,
            "sender": self.sender,
            "recipient": self.recipient,
            "payload_keys": sorted(self.payload.keys()),
            "correlation_id": self.correlation_id,
            "timestamp": self.timestamp.isoformat()
        }

    def create_response(self, payload: Dict[str, Any], success: bool = True) -> 'AgentMessage':
        """A response correlated to this message, addressed back to its sender."""
        return AgentMessage(
            type=MessageType.RESPONSE if success else MessageType.ERROR,
            sender=self.recipient,
            recipient=self.sender,
            payload=payload,
            correlation_id=self.id
        )


def error_payload(error: Exception) -> Dict[str, Any]:
    """Uniform failure payload returned by every agent."""
    return {"success": False, "error": str(error), "error_type": type(error).__name__}


class Agent(ABC):
    """
    Abstract base class for all agents.

    Lifecycle: start() spawns the inbox loop and calls on_start(); stop()
    cancels it and calls on_stop(). Subclasses register handlers in
    __init__ and declare them through get_capabilities().
    """

    def __init__(self, agent_id: str, name: str):
        self.agent_id = agent_id
        self.name = name
        self._message_queue: asyncio.Queue = asyncio.Queue()
        self._handlers: Dict[MessageType, Callable] = {}
        self._running = False
        self._busy = False
        self._task: Optional[asyncio.Task] = None
        self._message_broker = None  # injected by MessageBroker.register_agent
        self.processed_count = 0

        logger.info(f"Agent initialized: {self.name} ({self.agent_id})")

    def register_handler(self, message_type: MessageType, handler: Callable):
        self._handlers[message_type] = handler
        logger.debug(f"Handler registered: {message_type.value} -> {handler.__name__}")

    async def receive_message(self, message: AgentMessage):
        """Queue a message in this agent's inbox (FIFO)."""
        await self._message_queue.put(message)
        logger.debug(f"{self.name} received message: {message.type.value}")

    async def send_message(self, message: AgentMessage):
        """Send a message through the broker; agents never call each other directly."""
        if self._message_broker:
            await self._message_broker.route_message(message)
        else:
            logger.error(f"{self.name}: No message broker configured!")

    async def _process_messages(self):
        """
        Inbox loop: wait for a message, run its handler, send back the result.

        A failing handler produces an error response; it never ends the loop.
        """
        while self._running:
            try:
                try:
                    message = await asyncio.wait_for(
                        self._message_queue.get(),
                        timeout=1.0
                    )
                except asyncio.TimeoutError:
                    continue

                handler = self._handlers.get(message.type)
                if handler:
                    self._busy = True
                    try:
                        result = await handler(message)
                        self.processed_count += 1
                        if result and isinstance(result, AgentMessage):
                            await self.send_message(result)
                    except Exception as e:
                        logger.error(f"Handler error in {self.name}: {e}")
                        await self.send_message(
                            message.create_response(error_payload(e), success=False)
                        )
                    finally:
                        self._busy = False
                else:
                    logger.warning(f"{self.name}: No handler for {message.type.value}")

            except Exception as e:
                logger.error(f"Message processing error in {self.name}: {e}")

    async def start(self):
        if not self._running:
            self._running = True
            self._task = asyncio.create_task(self._process_messages())
            await self.on_start()
            logger.info(f"Agent started: {self.name}")

    async def stop(self):
        if self._running:
            self._running = False
            if self._task:
                self._task.cancel()
                try:
                    await self._task
                except asyncio.CancelledError:
                    pass
            await self.on_stop()
            logger.info(f"Agent stopped: {self.name}")

    @property
    def is_running(self) -> bool:
        return self._running

    @property
    def is_idle(self) -> bool:
        """Running, not inside a handler, and nothing queued."""
        return self._running and not self._busy and self._message_queue.empty()

    @abstractmethod
    async def on_start(self):
        """Called when the agent starts."""
        pass

    @abstractmethod
    async def on_stop(self):
        """Called when the agent stops."""
        pass

    @abstractmethod
    def get_capabilities(self) -> List[MessageType]:
        """Message types this agent handles."""
        pass
