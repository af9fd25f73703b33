"""
Message Broker Module - Central Communication Hub

Agents never hold references to each other; they only know the broker.
The broker:
1. Registers agents and injects itself into them
2. Routes messages directly (by agent id) or by capability
3. Matches responses to pending requests (request/response on async messaging)
4. Keeps a bounded message log and statistics

Capability routing is round-robin: when several agents registered the same
message type (the solver pool), successive messages go to successive
agents, which spreads scan cells evenly over the pool. An agent that is
still working is passed over while another one sits idle.
"""

import asyncio
import logging
from typing import Any, Dict, List, Optional

from .agent_base import Agent, AgentMessage, MessageType, utc_now

logger = logging.getLogger(__name__)


class MessageBroker:
    """
    Central message routing and delivery system (singleton).

    Tests reset it with MessageBroker.reset() so each test gets a fresh
    registry.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return

        self._agents: Dict[str, Agent] = {}
        self._pending_requests: Dict[str, asyncio.Future] = {}
        self._message_log: List[Dict] = []
        self._max_log = 5000
        self._subscribers: Dict[MessageType, List[str]] = {}
        self._next_index: Dict[MessageType, int] = {}
        self._initialized = True

        logger.info("MessageBroker initialized")

    @classmethod
    def reset(cls):
        """Drop the singleton instance."""
        cls._instance = None

    def register_agent(self, agent: Agent):
        """Register an agent and subscribe it to its capabilities."""
        self._agents[agent.agent_id] = agent
        agent._message_broker = self

        for capability in agent.get_capabilities():
            subscribers = self._subscribers.setdefault(capability, [])
            if agent.agent_id not in subscribers:
                subscribers.append(agent.agent_id)

        logger.info(f"Agent registered: {agent.name} ({agent.agent_id})")
        logger.debug(f"Capabilities: {[c.value for c in agent.get_capabilities()]}")

    def unregister_agent(self, agent_id: str):
        if agent_id in self._agents:
            agent = self._agents[agent_id]
            for capability in agent.get_capabilities():
                if capability in self._subscribers:
                    self._subscribers[capability] = [
                        a for a in self._subscribers[capability] if a != agent_id
                    ]
            del self._agents[agent_id]
            logger.info(f"Agent unregistered: {agent_id}")

    def _log(self, message: AgentMessage):
        self._message_log.append({
            "timestamp": utc_now().isoformat(),
            "message": message.to_dict()
        })
        if len(self._message_log) > self._max_log:
            self._message_log = self._message_log[-self._max_log:]

    def _next_handler(self, message_type: MessageType) -> Optional[Agent]:
        """
        Round-robin over the agents subscribed to a message type, skipping
        agents that are busy while an idle one is available.
        """
        handlers = [a for a in self._subscribers.get(message_type, []) if a in self._agents]
        if not handlers:
            return None
        start = self._next_index.get(message_type, 0) % len(handlers)
        index = start
        for offset in range(len(handlers)):
            candidate = (start + offset) % len(handlers)
            if self._agents[handlers[candidate]].is_idle:
                index = candidate
                break
        self._next_index[message_type] = index + 1
        return self._agents[handlers[index]]

    async def route_message(self, message: AgentMessage):
        """
        Deliver a message:
        1. responses resolve their pending request
        2. a known agent id gets it directly
        3. otherwise the next capable agent gets it
        """
        self._log(message)
        logger.debug(f"Routing message: {message.type.value} from {message.sender} to {message.recipient}")

        if message.type in (MessageType.RESPONSE, MessageType.ERROR):
            if message.correlation_id and message.correlation_id in self._pending_requests:
                future = self._pending_requests.pop(message.correlation_id)
                if not future.done():
                    future.set_result(message)
                return

        if message.recipient in self._agents:
            await self._agents[message.recipient].receive_message(message)
            return

        agent = self._next_handler(message.type)
        if agent is not None:
            await agent.receive_message(message)
            return

        logger.warning(f"No handler found for message: {message.type.value}")

    async def request(
        self,
        message: AgentMessage,
        timeout: Optional[float] = 30.0
    ) -> Optional[AgentMessage]:
        """
        Send a request and wait for the correlated response.

        Returns None on timeout or routing failure; callers turn that into
        their own error (HTTP 500, flagged cell).
        """
        future = asyncio.get_running_loop().create_future()
        self._pending_requests[message.id] = future

        try:
            await self.route_message(message)
            return await asyncio.wait_for(future, timeout=timeout)

        except asyncio.TimeoutError:
            logger.error(f"Request timeout: {message.id}")
            self._pending_requests.pop(message.id, None)
            return None
        except Exception as e:
            logger.error(f"Request error: {e}")
            self._pending_requests.pop(message.id, None)
            return None

    async def start_all_agents(self):
        await asyncio.gather(*(agent.start() for agent in self._agents.values()))
        logger.info(f"Started {len(self._agents)} agents")

    async def stop_all_agents(self):
        await asyncio.gather(*(agent.stop() for agent in self._agents.values()))
        logger.info("All agents stopped")

    def get_capable_agents(self, message_type: MessageType) -> List[Agent]:
        return [self._agents[a] for a in self._subscribers.get(message_type, []) if a in self._agents]

    def get_message_log(self, limit: int = 100) -> List[Dict]:
        return self._message_log[-limit:]

    def get_stats(self) -> Dict[str, Any]:
        return {
            "total_agents": len(self._agents),
            "agents": list(self._agents.keys()),
            "pending_requests": len(self._pending_requests),
            "total_messages_processed": len(self._message_log),
            "subscribers": {
                msg_type.value: len(agents)
                for msg_type, agents in self._subscribers.items()
            }
        }
