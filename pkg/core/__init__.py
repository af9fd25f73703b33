# Core Agent Framework Module
# Base classes and infrastructure for the agent-based worker pool

from .agent_base import Agent, AgentMessage, MessageType, error_payload
from .message_broker import MessageBroker
from .event_bus import Event, EventBus, EventType
from .config import Settings, get_settings

__all__ = [
    'Agent', 'AgentMessage', 'MessageType', 'error_payload',
    'MessageBroker', 'Event', 'EventBus', 'EventType',
    'Settings', 'get_settings',
]
