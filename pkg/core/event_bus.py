"""
Event Bus Module - Scan Progress Distribution

The Message Broker carries requests between agents; the Event Bus carries
one-way notifications about what happened during a run. Scans publish
progress here, and anything interested (the CLI manifest writer, the
service's stats endpoint, a test) subscribes without the scan knowing who
is listening.

Subscribers register per event type. Every cell event carries the id of its
scan, so the history can be read back one map at a time.
"""

import asyncio
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)


class EventType(Enum):
    """Kinds of run events."""

    # Scan lifecycle
    SCAN_STARTED = "scan_started"
    SCAN_FINISHED = "scan_finished"

    # Per cell
    CELL_COMPLETED = "cell_completed"
    CELL_FAILED = "cell_failed"
    TRUNCATION_ESCALATED = "truncation_escalated"

    # Analysis
    FIT_COMPLETED = "fit_completed"


@dataclass
class Event:
    """
    An immutable record of something that happened during a run.

    scan_id ties cell events to the map they belong to; it stays None for
    events outside a scan such as fits.
    """

    event_type: EventType
    data: Dict[str, Any]
    scan_id: Optional[str] = None
    timestamp: datetime = field(default_factory=lambda: datetime.now(timezone.utc))


class EventBus:
    """
    In-memory publish/subscribe hub (singleton).

    Callbacks may be plain functions or coroutines. A failing callback is
    logged and never stops delivery to the others.
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

        self._subscribers: Dict[EventType, List[Callable]] = {}

        # Recent events, for the stats endpoint and debugging
        self._event_history: List[Event] = []
        self._max_history = 1000

        self._initialized = True
        logger.info("EventBus initialized")

    def subscribe(
        self,
        event_type: EventType,
        callback: Callable[[Event], Any]
    ) -> Callable:
        """
        Subscribe to one event type. Returns an unsubscribe function:

            unsubscribe = event_bus.subscribe(EventType.CELL_FAILED, on_failure)
            ...
            unsubscribe()
        """
        self._subscribers.setdefault(event_type, []).append(callback)
        logger.debug(f"Subscribed to {event_type.value}: {callback}")

        def unsubscribe():
            if callback in self._subscribers.get(event_type, []):
                self._subscribers[event_type].remove(callback)
                logger.debug(f"Unsubscribed from {event_type.value}: {callback}")

        return unsubscribe

    async def publish(self, event: Event):
        self._event_history.append(event)
        if len(self._event_history) > self._max_history:
            self._event_history = self._event_history[-self._max_history:]

        logger.debug(f"Publishing event: {event.event_type.value} ({event.scan_id or 'no scan'})")

        for callback in list(self._subscribers.get(event.event_type, [])):
            try:
                if asyncio.iscoroutinefunction(callback):
                    await callback(event)
                else:
                    callback(event)
            except Exception as e:
                logger.error(f"Event callback error: {e}")

    def get_history(
        self,
        event_type: Optional[EventType] = None,
        scan_id: Optional[str] = None,
        limit: int = 50
    ) -> List[Event]:
        """Most recent events, optionally narrowed to one type and one scan."""
        events = self._event_history

        if event_type:
            events = [e for e in events if e.event_type == event_type]

        if scan_id:
            events = [e for e in events if e.scan_id == scan_id]

        return events[-limit:]

    def get_stats(self) -> Dict[str, Any]:
        scans = {e.scan_id for e in self._event_history if e.scan_id}
        return {
            "total_subscribers": sum(len(s) for s in self._subscribers.values()),
            "events_in_history": len(self._event_history),
            "scans_in_history": len(scans),
            "subscribers_by_type": {
                et.value: len(subs)
                for et, subs in self._subscribers.items()
            }
        }
