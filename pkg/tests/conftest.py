"""
Test Configuration and Fixtures

Shared setup for the simulator tests:

- device fixtures: the reference device and fast solver settings
- singleton resets: MessageBroker and EventBus start fresh for every test
- agent fixtures: analysis and solver agents registered with the broker
- an HTTP client talking to the FastAPI app in-process

Solver settings here keep Fock spaces small so two-tone cells finish in a
fraction of a second; physics assertions that need convergence build their
own settings.
"""

import pytest
import pytest_asyncio
from httpx import ASGITransport, AsyncClient

from agents.analysis_agent import AnalysisAgent
from agents.solver_agent import SolverAgent
from core.event_bus import EventBus
from core.message_broker import MessageBroker
from main import app
from models.circuit import CircuitParams
from models.solver import SolverSettings


@pytest.fixture(autouse=True)
def fresh_singletons():
    """Every test sees an empty broker registry and event history."""
    MessageBroker.reset()
    EventBus._instance = None
    yield
    MessageBroker.reset()
    EventBus._instance = None


@pytest.fixture
def reference_params():
    """The reference device: EJ_max 10.8 GHz, Ec 0.29 GHz, 12 MHz ports, 3 MHz loss."""
    return CircuitParams(EJ_max_GHz=10.8, Ec_GHz=0.29, kappa_c_MHz=12.0, kappa_i_MHz=3.0)


@pytest.fixture
def fast_settings():
    """Small Fock space and short windows for map-level tests."""
    return SolverSettings(
        fock_dim=5,
        max_fock_dim=8,
        fock_step=3,
        transient_kappa_units=4.0,
        window_beats=2,
        samples_per_beat=16,
    )


@pytest_asyncio.fixture(scope="function")
async def message_broker():
    """A fresh broker; agents registered on it are stopped afterwards."""
    broker = MessageBroker()

    yield broker

    await broker.stop_all_agents()


@pytest_asyncio.fixture(scope="function")
async def analysis_agent(message_broker):
    agent = AnalysisAgent()
    message_broker.register_agent(agent)
    await agent.start()

    yield agent

    await agent.stop()


@pytest_asyncio.fixture(scope="function")
async def solver_agent(message_broker):
    agent = SolverAgent(0)
    message_broker.register_agent(agent)
    await agent.start()

    yield agent

    await agent.stop()


@pytest_asyncio.fixture(scope="function")
async def all_agents(message_broker):
    """One analysis agent and two solver agents, all started."""
    analysis = AnalysisAgent()
    solvers = [SolverAgent(0), SolverAgent(1)]

    for agent in [analysis, *solvers]:
        message_broker.register_agent(agent)

    await message_broker.start_all_agents()

    yield {
        "analysis": analysis,
        "solvers": solvers,
        "broker": message_broker,
    }

    await message_broker.stop_all_agents()


@pytest_asyncio.fixture(scope="function")
async def client(all_agents):
    """
    HTTP client bound to the app without a server.

    ASGITransport does not run the lifespan, so the agents come from the
    all_agents fixture instead.
    """
    async with AsyncClient(transport=ASGITransport(app=app), base_url="http://test") as client:
        yield client


def reference_payload(**overrides):
    """Circuit block of the reference device as JSON, with overrides."""
    data = {"EJ_max_GHz": 10.8, "Ec_GHz": 0.29, "kappa_c_MHz": 12.0, "kappa_i_MHz": 3.0}
    data.update(overrides)
    return data
