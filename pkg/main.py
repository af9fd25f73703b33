"""
Main Application Entry Point

Two ways in:

    python main.py <subcommand> --config run.yaml ...   command-line runs (cli/commands.py)
    uvicorn main:app  /  python main.py serve           HTTP service

Service layout:

    HTTP routes (api/routes.py)
            |
            v
    MessageBroker ---- capability routing, round-robin over the pool
        |                       |
        v                       v
    AnalysisAgent          SolverAgent x N
    (levels, lines, fits)  (steady states, scan cells)

The lifespan registers the agents with the broker, starts them, and stops
them on shutdown. Pool size comes from JJRES_THREADS.
"""

import logging
import sys
from contextlib import asynccontextmanager

from fastapi import FastAPI

from agents.analysis_agent import AnalysisAgent
from agents.solver_agent import SolverAgent
from api.routes import router
from cli.commands import LOG_FORMAT, main as cli_main
from core.config import get_settings
from core.message_broker import MessageBroker
from simulation import __version__

# Configure logging
logging.basicConfig(
    level=getattr(logging, get_settings().log_level.upper(), logging.INFO),
    format=LOG_FORMAT
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Start the broker and agents before serving; stop them afterwards."""
    settings = get_settings()
    logger.info("Starting resonator simulation service...")

    message_broker = MessageBroker()
    agents = [AnalysisAgent()] + [SolverAgent(index) for index in range(settings.threads)]
    for agent in agents:
        message_broker.register_agent(agent)

    await message_broker.start_all_agents()
    logger.info(f"Service ready with {settings.threads} solver agents")

    yield

    logger.info("Shutting down...")
    await message_broker.stop_all_agents()
    for agent in agents:
        message_broker.unregister_agent(agent.agent_id)
    logger.info("Shutdown complete.")


app = FastAPI(
    title="Josephson Junction Resonator Simulator",
    description="Spectra, driven steady states, conservation lines and lineshape fits "
                "for a SQUID-tuned single-junction resonator.",
    version=__version__,
    lifespan=lifespan
)

app.include_router(router, prefix="/api")


@app.get("/")
async def root():
    return {"service": "jjres", "version": __version__, "docs": "/docs"}


if __name__ == "__main__":
    sys.exit(cli_main(sys.argv[1:]))
