"""
Tests for the Agents and the Broker

Capability routing over the solver pool, the solver and analysis handlers,
their error payloads, and the events fits publish.
"""

import pytest

from core.agent_base import AgentMessage, MessageType
from core.event_bus import EventBus, EventType
from models.drive import DriveSpec
from models.scan import CellKind, CellTask
from tests.conftest import reference_payload


# ==============================================================================
# HELPER FUNCTION
# ==============================================================================

def message(message_type: MessageType, recipient: str, payload) -> AgentMessage:
    return AgentMessage(type=message_type, sender="test", recipient=recipient, payload=payload)


def one_tone_task(reference_params, settings, col: int, f_GHz: float) -> CellTask:
    return CellTask(
        kind=CellKind.ONE_TONE,
        row=0,
        col=col,
        params=reference_params,
        settings=settings,
        drive=DriveSpec.single(f_GHz, 0.01),
        target_GHz=f_GHz,
    )


# ==============================================================================
# BROKER ROUTING
# ==============================================================================

class TestBrokerRouting:

    @pytest.mark.asyncio
    async def test_cells_spread_round_robin(self, all_agents, reference_params, fast_settings):
        """
        SCENARIO: Four cells sent to the solver capability
        GIVEN: a pool of two solver agents
        WHEN: the cells are requested one after another
        THEN: each agent evaluates two of them
        """
        broker = all_agents["broker"]
        for col, f in enumerate((4.69, 4.70, 4.71, 4.72)):
            response = await broker.request(
                message(MessageType.CELL_EVALUATE, "solver", {"task": one_tone_task(reference_params, fast_settings, col, f)}),
                timeout=30.0,
            )
            assert response.payload["success"]
            outcome = response.payload["outcome"]
            assert outcome.col == col
            assert outcome.converged

        assert [agent.cells_evaluated for agent in all_agents["solvers"]] == [2, 2]

    @pytest.mark.asyncio
    async def test_direct_recipient_bypasses_round_robin(self, all_agents, reference_params, fast_settings):
        broker = all_agents["broker"]
        for col in range(2):
            await broker.request(
                message(
                    MessageType.CELL_EVALUATE,
                    "solver_agent_1",
                    {"task": one_tone_task(reference_params, fast_settings, col, 4.70)},
                ),
                timeout=30.0,
            )
        assert [agent.cells_evaluated for agent in all_agents["solvers"]] == [0, 2]

    @pytest.mark.asyncio
    async def test_busy_agent_is_passed_over(self, all_agents, reference_params, fast_settings):
        broker = all_agents["broker"]
        first, second = all_agents["solvers"]
        first._busy = True
        assert not first.is_idle and second.is_idle

        for col, f in enumerate((4.70, 4.71)):
            response = await broker.request(
                message(MessageType.CELL_EVALUATE, "solver", {"task": one_tone_task(reference_params, fast_settings, col, f)}),
                timeout=30.0,
            )
            assert response.payload["success"]

        assert [first.cells_evaluated, second.cells_evaluated] == [0, 2]

    @pytest.mark.asyncio
    async def test_request_without_handler_times_out(self, message_broker):
        response = await message_broker.request(message(MessageType.STEADY_STATE, "solver", {}), timeout=0.2)
        assert response is None
        assert message_broker.get_stats()["pending_requests"] == 0

    @pytest.mark.asyncio
    async def test_unregister_drops_capabilities(self, all_agents):
        broker = all_agents["broker"]
        broker.unregister_agent("solver_agent_0")
        assert [a.agent_id for a in broker.get_capable_agents(MessageType.CELL_EVALUATE)] == ["solver_agent_1"]

    @pytest.mark.asyncio
    async def test_message_log_records_payload_keys_only(self, all_agents):
        broker = all_agents["broker"]
        await broker.request(message(MessageType.DERIVED_COMPUTE, "analysis_agent", {"circuit": reference_payload()}))
        entry = broker.get_message_log(limit=2)[0]["message"]
        assert entry["type"] == "derived_compute"
        assert entry["payload_keys"] == ["circuit"]


# ==============================================================================
# SOLVER AGENT
# ==============================================================================

class TestSolverAgent:

    @pytest.mark.asyncio
    async def test_bad_cell_payload(self, message_broker, solver_agent):
        response = await message_broker.request(
            message(MessageType.CELL_EVALUATE, "solver_agent_0", {"task": {"row": 0}}),
            timeout=5.0,
        )
        assert response.type == MessageType.ERROR
        assert response.payload["error_type"] == "TypeError"
        assert solver_agent.cells_evaluated == 0
        assert solver_agent.is_running

    @pytest.mark.asyncio
    async def test_steady_state(self, message_broker, solver_agent):
        response = await message_broker.request(
            message(
                MessageType.STEADY_STATE,
                "solver",
                {"circuit": reference_payload(), "tone": {"f_GHz": 4.715596, "P_aW": 0.01}},
            ),
            timeout=30.0,
        )
        assert response.type == MessageType.RESPONSE
        result = response.payload["result"]
        assert result["T"] == pytest.approx((24 / 27) ** 2, rel=1e-3)
        assert result["P_aW"] == 0.01
        assert solver_agent.processed_count == 1

    @pytest.mark.asyncio
    async def test_steady_state_invalid_circuit(self, message_broker, solver_agent):
        response = await message_broker.request(
            message(
                MessageType.STEADY_STATE,
                "solver",
                {"circuit": reference_payload(kappa_c_MHz=0.0), "tone": {"f_GHz": 4.7, "P_aW": 1.0}},
            ),
            timeout=5.0,
        )
        assert response.type == MessageType.ERROR
        assert response.payload["error_type"] == "ValidationError"


# ==============================================================================
# ANALYSIS AGENT
# ==============================================================================

class TestAnalysisAgent:

    @pytest.mark.asyncio
    async def test_spectrum(self, message_broker, analysis_agent):
        response = await message_broker.request(
            message(MessageType.SPECTRUM_COMPUTE, "analysis_agent", {"circuit": reference_payload(), "n_levels": 5})
        )
        spectrum = response.payload["spectrum"]
        assert len(spectrum["exact"]["energies_GHz"]) == 5
        assert spectrum["charge_dispersion_GHz"] < 1e-3

    @pytest.mark.asyncio
    async def test_lines_need_a_two_sided_window(self, message_broker, analysis_agent):
        response = await message_broker.request(
            message(MessageType.LINES_COMPUTE, "analysis_agent", {"circuit": reference_payload(), "window_GHz": [4.2]})
        )
        assert response.type == MessageType.ERROR
        assert response.payload["error_type"] == "DomainError"

    @pytest.mark.asyncio
    async def test_default_lines(self, message_broker, analysis_agent):
        response = await message_broker.request(
            message(
                MessageType.LINES_COMPUTE,
                "analysis_agent",
                {"circuit": reference_payload(), "window_GHz": [4.2, 5.1], "n_points": 5},
            )
        )
        labels = [line["label"] for line in response.payload["lines"]]
        assert labels == ["1f1+0f2=E1-E0", "1f1+0f2=E2-E1", "1f1+1f2=E2-E0", "2f1+1f2=E3-E0"]

    @pytest.mark.asyncio
    async def test_fit_publishes_event(self, message_broker, analysis_agent):
        """
        SCENARIO: A flux-arc fit through the broker
        GIVEN: a subscriber to FIT_COMPLETED
        WHEN: the fit succeeds
        THEN: the subscriber sees the fit kind and the scalar estimates
        """
        received = []
        EventBus().subscribe(EventType.FIT_COMPLETED, received.append)

        points = [[0.0, 4.7156], [0.1, 4.5916], [0.2, 4.2123], [0.3, 3.5476], [0.4, 2.4926]]
        response = await message_broker.request(
            message(MessageType.FIT_FLUX_ARC, "analysis_agent", {"points": points, "Ec_GHz": 0.29})
        )

        assert response.payload["success"]
        assert len(received) == 1
        assert received[0].data["fit"] == "flux_arc"
        assert received[0].data["EJ_max"] == pytest.approx(10.8, rel=1e-4)

    @pytest.mark.asyncio
    async def test_missing_field(self, message_broker, analysis_agent):
        response = await message_broker.request(
            message(MessageType.FIT_LORENTZIAN, "analysis_agent", {"x": [4.7, 4.71]})
        )
        assert response.type == MessageType.ERROR
        assert "missing field" in response.payload["error"]
        assert EventBus().get_history(EventType.FIT_COMPLETED) == []
