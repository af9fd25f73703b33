# Agents Module
# Solver workers, the analysis agent, and the pool runner that ties scans to them

from .solver_agent import SolverAgent
from .analysis_agent import AnalysisAgent
from .pool import AgentPoolRunner, solver_pool

__all__ = ['SolverAgent', 'AnalysisAgent', 'AgentPoolRunner', 'solver_pool']
