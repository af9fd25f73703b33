"""
Simulation Errors

Every failure raised by the numerical modules derives from SimulationError so
agents and the CLI can map it to a response or an exit status without
inspecting messages.
"""


class SimulationError(Exception):
    """Base class for all simulator failures."""


class DomainError(SimulationError, ValueError):
    """An input lies outside the domain of a closed-form relation."""


class TransmonValidityError(DomainError):
    """EJ(flux)/Ec dropped to 1 or below, outside the transmon regime."""


class SingularLiouvillianError(SimulationError):
    """The Lindblad generator with trace constraint could not be solved."""


class StiffnessError(SimulationError):
    """The adaptive integrator underflowed its step size."""


class WindowTooShortError(SimulationError):
    """A trajectory does not cover the requested demodulation window."""


class NoPeakFoundError(SimulationError):
    """No probe resonance rises above the prominence threshold."""


class FitConvergenceError(SimulationError):
    """The least-squares optimizer stopped without converging."""


class InsufficientSpanError(SimulationError):
    """A trace or point set does not span enough of the model to be fitted."""


class DegenerateGeometryError(SimulationError):
    """Flux points carry no information to separate the fit parameters."""
