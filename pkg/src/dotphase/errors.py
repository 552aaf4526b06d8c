"""Exception types raised by the simulator."""


class DotPhaseError(Exception):
    """Base class for all simulator errors."""


class StabilityGuardViolated(DotPhaseError, ValueError):
    """Time step too large for the fixed-step RK4 stability guard."""


class InvariantDrift(DotPhaseError, RuntimeError):
    """Trace of the environment density matrix drifted during integration."""


class DegenerateState(DotPhaseError, ValueError):
    """Reduced density matrix too close to degenerate for eigenvectors."""


class DegenerateStart(DegenerateState):
    """Trajectory starts at (or next to) the maximally mixed state."""


class NonUnitWeight(DotPhaseError, ValueError):
    """Initial state is mixed, so the single-eigenvector phase formula does not apply."""
