"""Geometric phase of a double-quantum-dot charge qubit under nonunitary evolution."""

__version__ = "0.1.0"

from .domain import (  # noqa: E402
    EPS_NUM,
    REFERENCE_PARAMS,
    BlochVector,
    EnvDensityState,
    PhaseTrace,
    ReducedDensity,
    SpectralDecomp,
    SystemParams,
    Trajectory,
    reduce,
    to_bloch,
)
from .errors import (  # noqa: E402
    DegenerateStart,
    DegenerateState,
    DotPhaseError,
    InvariantDrift,
    NonUnitWeight,
    StabilityGuardViolated,
)
from .master_equation import IntegratorConfig, derivative, integrate, rk4_step  # noqa: E402
from .oracle import closed_loop_phase, closed_period, closed_state  # noqa: E402
from .phase import (  # noqa: E402
    CGP,
    NotSaturated,
    PhaseConfig,
    accumulate,
    detect_cgp,
    full_phase,
    pancharatnam_phase,
)
from .spectral import decompose  # noqa: E402
