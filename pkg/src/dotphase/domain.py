"""
Value records shared by every stage of the pipeline.

All energies are measured in units of the bare dot-dot coupling ``s1`` and all
times in units of ``1/s1``.

The environment density matrix lives on the four-state basis

    |1> = |1,0,0>   electron in QD1, QD0 empty
    |2> = |1,0,1>   electron in QD1, QD0 occupied
    |3> = |0,1,0>   electron in QD2, QD0 empty
    |4> = |0,1,1>   electron in QD2, QD0 occupied

where ``|n1,n2,n0>`` counts electrons in QD1, QD2 and the detector dot QD0.
Only the six elements that enter the dynamics are stored; the lower-triangle
coherences are their complex conjugates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

# Slack allowed on positivity / unit-ball checks.
EPS_NUM = 1e-9

# Layout of the flat real state vector used by the integrator.
FLAT_LABELS = ("p11", "p22", "p33", "p44", "re_c13", "im_c13", "re_c24", "im_c24")


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the double dot plus detector dot.

    Parameters
    ----------
    gamma_l : float
        Tunnelling rate from the left lead into QD0.
    gamma_r : float
        Tunnelling rate from QD0 into the right lead.
    s1 : float
        QD1-QD2 coupling while QD0 is empty. This is the unit of energy.
    s2 : float
        QD1-QD2 coupling while QD0 is occupied.
    eps0 : float
        Detuning E1 - E2.
    """

    gamma_l: float = 1.0
    gamma_r: float = 2.0
    s1: float = 1.0
    s2: float = 0.5
    eps0: float = -2.0

    def __post_init__(self):
        for name in ("gamma_l", "gamma_r", "s1", "s2", "eps0"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.gamma_l < 0 or self.gamma_r < 0:
            raise ValueError("tunnelling rates must be nonnegative")
        # s1 == 0 is allowed so that the fully decoupled generator can be built;
        # the closed-system oracle rejects it.
        if self.s1 < 0:
            raise ValueError("s1 must be nonnegative")

    def replace(self, **changes) -> "SystemParams":
        fields = dict(
            gamma_l=self.gamma_l, gamma_r=self.gamma_r, s1=self.s1, s2=self.s2, eps0=self.eps0
        )
        fields.update(changes)
        return SystemParams(**fields)

    def as_dict(self) -> dict:
        return dict(
            gamma_l=self.gamma_l, gamma_r=self.gamma_r, s1=self.s1, s2=self.s2, eps0=self.eps0
        )


REFERENCE_PARAMS = SystemParams(gamma_l=1.0, gamma_r=2.0, s1=1.0, s2=0.5, eps0=-2.0)


@dataclass(frozen=True)
class EnvDensityState:
    """The six independent elements of the 4x4 environment density matrix.

    Also used as the container for time derivatives, in which case the
    trace invariant does not apply.
    """

    p11: float = 1.0
    p22: float = 0.0
    p33: float = 0.0
    p44: float = 0.0
    c13: complex = 0j
    c24: complex = 0j

    @classmethod
    def initial(cls) -> "EnvDensityState":
        """Electron in QD1, detector dot empty."""
        return cls(1.0, 0.0, 0.0, 0.0, 0j, 0j)

    @classmethod
    def from_flat(cls, x) -> "EnvDensityState":
        x = np.asarray(x, dtype=float)
        if x.shape != (8,):
            raise ValueError(f"expected a flat state of shape (8,), got {x.shape}")
        return cls(
            float(x[0]), float(x[1]), float(x[2]), float(x[3]),
            complex(x[4], x[5]), complex(x[6], x[7]),
        )

    def to_flat(self) -> np.ndarray:
        c13, c24 = complex(self.c13), complex(self.c24)
        return np.array(
            [self.p11, self.p22, self.p33, self.p44, c13.real, c13.imag, c24.real, c24.imag]
        )

    @property
    def trace(self) -> float:
        return self.p11 + self.p22 + self.p33 + self.p44

    def matrix(self) -> np.ndarray:
        """Full 4x4 matrix, with the elements not coupled by the dynamics set to zero."""
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0], m[1, 1], m[2, 2], m[3, 3] = self.p11, self.p22, self.p33, self.p44
        m[0, 2], m[2, 0] = self.c13, np.conj(self.c13)
        m[1, 3], m[3, 1] = self.c24, np.conj(self.c24)
        return m

    def is_valid(self, eps: float = EPS_NUM) -> bool:
        pops = (self.p11, self.p22, self.p33, self.p44)
        return abs(self.trace - 1.0) <= eps and all(-eps <= p <= 1.0 + eps for p in pops)


@dataclass(frozen=True)
class ReducedDensity:
    """Qubit density matrix with rho22 = 1 - r11 and rho21 = conj(r12)."""

    r11: float
    r12: complex = 0j

    @property
    def r22(self) -> float:
        return 1.0 - self.r11

    @property
    def r21(self) -> complex:
        return complex(self.r12).conjugate()

    def matrix(self) -> np.ndarray:
        return np.array([[self.r11, self.r12], [self.r21, self.r22]], dtype=complex)

    def bloch_radius_sq(self) -> float:
        return (self.r11 - self.r22) ** 2 + 4.0 * abs(self.r12) ** 2

    def is_valid(self, eps: float = EPS_NUM) -> bool:
        return self.bloch_radius_sq() <= 1.0 + eps


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues ``omega1 >= omega2`` with their gauge-fixed eigenvectors."""

    omega1: float
    omega2: float
    phi1: np.ndarray
    phi2: np.ndarray

    @property
    def gap(self) -> float:
        return self.omega1 - self.omega2

    def reconstruct(self) -> np.ndarray:
        return self.omega1 * np.outer(self.phi1, self.phi1.conj()) + self.omega2 * np.outer(
            self.phi2, self.phi2.conj()
        )


@dataclass(frozen=True)
class Trajectory:
    """Sampled integrator output.

    ``states`` has shape ``(n, 8)`` in the flat layout of :data:`FLAT_LABELS`.
    """

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[1] != 8:
            raise ValueError("states must have shape (n, 8)")
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[tuple[float, EnvDensityState]]:
        for t, x in zip(self.times, self.states):
            yield float(t), EnvDensityState.from_flat(x)

    @classmethod
    def from_pairs(cls, pairs) -> "Trajectory":
        """Build from an iterable of ``(t, EnvDensityState)`` pairs."""
        pairs = list(pairs)
        if not pairs:
            raise ValueError("empty trajectory")
        times = np.array([float(t) for t, _ in pairs])
        states = np.array([s.to_flat() for _, s in pairs])
        return cls(times, states)

    @property
    def trace(self) -> np.ndarray:
        return self.states[:, :4].sum(axis=1)

    def reduced(self) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised :func:`reduce` over all samples, returning ``(r11, r12)``."""
        s = self.states
        r11 = s[:, 0] + s[:, 1]
        r12 = (s[:, 4] + s[:, 6]) + 1j * (s[:, 5] + s[:, 7])
        return r11, r12

    def bloch(self) -> np.ndarray:
        r11, r12 = self.reduced()
        return bloch_arrays(r11, r12)


@dataclass(frozen=True)
class PhaseTrace:
    """Accumulated (unwrapped) geometric phase along a trajectory.

    ``frozen_at`` is the time accumulation stopped because the spectral gap
    closed, or ``None`` if it never did.
    """

    t: np.ndarray
    bloch: np.ndarray
    omega1: np.ndarray
    gamma: np.ndarray
    frozen_at: float | None = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def samples(self) -> Iterator[tuple[float, BlochVector, float, float]]:
        for t, b, w, g in zip(self.t, self.bloch, self.omega1, self.gamma):
            yield float(t), BlochVector(*map(float, b)), float(w), float(g)

    @property
    def final_gamma(self) -> float:
        return float(self.gamma[-1])


def reduce(env: EnvDensityState) -> ReducedDensity:
    """Trace out the detector dot."""
    return ReducedDensity(r11=env.p11 + env.p22, r12=complex(env.c13) + complex(env.c24))


def bloch_arrays(r11, r12) -> np.ndarray:
    r11 = np.asarray(r11, dtype=float)
    r12 = np.asarray(r12, dtype=complex)
    # + 0.0 turns -0.0 into 0.0 so exported files stay sign-stable.
    return np.stack([2.0 * r12.real + 0.0, -2.0 * r12.imag + 0.0, 2.0 * r11 - 1.0 + 0.0], axis=-1)


def to_bloch(rho: ReducedDensity) -> BlochVector:
    """Bloch coordinates x = rho12 + rho21, y = i(rho12 - rho21), z = rho11 - rho22."""
    x, y, z = bloch_arrays(rho.r11, rho.r12)
    return BlochVector(float(x), float(y), float(z))
