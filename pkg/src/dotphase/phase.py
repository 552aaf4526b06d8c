"""
Kinematic geometric phase of the reduced qubit state along a trajectory.

The connection term ``i * integral <phi|d phi/dt> dt`` is discretised as a sum
of overlap arguments, ``-sum Arg <phi(t_i)|phi(t_i+1)>``, which is exact for
the piecewise-geodesic path through the samples and insensitive to how each
eigenvector's phase was fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import PhaseTrace, Trajectory, bloch_arrays
from .errors import DegenerateStart, DegenerateState, NonUnitWeight
from .spectral import EPS_DEGEN, decompose_arrays

PURE_START_TOL = 1e-12


@dataclass(frozen=True)
class PhaseConfig:
    """Controls for phase accumulation and saturation detection.

    Parameters
    ----------
    eps_degen : float
        Gap below which eigenvectors are considered undefined.
    freeze_gap : float
        Once the gap first drops below this value the phase is held constant.
    saturation_window : float
        Length (in 1/s1) of the sliding window used by :func:`detect_cgp`.
    saturation_tol : float
        Maximum spread of the phase inside every window after saturation.
    """

    eps_degen: float = EPS_DEGEN
    freeze_gap: float = 1e-6
    saturation_window: float = 5.0
    saturation_tol: float = 1e-4

    def __post_init__(self):
        for name in ("eps_degen", "freeze_gap", "saturation_window", "saturation_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.freeze_gap < self.eps_degen:
            raise ValueError("freeze_gap must be >= eps_degen")

    def replace(self, **changes) -> "PhaseConfig":
        fields = self.as_dict()
        fields.update(changes)
        return PhaseConfig(**fields)

    def as_dict(self) -> dict:
        return dict(
            eps_degen=self.eps_degen,
            freeze_gap=self.freeze_gap,
            saturation_window=self.saturation_window,
            saturation_tol=self.saturation_tol,
        )


@dataclass(frozen=True)
class CGP:
    """Saturated (characteristic) geometric phase and the time it settled."""

    value: float
    t_sat: float


@dataclass(frozen=True)
class NotSaturated:
    """Returned by :func:`detect_cgp` when no plateau is found before the trace ends."""

    last_gamma: float
    t_end: float


def _as_trajectory(trajectory) -> Trajectory:
    if isinstance(trajectory, Trajectory):
        return trajectory
    return Trajectory.from_pairs(trajectory)


def overlaps(phi: np.ndarray) -> np.ndarray:
    """``<phi_i|phi_{i+1}>`` for consecutive rows of an ``(n, 2)`` array."""
    return np.einsum("ij,ij->i", phi[:-1].conj(), phi[1:])


def wrap_phase(x):
    """Map angles into (-pi, pi]."""
    y = np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)
    return float(y) if np.ndim(y) == 0 else y


def mod_2pi(x):
    """Map angles into [0, 2*pi), the usual display range."""
    y = np.mod(np.asarray(x, dtype=float), 2 * np.pi)
    return float(y) if np.ndim(y) == 0 else y


def accumulate(trajectory, cfg: PhaseConfig = PhaseConfig()) -> PhaseTrace:
    """Unwrapped geometric phase of the dominant eigenvector along ``trajectory``.

    Valid when the initial reduced state is pure, so only the dominant
    eigenvector carries weight. Accumulation stops at the first sample whose
    spectral gap is below ``cfg.freeze_gap`` and the phase is held there.

    Raises
    ------
    DegenerateStart
        If the gap at t=0 is already below ``cfg.freeze_gap``.
    NonUnitWeight
        If the initial state is mixed (``omega2(0) > 1e-12``); use
        :func:`full_phase` instead.
    """
    traj = _as_trajectory(trajectory)
    r11, r12 = traj.reduced()
    w1, w2, phi1, _ = decompose_arrays(r11, r12)
    gap = w1 - w2

    if gap[0] < cfg.freeze_gap:
        raise DegenerateStart(f"initial spectral gap {gap[0]:.3e} below freeze_gap")
    if w2[0] > PURE_START_TOL:
        raise NonUnitWeight(
            f"initial state is mixed (omega2={w2[0]:.3e}); use full_phase for mixed starts"
        )

    below = np.flatnonzero(gap < cfg.freeze_gap)
    stop = int(below[0]) if below.size else len(gap)
    frozen_at = float(traj.times[stop]) if below.size else None

    steps = np.zeros(len(gap) - 1)
    if stop > 1:
        steps[: stop - 1] = -np.angle(overlaps(phi1[:stop]))
    gamma = np.concatenate([[0.0], np.cumsum(steps)])

    return PhaseTrace(
        t=traj.times.copy(),
        bloch=bloch_arrays(r11, r12),
        omega1=w1,
        gamma=gamma,
        frozen_at=frozen_at,
    )


def pancharatnam_phase(phi: np.ndarray) -> float:
    """Gauge-invariant phase of a discrete path of states, in (-pi, pi].

    Equal to ``Arg[<phi_0|phi_N> * prod_i <phi_{i+1}|phi_i>]``; evaluated as a
    sum of arguments to avoid underflow of long products.
    """
    phi = np.asarray(phi, dtype=complex)
    closing = np.vdot(phi[0], phi[-1])
    return wrap_phase(np.angle(closing) - np.sum(np.angle(overlaps(phi))))


def full_phase(trajectory, cfg: PhaseConfig = PhaseConfig()) -> float:
    """Two-eigenvector mixed-state geometric phase at the end of ``trajectory``.

    Evaluates ``Arg sum_k sqrt(w_k(0) w_k(T)) <phi_k(0)|phi_k(T)> exp(-i sum_i Arg<phi_k(t_i)|phi_k(t_i+1)>)``,
    returning a value in (-pi, pi].

    Raises
    ------
    DegenerateState
        If the spectral gap falls below ``cfg.eps_degen`` anywhere on the path.
    """
    traj = _as_trajectory(trajectory)
    r11, r12 = traj.reduced()
    w1, w2, phi1, phi2 = decompose_arrays(r11, r12)
    gap = w1 - w2
    if np.any(gap < cfg.eps_degen):
        i = int(np.argmax(gap < cfg.eps_degen))
        raise DegenerateState(f"spectral gap {gap[i]:.3e} at t={traj.times[i]:g}")

    total = 0j
    for w, phi in ((w1, phi1), (w2, phi2)):
        weight = math.sqrt(max(w[0], 0.0) * max(w[-1], 0.0))
        dynamic = np.sum(np.angle(overlaps(phi)))
        total += weight * np.vdot(phi[0], phi[-1]) * np.exp(-1j * dynamic)
    if total == 0:
        return 0.0
    return wrap_phase(np.angle(total))


def _window_range(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """max - min of ``values[lo[j]:hi[j]+1]`` for each j, via a sparse table."""
    n = len(values)
    levels_max, levels_min = [values], [values]
    width = 1
    while 2 * width <= n:
        prev_max, prev_min = levels_max[-1], levels_min[-1]
        levels_max.append(np.maximum(prev_max[:-width], prev_max[width:]))
        levels_min.append(np.minimum(prev_min[:-width], prev_min[width:]))
        width *= 2
    length = hi - lo + 1
    k = np.floor(np.log2(length)).astype(int)
    out = np.empty(len(lo))
    for level in np.unique(k):
        sel = k == level
        a, b = lo[sel], hi[sel] - (1 << level) + 1
        vmax = np.maximum(levels_max[level][a], levels_max[level][b])
        vmin = np.minimum(levels_min[level][a], levels_min[level][b])
        out[sel] = vmax - vmin
    return out


def detect_cgp(trace: PhaseTrace, cfg: PhaseConfig = PhaseConfig()) -> CGP | NotSaturated:
    """Find where the accumulated phase settles onto its characteristic value.

    ``t_sat`` is the earliest sample time such that every window of length
    ``cfg.saturation_window`` starting at a later sample (and ending inside
    the trace) has a phase spread below ``cfg.saturation_tol``. The CGP is the
    phase at the end of the trace.
    """
    t, gamma = np.asarray(trace.t), np.asarray(trace.gamma)
    if len(t) == 0:
        raise ValueError("empty trace")
    W = cfg.saturation_window
    slack = 1e-9 * max(1.0, abs(t[-1]))
    n_valid = int(np.searchsorted(t, t[-1] - W + slack, side="right"))
    if n_valid == 0:
        return NotSaturated(float(gamma[-1]), float(t[-1]))

    lo = np.arange(n_valid)
    hi = np.searchsorted(t, t[:n_valid] + W + slack, side="right") - 1
    spread = _window_range(gamma, lo, hi)
    bad = np.flatnonzero(spread >= cfg.saturation_tol)
    first = int(bad[-1]) + 1 if bad.size else 0
    if first >= n_valid:
        return NotSaturated(float(gamma[-1]), float(t[-1]))
    return CGP(value=float(gamma[-1]), t_sat=float(t[first]))
