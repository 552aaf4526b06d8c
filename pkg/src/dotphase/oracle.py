"""
Closed-form solution of the isolated qubit (s2 == s1).

With the detector dot decoupled the reduced state obeys

    d rho11/dt = -i s1 (rho12 - rho21)
    d rho12/dt = -i eps0 rho12 - i s1 (rho11 - rho22)

which is von Neumann evolution under H = [[eps0/2, -s1], [-s1, -eps0/2]].
Note the sign of the tunnelling element: it is what the rate equations imply,
and it makes ``rho12`` come out with the same sign as the integrator.
"""

from __future__ import annotations

import math

import numpy as np

from .domain import ReducedDensity, SystemParams


def splitting(params: SystemParams) -> float:
    """Level splitting sqrt(eps0^2 + 4 s1^2)."""
    return math.hypot(params.eps0, 2.0 * params.s1)


def closed_state_arrays(t, params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`closed_state`, returning ``(r11, r12)`` arrays."""
    t = np.asarray(t, dtype=float)
    dE = splitting(params)
    if dE == 0.0:
        return np.ones_like(t), np.zeros_like(t, dtype=complex)
    # H = (dE/2) n.sigma with n = (-2 s1, 0, eps0) / dE
    nx, nz = -2.0 * params.s1 / dE, params.eps0 / dE
    theta = 0.5 * dE * t
    c, s = np.cos(theta), np.sin(theta)
    # psi = exp(-iHt)|1> = (c - i s nz, -i s nx)
    psi1 = c - 1j * s * nz
    psi2 = -1j * s * nx
    r11 = np.abs(psi1) ** 2
    r12 = psi1 * np.conj(psi2)
    return r11, r12


def closed_state(t: float, params: SystemParams) -> ReducedDensity:
    """Pure-state reduced density matrix at time ``t`` starting from QD1."""
    r11, r12 = closed_state_arrays(t, params)
    return ReducedDensity(float(r11), complex(r12))


def closed_period(params: SystemParams) -> float:
    """Revival time 2*pi / sqrt(eps0^2 + 4 s1^2) of the isolated qubit."""
    if not params.s1 > 0:
        raise ValueError("closed_period needs s1 > 0")
    return 2.0 * math.pi / splitting(params)


def closed_loop_phase(params: SystemParams) -> float:
    """Geometric phase after one revival period of the isolated qubit.

    The Bloch vector sweeps a cone about the field axis; the phase is minus
    half the enclosed solid angle, ``pi * (1 - |eps0| / dE)`` in magnitude.
    The sign follows the orientation of the loop: positive for eps0 < 0,
    negative for eps0 > 0. At eps0 == 0 the loop is a great circle through
    both poles and the branch +pi is returned.
    """
    if not params.s1 > 0:
        raise ValueError("closed_loop_phase needs s1 > 0")
    magnitude = math.pi * (1.0 - abs(params.eps0) / splitting(params))
    return -magnitude if params.eps0 > 0 else magnitude
