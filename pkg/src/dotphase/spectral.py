"""
Eigen-decomposition of the 2x2 reduced density matrix in a fixed gauge.

The eigenvectors follow the explicit column forms

    phi1 ~ (1, rho21 / (omega1 - rho22))     first component real >= 0
    phi2 ~ (rho12 / (omega2 - rho11), 1)     second component real >= 0

rewritten without the division so the same expression covers every
non-diagonal matrix. In Bloch terms phi1 = (cos(theta/2), e^{i phi} sin(theta/2)),
i.e. the gauge is singular only where the Bloch vector points along -z.
"""

from __future__ import annotations

import numpy as np

from .domain import ReducedDensity, SpectralDecomp
from .errors import DegenerateState

EPS_DEGEN = 1e-8
# |r12| below this is treated as exactly diagonal.
DIAGONAL_SNAP = 1e-14


def decompose_arrays(r11, r12):
    """Vectorised decomposition without degeneracy checks.

    Returns ``(omega1, omega2, phi1, phi2)`` where the eigenvector arrays have
    shape ``(..., 2)``. Degenerate inputs (gap == 0) fall through to the
    diagonal branch, so callers must check the gap themselves.
    """
    r11 = np.asarray(r11, dtype=float)
    r12 = np.asarray(r12, dtype=complex)
    d = 2.0 * r11 - 1.0  # rho11 - rho22
    mod2 = r12.real**2 + r12.imag**2
    gap = np.sqrt(d * d + 4.0 * mod2)
    omega1 = 0.5 * (1.0 + gap)
    omega2 = 1.0 - omega1

    # a = omega1 - rho22 = (d + gap)/2, evaluated without cancellation when d < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(d >= 0, 0.5 * (d + gap), 2.0 * mod2 / (gap - d))
        norm = np.sqrt(a * a + mod2)
        phi1 = np.stack([a / norm + 0j, np.conj(r12) / norm], axis=-1)
        phi2 = np.stack([-r12 / norm, a / norm + 0j], axis=-1)

    diag = np.abs(r12) < DIAGONAL_SNAP
    if np.any(diag):
        up = d >= 0
        e0 = np.array([1.0, 0.0], dtype=complex)
        e1 = np.array([0.0, 1.0], dtype=complex)
        phi1 = np.where(diag[..., None], np.where(up[..., None], e0, e1), phi1)
        phi2 = np.where(diag[..., None], np.where(up[..., None], e1, e0), phi2)
    return omega1, omega2, phi1, phi2


def decompose(rho: ReducedDensity, eps_degen: float = EPS_DEGEN) -> SpectralDecomp:
    """Eigenvalues ``omega1 >= omega2`` and gauge-fixed eigenvectors of ``rho``.

    Raises
    ------
    DegenerateState
        If ``omega1 - omega2 < eps_degen``.
    """
    if not eps_degen > 0:
        raise ValueError("eps_degen must be positive")
    w1, w2, p1, p2 = decompose_arrays(rho.r11, rho.r12)
    w1, w2 = float(w1), float(w2)
    if w1 - w2 < eps_degen:
        raise DegenerateState(f"spectral gap {w1 - w2:.3e} below {eps_degen:g}")
    return SpectralDecomp(omega1=w1, omega2=w2, phi1=p1.copy(), phi2=p2.copy())
