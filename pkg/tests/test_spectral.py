import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dotphase import DegenerateState, IntegratorConfig, ReducedDensity, decompose, integrate
from dotphase.spectral import decompose_arrays


@st.composite
def reduced_states(draw):
    """Uniform-ish points of the Bloch ball kept clear of the degenerate centre."""
    r = draw(st.floats(1e-3, 1.0))
    theta = draw(st.floats(0.0, math.pi))
    phi = draw(st.floats(0.0, 2 * math.pi))
    x, y, z = r * math.sin(theta) * math.cos(phi), r * math.sin(theta) * math.sin(phi), r * math.cos(theta)
    return ReducedDensity((1 + z) / 2, complex(x, -y) / 2)


def test_pure_initial_state():
    s = decompose(ReducedDensity(1.0, 0j))
    assert (s.omega1, s.omega2) == (1.0, 0.0)
    np.testing.assert_array_equal(s.phi1, [1, 0])
    np.testing.assert_array_equal(s.phi2, [0, 1])


def test_plus_state():
    s = decompose(ReducedDensity(0.5, 0.5 + 0j))
    assert s.omega1 == pytest.approx(1.0)
    assert s.omega2 == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(s.phi1, np.array([1, 1]) / math.sqrt(2), atol=1e-15)


def test_maximally_mixed_is_degenerate():
    with pytest.raises(DegenerateState):
        decompose(ReducedDensity(0.5, 0j))


def test_diagonal_with_lower_level_dominant():
    s = decompose(ReducedDensity(0.2, 0j))
    assert s.omega1 == pytest.approx(0.8)
    np.testing.assert_array_equal(s.phi1, [0, 1])
    np.testing.assert_array_equal(s.phi2, [1, 0])


def test_near_diagonal_snaps():
    s = decompose(ReducedDensity(0.3, 1e-15 + 0j))
    np.testing.assert_array_equal(s.phi1, [0, 1])


@given(reduced_states())
def test_invariants(rho):
    s = decompose(rho)
    assert s.omega1 + s.omega2 == 1.0
    assert s.omega1 >= s.omega2
    assert abs(np.vdot(s.phi1, s.phi1) - 1) <= 1e-12
    assert abs(np.vdot(s.phi2, s.phi2) - 1) <= 1e-12
    assert abs(np.vdot(s.phi1, s.phi2)) <= 1e-12
    # gauge
    assert s.phi1[0].imag == 0 and s.phi1[0].real >= 0
    assert s.phi2[1].imag == 0 and s.phi2[1].real >= 0
    np.testing.assert_allclose(s.reconstruct(), rho.matrix(), atol=1e-12)


@given(reduced_states())
def test_against_numpy_eigh(rho):
    s = decompose(rho)
    w, v = np.linalg.eigh(rho.matrix())
    assert s.omega1 == pytest.approx(w[1], abs=1e-12)
    assert s.omega2 == pytest.approx(w[0], abs=1e-12)
    # same ray as the library eigenvector
    assert abs(abs(np.vdot(v[:, 1], s.phi1)) - 1) <= 1e-10


@given(reduced_states())
def test_deterministic(rho):
    a, b = decompose(rho), decompose(rho)
    assert a.omega1 == b.omega1
    assert np.array_equal(a.phi1, b.phi1) and np.array_equal(a.phi2, b.phi2)


def test_matches_printed_column_forms():
    rho = ReducedDensity(0.7, 0.2 - 0.1j)
    s = decompose(rho)
    phi1 = np.array([1, rho.r21 / (s.omega1 - rho.r22)])
    phi2 = np.array([rho.r12 / (s.omega2 - rho.r11), 1])
    np.testing.assert_allclose(s.phi1, phi1 / np.linalg.norm(phi1), atol=1e-14)
    np.testing.assert_allclose(s.phi2, phi2 / np.linalg.norm(phi2), atol=1e-14)


def test_small_coherence_with_lower_level_dominant_is_accurate():
    # omega1 - rho22 suffers cancellation here unless rewritten
    rho = ReducedDensity(0.25, 1e-9 + 0j)
    s = decompose(rho)
    np.testing.assert_allclose(s.reconstruct(), rho.matrix(), atol=1e-15)
    assert abs(np.vdot(s.phi1, s.phi2)) <= 1e-15


def test_eigenvectors_continuous_along_trajectory(reference):
    traj = integrate(None, reference, IntegratorConfig(dt=1e-3, t_max=30.0))
    r11, r12 = traj.reduced()
    w1, w2, phi1, _ = decompose_arrays(r11, r12)
    assert np.all(w1 - w2 > 10 * 1e-8)
    ov = np.abs(np.einsum("ij,ij->i", phi1[:-1].conj(), phi1[1:]))
    assert ov.min() > 0.999
