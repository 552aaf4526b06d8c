import math

import numpy as np
import pytest

from dotphase import (
    CGP,
    DegenerateStart,
    DegenerateState,
    EnvDensityState,
    IntegratorConfig,
    NonUnitWeight,
    NotSaturated,
    PhaseConfig,
    PhaseTrace,
    SystemParams,
    Trajectory,
    accumulate,
    closed_loop_phase,
    closed_period,
    detect_cgp,
    full_phase,
    integrate,
    pancharatnam_phase,
)
from dotphase.phase import mod_2pi, wrap_phase
from dotphase.spectral import decompose_arrays

GAMMA_T = math.pi - math.pi / math.sqrt(2)

# Regression constants at the reference parameters (gamma_l=1, gamma_r=2, s2=0.5, eps0=-2).
# gamma(30): dt=1e-4 gives 7.83123380, dt=1e-5 gives 7.83123380 (stride 10).
GAMMA_30 = 7.8312338
# CGP with t_max=1000: dt=1e-4 gives 14.9943257, dt=5e-4 14.9943224, dt=1e-3 14.9943120.
CGP_REFERENCE = 14.994326
T_SAT_REFERENCE = 501.59


def test_zero_length_trajectory(reference):
    trace = accumulate(integrate(None, reference, IntegratorConfig(t_max=0.0)))
    assert len(trace) == 1
    assert trace.gamma[0] == 0.0


def test_phase_starts_at_zero(reference):
    trace = accumulate(integrate(None, reference, IntegratorConfig(t_max=1.0)))
    assert trace.gamma[0] == 0.0
    assert np.all(np.diff(trace.t) > 0)


def test_accepts_pairs(reference):
    traj = integrate(None, reference, IntegratorConfig(t_max=0.5, sample_stride=50))
    a = accumulate(traj)
    b = accumulate(list(traj))
    np.testing.assert_array_equal(a.gamma, b.gamma)


@pytest.mark.parametrize("dt, tol", [(1e-3, 1e-3), (1e-4, 1e-5)])
def test_closed_cycle(closed, dt, tol):
    traj = integrate(None, closed, IntegratorConfig(dt=dt, t_max=closed_period(closed)))
    assert accumulate(traj).final_gamma == pytest.approx(GAMMA_T, abs=tol)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_repeated_loops_add_up(closed, n):
    traj = integrate(None, closed, IntegratorConfig(dt=1e-3, t_max=n * closed_period(closed)))
    assert accumulate(traj).final_gamma == pytest.approx(n * GAMMA_T, abs=n * 1e-3)


def test_regression_gamma_30(reference):
    g_coarse = accumulate(integrate(None, reference, IntegratorConfig(dt=1e-3, t_max=30.0))).final_gamma
    g_fine = accumulate(integrate(None, reference, IntegratorConfig(dt=5e-4, t_max=30.0))).final_gamma
    assert abs(g_coarse - g_fine) <= 1e-4
    assert g_coarse == pytest.approx(GAMMA_30, abs=1e-4)


def test_regression_cgp_long_run(reference):
    trace = accumulate(integrate(None, reference, IntegratorConfig(dt=1e-3, t_max=1000.0)))
    result = detect_cgp(trace)
    assert isinstance(result, CGP)
    assert result.value == pytest.approx(CGP_REFERENCE, abs=1e-4)
    assert result.t_sat == pytest.approx(T_SAT_REFERENCE, abs=0.05)
    assert trace.frozen_at is not None and trace.frozen_at >= result.t_sat


def test_freeze_holds_phase(reference):
    cfg = PhaseConfig(freeze_gap=0.1)
    trace = accumulate(integrate(None, reference, IntegratorConfig(t_max=200.0, sample_stride=10)), cfg)
    assert trace.frozen_at is not None
    frozen = trace.t >= trace.frozen_at
    assert np.all(trace.gamma[frozen] == trace.gamma[frozen][0])
    gap = 2 * trace.omega1 - 1
    first = int(np.argmax(gap < 0.1))
    assert trace.t[first] == trace.frozen_at


def test_degenerate_start():
    mixed = Trajectory(np.array([0.0, 1.0]), np.tile(EnvDensityState(0.25, 0.25, 0.25, 0.25).to_flat(), (2, 1)))
    with pytest.raises(DegenerateStart):
        accumulate(mixed)


def test_mixed_start_needs_full_phase(closed):
    traj = integrate(EnvDensityState(0.8, 0.0, 0.2, 0.0), closed, IntegratorConfig(t_max=1.0))
    with pytest.raises(NonUnitWeight):
        accumulate(traj)


def test_full_phase_equals_wrapped_accumulation(reference):
    traj = integrate(None, reference, IntegratorConfig(t_max=30.0))
    assert full_phase(traj) == pytest.approx(wrap_phase(accumulate(traj).final_gamma), abs=1e-12)


def test_full_phase_stationary():
    zero = SystemParams(gamma_l=0.0, gamma_r=0.0, s1=0.0, s2=0.0, eps0=0.0)
    assert full_phase(integrate(None, zero, IntegratorConfig(t_max=3.0))) == 0.0


def test_full_phase_closed_cycle(closed):
    traj = integrate(None, closed, IntegratorConfig(t_max=closed_period(closed)))
    assert full_phase(traj) == pytest.approx(GAMMA_T, abs=1e-3)


def test_full_phase_mixed_closed_cycle(closed):
    # Diagonal mixed start: the two eigenvectors pick up opposite phases +-beta,
    # so the result is Arg(w1 e^{i beta} + w2 e^{-i beta}) = atan((w1 - w2) tan beta).
    traj = integrate(EnvDensityState(0.8, 0.0, 0.2, 0.0), closed, IntegratorConfig(t_max=closed_period(closed)))
    beta = closed_loop_phase(closed)
    assert full_phase(traj) == pytest.approx(math.atan(0.6 * math.tan(beta)), abs=1e-5)


def test_full_phase_rejects_degeneracy(reference):
    traj = integrate(None, reference, IntegratorConfig(t_max=800.0, sample_stride=100))
    with pytest.raises(DegenerateState):
        full_phase(traj, PhaseConfig(eps_degen=1e-3, freeze_gap=1e-3))


def test_pancharatnam_is_gauge_invariant(reference):
    traj = integrate(None, reference, IntegratorConfig(t_max=10.0, sample_stride=5))
    r11, r12 = traj.reduced()
    phi = decompose_arrays(r11, r12)[2]
    base = pancharatnam_phase(phi)
    assert base == pytest.approx(wrap_phase(accumulate(traj).final_gamma), abs=1e-12)
    rng = np.random.default_rng(7)
    for _ in range(20):
        gauge = np.exp(1j * rng.uniform(0, 2 * np.pi, len(phi)))
        moved = pancharatnam_phase(phi * gauge[:, None])
        assert abs(wrap_phase(moved - base)) <= 1e-10


def test_wrapping_helpers():
    assert wrap_phase(math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert mod_2pi(-0.5) == pytest.approx(2 * math.pi - 0.5)
    np.testing.assert_allclose(mod_2pi(np.array([7.0, 2.0])), [7.0 - 2 * math.pi, 2.0])


def _trace(t, gamma):
    t = np.asarray(t, dtype=float)
    return PhaseTrace(t=t, bloch=np.zeros((len(t), 3)), omega1=np.ones(len(t)), gamma=np.asarray(gamma, float))


def test_detect_constant_trace():
    res = detect_cgp(_trace(np.arange(0, 20, 0.1), np.full(200, 2.5)))
    assert res == CGP(value=2.5, t_sat=0.0)


def test_detect_step_then_flat():
    t = np.arange(0, 30, 0.01)
    gamma = np.where(t < 10, t, 10.0)
    res = detect_cgp(_trace(t, gamma))
    assert isinstance(res, CGP)
    assert res.value == 10.0
    # the last window still seeing the ramp starts just before t=10
    assert res.t_sat == pytest.approx(10.0, abs=0.011)


def test_detect_needs_a_full_window():
    res = detect_cgp(_trace(np.arange(0, 4, 0.1), np.zeros(40)))
    assert isinstance(res, NotSaturated)


def test_detect_slow_drift_counts_as_saturated():
    # spread over any 5-unit window is 5e-6 < 1e-4
    t = np.arange(0, 50, 0.01)
    res = detect_cgp(_trace(t, 1e-6 * t))
    assert isinstance(res, CGP) and res.t_sat == 0.0


def test_closed_system_never_saturates(closed):
    trace = accumulate(integrate(None, closed, IntegratorConfig(t_max=60.0)))
    res = detect_cgp(trace)
    assert isinstance(res, NotSaturated)
    assert res.last_gamma > 20 * GAMMA_T


def test_window_range_matches_brute_force():
    from dotphase.phase import _window_range

    rng = np.random.default_rng(3)
    v = rng.normal(size=300)
    lo = rng.integers(0, 300, size=100)
    hi = np.minimum(lo + rng.integers(0, 80, size=100), 299)
    expect = [v[a : b + 1].max() - v[a : b + 1].min() for a, b in zip(lo, hi)]
    np.testing.assert_allclose(_window_range(v, lo, hi), expect)


def test_phase_config_validation():
    with pytest.raises(ValueError):
        PhaseConfig(eps_degen=1e-5, freeze_gap=1e-6)
    with pytest.raises(ValueError):
        PhaseConfig(saturation_tol=0.0)
