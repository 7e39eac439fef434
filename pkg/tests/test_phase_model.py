import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from fwmsqueeze.core import Curve, NoiseTrace, sideband_sum
from fwmsqueeze.errors import DataError, RangeError
from fwmsqueeze.fixtures import detuning_scan_trace
from fwmsqueeze.phase_model import (
    PhaseResolvedNoise,
    build_phase_resolved,
    compare_phases,
    lock_phase,
    n_locked,
    n_min,
    noise_at_phase,
    scanned_spectrum,
    two_sideband_noise,
)

GRID = np.array([-1.0, 0.0, 1.0])


def pair(lower, upper):
    """Noise with the lower sideband at delta=-1 and the upper one at +1 (omega_a = 1, delta = 0)."""
    (pl, ml), (pu, mu) = lower, upper
    return PhaseResolvedNoise(GRID, np.array([pl, 1.0, pu]), np.array([ml, 0.0, mu]))


def grid_search(p, omega, delta, dphi, n=10_000):
    """Brute-force minimum over phase: a 10^4-point scan, polished by bounded Brent around the best point."""
    phi = np.linspace(0, 2 * np.pi, n, endpoint=False)
    values = two_sideband_noise(p, omega, delta, phi, dphi)
    best = phi[np.argmin(values)]
    step = 2 * np.pi / n
    res = minimize_scalar(
        lambda x: two_sideband_noise(p, omega, delta, x, dphi),
        bounds=(best - step, best + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return min(res.fun, values.min())


sideband = st.tuples(st.floats(0.05, 10.0), st.floats(0.0, 1.0)).map(lambda t: (t[0], t[0] * t[1]))
angle = st.floats(-2 * np.pi, 2 * np.pi)


# --- construction ----------------------------------------------------------

def test_build_from_channels():
    trace = NoiseTrace(np.array([0.0, 1.0]), np.array([1.0, 1.0]), np.array([2.0, 1.0]), 0.0)
    p = build_phase_resolved(trace)
    np.testing.assert_array_equal(p.n_plus, [1.5, 1.0])
    np.testing.assert_array_equal(p.n_minus, [0.5, 0.0])


def test_build_round_trip_on_fixture():
    trace = detuning_scan_trace(analysis_frequency=0.0)
    p = build_phase_resolved(trace)
    np.testing.assert_allclose(p.n_plus + p.n_minus, trace.n_max, rtol=1e-9)
    np.testing.assert_allclose(p.n_plus - p.n_minus, trace.n_min, rtol=1e-9)


def test_invariants_enforced():
    with pytest.raises(DataError):
        PhaseResolvedNoise(GRID, np.array([1.0, 1.0, 1.0]), np.array([0.0, 1.5, 0.0]))
    with pytest.raises(DataError):
        PhaseResolvedNoise(GRID, np.array([1.0, -1.0, 1.0]), np.zeros(3))


# --- single sideband -------------------------------------------------------

@pytest.mark.parametrize("phi,expected", [(0.0, 2.0), (np.pi, 1.0), (np.pi / 2, 1.5)])
def test_noise_at_phase(phi, expected):
    p = pair((1.5, 0.5), (1.5, 0.5))
    assert noise_at_phase(p, -1.0, phi) == pytest.approx(expected, abs=1e-15)


def test_off_grid_detuning():
    p = pair((1.5, 0.5), (1.5, 0.5))
    with pytest.raises(RangeError):
        noise_at_phase(p, 0.5, 0.0)
    with pytest.raises(RangeError, match="upper sideband"):
        two_sideband_noise(p, 1.0, 1.0, 0.0, 0.0)


# --- two sidebands ---------------------------------------------------------

def test_two_sideband_examples():
    assert two_sideband_noise(pair((1.5, 0.5), (1.5, 0.5)), 1.0, 0.0, np.pi, 0.0) == pytest.approx(1.0)
    p = pair((2.0, 1.0), (2.0, 1.0))
    for phi in np.linspace(0, 2 * np.pi, 7):
        assert two_sideband_noise(p, 1.0, 0.0, phi, np.pi) == pytest.approx(2.0, abs=1e-15)
    assert two_sideband_noise(pair((2, 1), (3, 2)), 1.0, 0.0, 0.0, np.pi / 2) == pytest.approx(3.0, abs=1e-15)


def test_n_min_examples():
    m = n_min(pair((2, 1), (3, 2)), 1.0, 0.0, 0.0)
    assert m.noise == pytest.approx(1.0, abs=1e-15)
    assert m.phase == pytest.approx(np.pi, abs=1e-15)
    m = n_min(pair((2, 1), (2, 1)), 1.0, 0.0, np.pi)
    assert m.noise == pytest.approx(2.0, abs=1e-15)
    assert m.degenerate and m.phase == np.pi
    m = n_min(pair((2, 1), (2, 1)), 1.0, 0.0, np.pi / 2)
    assert m.noise == pytest.approx(2 - math.sqrt(2) / 2, abs=1e-15)
    assert m.noise == pytest.approx(1.2929, abs=5e-5)
    for p, dphi in [(pair((2, 1), (3, 2)), 0.0), (pair((2, 1), (2, 1)), np.pi / 2)]:
        assert n_min(p, 1.0, 0.0, dphi).noise == pytest.approx(grid_search(p, 1.0, 0.0, dphi), abs=1e-8)


def test_n_min_matches_grid_search_randomized():
    rng = np.random.default_rng(20240611)
    for _ in range(1000):
        plus = rng.uniform(0.1, 10.0, 2)
        minus = plus * rng.uniform(0.0, 1.0, 2)
        p = pair((plus[0], minus[0]), (plus[1], minus[1]))
        dphi = rng.uniform(-np.pi, np.pi)
        closed = n_min(p, 1.0, 0.0, dphi)
        assert abs(closed.noise - grid_search(p, 1.0, 0.0, dphi)) < 1e-8
        # the returned phase attains the minimum
        assert two_sideband_noise(p, 1.0, 0.0, closed.phase, dphi) == pytest.approx(closed.noise, abs=1e-12)


@given(sideband, sideband, angle, angle)
def test_locked_never_below_minimum(lower, upper, dphi, phi1):
    p = pair(lower, upper)
    assert n_min(p, 1.0, 0.0, dphi).noise <= n_locked(p, 1.0, 0.0, dphi, phi1) + 1e-12


@given(sideband, sideband, angle)
def test_triangle_bounds(lower, upper, dphi):
    p = pair(lower, upper)
    mean = 0.5 * (lower[0] + upper[0])
    value = n_min(p, 1.0, 0.0, dphi).noise
    assert mean - 0.5 * (lower[1] + upper[1]) - 1e-12 <= value <= mean + 1e-12


@given(sideband, sideband, angle)
def test_mirror_symmetry(lower, upper, dphi):
    direct = n_min(pair(lower, upper), 1.0, 0.0, dphi).noise
    mirrored = n_min(pair(upper, lower), 1.0, 0.0, -dphi).noise
    assert direct == pytest.approx(mirrored, abs=1e-12)


# --- lock ------------------------------------------------------------------

def test_lock_phase_examples():
    p = pair((2, 1), (3, 0.5))
    assert lock_phase(p, 0.0, 0.0, lock_omega=1.0) == (pytest.approx(np.pi, abs=1e-15), False)
    phase, degenerate = lock_phase(pair((2, 1), (2, 1)), 0.0, 0.2 * np.pi, lock_omega=1.0)
    assert phase == pytest.approx(0.9 * np.pi, abs=1e-12) and not degenerate
    assert lock_phase(pair((2, 1), (2, 1)), 0.0, np.pi, lock_omega=1.0) == (np.pi, True)


def _fixture_p():
    trace = detuning_scan_trace(analysis_frequency=0.0, span=(-60.0, 60.0))
    return build_phase_resolved(trace)


OMEGA = np.arange(0.0, 30.0001, 0.05)


def test_locked_equals_minimum_at_lock_frequency():
    p = _fixture_p()
    for delta in (-4.0, -20.0, 3.0):
        for dphi in (0.2 * np.pi, -0.7, 2.5):
            phi1, _ = lock_phase(p, delta, dphi, lock_omega=1.0)
            a = n_min(p, 1.0, delta, dphi).noise
            b = n_locked(p, 1.0, delta, dphi, phi1)
            assert abs(a - b) < 1e-12


def test_zero_dphi_locked_equals_minimum_everywhere():
    p = _fixture_p()
    for delta in (-4.0, -20.0):
        c = compare_phases(p, OMEGA, delta, 0.0, lock_omega=1.0)
        lo = n_min(p, OMEGA, delta, 0.0).noise
        locked = n_locked(p, OMEGA, delta, 0.0, c.phi1)
        assert np.max(np.abs(lo - locked)) < 1e-12


def test_zero_dphi_matches_sideband_sum():
    trace = detuning_scan_trace(analysis_frequency=0.0, span=(-60.0, 60.0))
    p = build_phase_resolved(trace)
    g = Curve(trace.grid, trace.n_min)
    for delta in (-4.0, 0.0, 6.0):
        np.testing.assert_allclose(n_min(p, OMEGA, delta, 0.0).noise, sideband_sum(g, OMEGA, delta), rtol=0, atol=1e-12)


def test_fixture_gap_grows_with_frequency():
    p = _fixture_p()
    for delta in (-4.0, -20.0):
        c = compare_phases(p, OMEGA, delta, 0.2 * np.pi, lock_omega=1.0)
        assert np.all(c.gap_db >= -1e-9)
        gap = dict(zip(np.round(c.omega, 6), c.gap_db))
        assert gap[20.0] > gap[2.0]


def test_callable_dphi():
    p = _fixture_p()
    constant = n_min(p, OMEGA, -4.0, 0.3).noise
    via_callable = n_min(p, OMEGA, -4.0, lambda delta, omega: np.full_like(omega, 0.3)).noise
    np.testing.assert_array_equal(constant, via_callable)


def test_scanned_spectrum_bounded_by_minimum():
    p = _fixture_p()
    spec = scanned_spectrum(p, OMEGA, -4.0, 0.2 * np.pi, period=0.5)
    lo = compare_phases(p, OMEGA, -4.0, 0.2 * np.pi).n_min_db
    assert np.all(spec.noise_db >= lo - 1e-12)


def test_lock_needs_sidebands_on_grid():
    p = _fixture_p()
    with pytest.raises(RangeError):
        lock_phase(p, 59.5, 0.0, lock_omega=1.0)
