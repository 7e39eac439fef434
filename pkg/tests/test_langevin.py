import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from fwmsqueeze.errors import ArgumentError, DataError, NumericalError, RangeError
from fwmsqueeze.langevin import (
    CoefficientProfile,
    MediumParams,
    PhaseSweep,
    ab_phenomenological,
    ab_tabulated,
    dphi_for_phase_model,
    phase_evolution,
    phase_shift_sweep,
    propagate,
    write_coefficients,
)

L = 0.0125


def random_ab(rng, bound=50.0):
    def draw():
        r = bound * math.sqrt(rng.uniform())
        return r * np.exp(1j * rng.uniform(0, 2 * np.pi))

    return draw(), draw()


def wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def expm_oracle(A, B, alpha0, length):
    m = np.array([[A, B], [np.conj(B), np.conj(A)]])
    return (expm(m * length) @ np.array([alpha0, np.conj(alpha0)]))[0]


def ode_oracle(A, B, alpha0, length):
    def rhs(z, y):
        a = y[0] + 1j * y[1]
        d = A * a + B * np.conj(a)
        return [d.real, d.imag]

    sol = solve_ivp(rhs, (0, length), [alpha0.real, alpha0.imag], method="DOP853", rtol=1e-13, atol=1e-15)
    return sol.y[0, -1] + 1j * sol.y[1, -1]


# --- propagation -----------------------------------------------------------

def test_propagate_examples():
    assert propagate(3.0, 0.0, 1.0, 0.5) == pytest.approx(math.exp(1.5), rel=1e-14)
    assert propagate(0.0, 4.0, 1.0, 0.25) == pytest.approx(math.e, rel=1e-14)
    assert propagate(1 + 2j, 3 - 1j, 0.3 + 0.4j, 0.0) == 0.3 + 0.4j


def test_propagate_matches_oracles():
    rng = np.random.default_rng(7)
    for _ in range(50):
        A, B = random_ab(rng, 200.0)
        alpha0 = complex(rng.normal(), rng.normal())
        exact = propagate(A, B, alpha0, L)
        assert abs(exact - expm_oracle(A, B, alpha0, L)) <= 1e-10 * abs(exact)
        assert abs(exact - ode_oracle(A, B, alpha0, L)) <= 1e-8 * abs(exact)


def test_propagate_critical_case():
    # |B| = |Im A| makes the 2x2 generator nilpotent
    A, B = 2.0 + 30j, 30.0
    assert propagate(A, B, 1j, 0.02) == pytest.approx(expm_oracle(A, B, 1j, 0.02), rel=1e-12)


def test_propagate_semigroup():
    rng = np.random.default_rng(11)
    for _ in range(100):
        A, B = random_ab(rng)
        alpha0 = complex(rng.normal(), rng.normal())
        l1, l2 = rng.uniform(0, 0.02, 2)
        two_step = propagate(A, B, propagate(A, B, alpha0, l1), l2)
        one_step = propagate(A, B, alpha0, l1 + l2)
        assert abs(two_step - one_step) <= 1e-10 * max(1.0, abs(one_step))


def test_propagate_vectorized():
    A = np.array([1 + 2j, -3j])
    B = np.array([0.5, 2 + 1j])
    out = propagate(A, B, 1.0, L)
    assert out.shape == (2,)
    assert out[1] == pytest.approx(propagate(A[1], B[1], 1.0, L), rel=1e-15)


def test_propagate_rejects_negative_length():
    with pytest.raises(ArgumentError):
        propagate(1.0, 1.0, 1.0, -1.0)


# --- phase evolution -------------------------------------------------------

def test_phase_evolution_examples():
    assert phase_evolution(2j, 0.0, 0.0, L) == pytest.approx(0.025, abs=1e-14)
    assert phase_evolution(0.0, 17.0, 0.0, L) == 0.0
    assert phase_evolution(5.0, 0.0, 0.3, L) == 0.3


def test_phase_matches_propagation():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        A, B = random_ab(rng)
        phi0 = rng.uniform(-np.pi, np.pi)
        exact = np.angle(propagate(A, B, np.exp(1j * phi0), L))
        assert abs(wrap(phase_evolution(A, B, phi0, L) - exact)) < 1e-6


@settings(max_examples=40)
@given(st.complex_numbers(max_magnitude=50), st.complex_numbers(max_magnitude=50), st.floats(-3, 3))
def test_phase_conjugation_symmetry(A, B, phi0):
    forward = phase_evolution(A, B, phi0, L) - phi0
    mirrored = phase_evolution(np.conj(A), np.conj(B), -phi0, L) + phi0
    assert mirrored == pytest.approx(-forward, abs=1e-10)


def test_step_doubling_convergence():
    rng = np.random.default_rng(5)
    A = np.array([random_ab(rng)[0] for _ in range(100)])
    B = np.array([random_ab(rng)[1] for _ in range(100)])
    phi0 = rng.uniform(-np.pi, np.pi, 100)
    coarse = phase_evolution(A, B, phi0, L, steps=1000)
    fine = phase_evolution(A, B, phi0, L, steps=2000)
    assert np.max(np.abs(fine - coarse)) < 1e-8


def test_phase_evolution_errors():
    with pytest.raises(ArgumentError):
        phase_evolution(1j, 0, 0.0, L, steps=0)
    with pytest.raises(NumericalError, match="z ="):
        phase_evolution(1e308j, 1e308, 0.1, L, steps=10)


# --- phenomenological backend ----------------------------------------------

def test_b_line_shape():
    p = MediumParams.default()
    c, w = p.raman_center, p.raman_width
    _, (b0, b_hi, b_lo) = ab_phenomenological(p, [c, c + w / 2, c - w / 2])
    assert b0.imag == 0.0
    assert abs(b_hi) == pytest.approx(abs(b0) / math.sqrt(2), rel=1e-12)
    assert abs(b_lo) == pytest.approx(abs(b0) / math.sqrt(2), rel=1e-12)
    # (w/2) / ((w/2) - i (w/2)) = (1 + i) / 2
    assert np.angle(b_hi) == pytest.approx(math.pi / 4, abs=1e-12)
    assert np.angle(b_lo) == pytest.approx(-math.pi / 4, abs=1e-12)
    grid = np.linspace(c - 30, c + 30, 601)
    _, B = ab_phenomenological(p, grid)
    assert grid[np.argmax(np.abs(B))] == pytest.approx(c, abs=0.1)


def test_coupling_scale_law():
    p = MediumParams.default()
    assert p.coupling_scale == pytest.approx(1.0, rel=1e-12)
    q = p.with_(optical_depth=500.0, pump_power=400.0, one_photon_detuning=1.6)
    assert q.coupling_scale == pytest.approx(0.25, rel=1e-12)


def test_default_medium_conditions():
    p = MediumParams.default()
    assert (p.one_photon_detuning, p.pump_power, p.optical_depth, p.cell_length) == (0.8, 200.0, 1000.0, 0.0125)


@pytest.mark.parametrize("field", ["cell_length", "raman_width", "optical_depth"])
def test_medium_validation(field):
    with pytest.raises(ArgumentError):
        MediumParams.default(**{field: 0.0})


def test_medium_ini_round_trip():
    p = MediumParams.default(raman_center=12.5)
    assert MediumParams.from_ini_text(p.to_ini_text(header="test")) == p


# --- sweeps ----------------------------------------------------------------

GRID = np.round(np.arange(-30.0, 40.0001, 0.25), 12)


@pytest.fixture(scope="module")
def default_sweep():
    return phase_shift_sweep(MediumParams.default(), GRID)


def test_default_sweep_window(default_sweep):
    shift = default_sweep.shift
    i = int(np.argmax(shift))
    assert 0.25 * np.pi <= shift[i] <= 0.35 * np.pi
    assert 5.0 <= GRID[i] <= 15.0
    outside = (GRID < 0) | (GRID > 20)
    assert np.max(np.abs(shift[outside])) < 0.02 * np.pi


def test_sweep_continuity(default_sweep):
    assert np.max(np.abs(np.diff(default_sweep.phi))) < 0.05


def test_zero_coefficients_sweep():
    profile = CoefficientProfile(np.array([-5.0, 5.0]), np.zeros(2), np.zeros(2))
    sweep = phase_shift_sweep(profile, np.linspace(-5, 5, 11), phi0=0.4, length=L)
    np.testing.assert_array_equal(sweep.phi, 0.4)


def test_sweep_unwraps():
    # 50 rad of rotation per MHz: many full turns across the grid, none of them folded back
    grid = np.linspace(0, 10, 401)
    profile = CoefficientProfile(grid, 1j * 4000 * grid, np.zeros_like(grid))
    sweep = phase_shift_sweep(profile, grid, length=L)
    np.testing.assert_allclose(sweep.phi, 50 * grid, atol=1e-9)


def test_tabulated_requires_length():
    profile = CoefficientProfile(np.array([0.0, 1.0]), np.zeros(2), np.zeros(2))
    with pytest.raises(ArgumentError):
        phase_shift_sweep(profile, [0.5])


def test_tabulated_export_round_trip(tmp_path, default_sweep):
    p = MediumParams.default()
    profile = CoefficientProfile.from_params(p, GRID)
    path = tmp_path / "coeffs.csv"
    write_coefficients(profile, path)
    loaded = ab_tabulated(path)
    np.testing.assert_allclose(loaded.A, profile.A, rtol=1e-9, atol=0)
    np.testing.assert_allclose(loaded.B, profile.B, rtol=1e-9, atol=0)
    sweep = phase_shift_sweep(loaded, GRID, length=p.cell_length)
    assert np.max(np.abs(sweep.phi - default_sweep.phi)) < 1e-9


def test_tabulated_constant(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("# constant\ndelta_mhz,re_A,im_A,re_B,im_B\n-10,0.5,1.5,2.0,-1.0\n10,0.5,1.5,2.0,-1.0\n")
    A, B = ab_tabulated(path).at(np.array([-10.0, -3.3, 7.0]))
    np.testing.assert_allclose(A, 0.5 + 1.5j)
    np.testing.assert_allclose(B, 2.0 - 1.0j)


def test_tabulated_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("delta_mhz,re_A,im_A,re_B,im_B\n0,0,0,0,0\n1,0,0,0,0\n0.5,0,0,0,0\n")
    with pytest.raises(DataError, match="row 4"):
        ab_tabulated(path)
    path.write_text("delta_mhz,re_A,im_A,re_B,im_B\n0,0,0,0,0\n1,0,zero,0,0\n")
    with pytest.raises(DataError, match="row 3"):
        ab_tabulated(path)
    path.write_text("delta_mhz,re_A,im_A,re_B\n0,0,0,0\n")
    with pytest.raises(DataError, match="im_B"):
        ab_tabulated(path)
    with pytest.raises(RangeError):
        CoefficientProfile(np.array([0.0, 1.0]), np.zeros(2), np.zeros(2)).at(2.0)


# --- link to the phase model -----------------------------------------------

def test_dphi_flat_and_coincident(default_sweep):
    flat = PhaseSweep(GRID, np.full(GRID.size, 0.7), 0.7)
    assert dphi_for_phase_model(flat, 3.0, np.array([0.0, 4.0, 9.0])) == pytest.approx(0.0, abs=0)
    assert dphi_for_phase_model(default_sweep, 5.0, 0.0) == 0.0


def test_dphi_default_sweep(default_sweep):
    value = dphi_for_phase_model(default_sweep, -4.0, 14.0)
    assert value == pytest.approx(default_sweep.at(10.0) - default_sweep.at(-18.0))
    assert 0.25 * np.pi <= value <= 0.35 * np.pi


def test_dphi_out_of_range(default_sweep):
    with pytest.raises(RangeError, match="sideband"):
        dphi_for_phase_model(default_sweep, 30.0, 15.0)
