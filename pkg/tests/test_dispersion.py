import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from felkeldysh.beam import BeamParameters, GaussianScales, OccupationProfile, cold_profile, transition_frequency
from felkeldysh.dispersion import (
    bracketed_root,
    continuum_dispersion_residual,
    gain_sign_map,
    gamma_r,
    gaussian_momentum_distribution,
    im_gamma_gaussian,
    pierce_cubic,
    re_gamma_gaussian,
    solve_pole_cubic,
    solve_threshold,
    sweep_rows,
)
from felkeldysh.errors import ConfigurationError, GridRangeError, RootNotFoundError
from felkeldysh.selfenergy import sigma_r_discrete, sigma_r_gaussian

TWO_PI = 2 * math.pi


def durand_kerner(coeffs, iters=500):
    # independent simultaneous-iteration root finder for a monic polynomial
    coeffs = np.asarray(coeffs, dtype=complex) / coeffs[0]
    n = len(coeffs) - 1
    z = (0.4 + 0.9j) ** np.arange(n)
    for _ in range(iters):
        for i in range(n):
            num = np.polyval(coeffs, z[i])
            den = np.prod([z[i] - z[j] for j in range(n) if j != i])
            z[i] = z[i] - num / den
    return np.sort_complex(z)


def test_gamma_zero_beam_is_free_pole():
    p = BeamParameters(eta=1.0, n_electrons=10.0, omega_eta=3.0)
    empty = OccupationProfile(0, np.zeros(5))
    assert gamma_r(empty, p, 3.0, method="discrete", broadening=0.5) == 0


def test_gamma_gaussian_at_centre():
    p = BeamParameters(eta=1.0, n_electrons=100.0, omega_eta=2.0)
    s = GaussianScales(5.0, 2.0)
    g = gamma_r(s, p, 5.0)
    assert g == complex(100 / TWO_PI * 3.0 + 100 / 4.0, 0.0)


def test_gamma_imag_is_minus_imag_sigma():
    p = BeamParameters(eta=1.0, n_electrons=100.0, omega_eta=2.0)
    s = GaussianScales(5.0, 2.0)
    w = np.linspace(-5, 15, 101)
    assert np.array_equal(gamma_r(s, p, w).imag, -sigma_r_gaussian(p, s, w).imag)
    prof = cold_profile(5)
    assert np.array_equal(gamma_r(prof, p, w, broadening=0.3).imag, -sigma_r_discrete(prof, p, w, 0.3).imag)
    assert np.allclose(re_gamma_gaussian(s, p, w), gamma_r(s, p, w).real, rtol=1e-14)
    assert np.allclose(im_gamma_gaussian(s, p, w), gamma_r(s, p, w).imag, rtol=1e-14, atol=1e-14)


def test_gamma_method_validation():
    p = BeamParameters(eta=1.0, n_electrons=1.0)
    with pytest.raises(ConfigurationError):
        gamma_r(cold_profile(3), p, 1.0, method="gaussian")
    with pytest.raises(ConfigurationError):
        gamma_r(cold_profile(3), p, 1.0, method="discrete")
    with pytest.raises(ConfigurationError):
        gamma_r(GaussianScales(0, 1), p, 1.0, method="magic")


def grid_scan_root(f, lo, hi, n=1_000_001):
    w = np.linspace(lo, hi, n)
    v = f(w)
    idx = np.flatnonzero(np.sign(v[:-1]) != np.sign(v[1:]))
    assert idx.size >= 1
    mid = 0.5 * (lo + hi)
    k = min(idx, key=lambda i: abs(w[i] - mid))
    return w[k] - v[k] * (w[k + 1] - w[k]) / (v[k + 1] - v[k])


def test_threshold_matches_grid_scan():
    p = BeamParameters(eta=1.0, n_electrons=1000.0, omega_eta=49.0)
    s = GaussianScales(50.0, 5.0)
    sol = solve_threshold(s, p, (40.0, 60.0))
    oracle = grid_scan_root(lambda w: re_gamma_gaussian(s, p, w), 40.0, 60.0)
    assert abs(sol.omega_res - oracle) < 1e-6
    assert sol.residual <= 1e-10 * p.n_electrons
    assert abs(re_gamma_gaussian(s, p, sol.omega_res)) <= 1e-10 * p.n_electrons
    assert sol.y_res == pytest.approx(s.y(sol.omega_res), rel=1e-15)
    assert sol.im_gamma_at_res == pytest.approx(1000 * math.sqrt(math.pi) * sol.y_res * math.exp(-sol.y_res**2) / 25, rel=1e-13)
    assert sol.growing == (sol.im_gamma_at_res < 0)
    assert set(sol.report()) >= {"omega_res", "y_res", "im_gamma_at_res", "growing", "residual", "iterations"}


def test_threshold_beamless_limit():
    p = BeamParameters(eta=1.0, n_electrons=100.0, omega_eta=7.25)
    sol = solve_threshold(GaussianScales(7.0, 1e12), p, (0.0, 20.0))
    assert sol.omega_res == pytest.approx(7.25, abs=1e-10)


def test_threshold_at_zero_detuning_meets_residual():
    p = BeamParameters(eta=1.0, n_electrons=500.0, omega_eta=30.0)
    s = GaussianScales(30.0, 3.0)
    sol = solve_threshold(s, p, (20.0, 40.0))
    assert sol.residual <= 1e-10 * p.n_electrons
    assert sol.omega_res != 30.0


@settings(max_examples=40, deadline=None)
@given(st.floats(1.0, 1e5), st.floats(0.5, 20.0), st.floats(-3.0, 3.0))
def test_threshold_residual_property(n, sigma, detune):
    p = BeamParameters(eta=1.0, n_electrons=n, omega_eta=50.0 + detune)
    s = GaussianScales(50.0, sigma)
    try:
        sol = solve_threshold(s, p, (50.0 - 40.0, 50.0 + 40.0))
    except RootNotFoundError:
        return
    assert abs(re_gamma_gaussian(s, p, sol.omega_res)) <= 1e-10 * n


def test_threshold_no_sign_change():
    p = BeamParameters(eta=1.0, n_electrons=10.0, omega_eta=0.0)
    with pytest.raises(RootNotFoundError):
        solve_threshold(GaussianScales(50.0, 5.0), p, (100.0, 120.0))
    with pytest.raises(ConfigurationError):
        solve_threshold(GaussianScales(50.0, 5.0), p, (5.0, 5.0))


def test_threshold_flags_multiple_roots():
    # strong coupling bends Re Gamma into three crossings
    p = BeamParameters(eta=1.0, n_electrons=1.0, omega_eta=50.0)
    s = GaussianScales(50.0, 0.5)
    w = np.linspace(40, 60, 200001)
    v = re_gamma_gaussian(s, p, w)
    crossings = np.count_nonzero(np.sign(v[:-1]) != np.sign(v[1:]))
    assert crossings == 3
    sol = solve_threshold(s, p, (40.0, 60.0))
    assert sol.multiple_roots
    k = np.flatnonzero(np.sign(v[:-1]) != np.sign(v[1:]))
    roots = w[k] - v[k] * (w[k + 1] - w[k]) / (v[k + 1] - v[k])
    assert np.min(np.abs(roots - sol.omega_res)) < 1e-6


def test_bracketed_root_exact_zero_on_grid():
    root, resid, _, _ = bracketed_root(lambda x: x - 1.0, 0.0, 2.0, 1e-12, scan_points=3)
    assert root == 1.0 and resid == 0.0


def test_gain_sign_map():
    p = BeamParameters(eta=1.0, n_electrons=10.0)
    s = GaussianScales(10.0, 2.0)
    grid = np.linspace(0, 20, 401)
    for (w, growing), y in zip(gain_sign_map(s, p, grid), s.y(grid)):
        assert growing == (y < 0)
    assert gain_sign_map(s, p, [s.omega(-1.0)])[0][1] is True
    assert gain_sign_map(s, p, [s.omega(1.0)])[0][1] is False


@pytest.mark.parametrize("y", [-2.0, -0.7, 0.3, 1.5])
def test_gain_suppression_by_width(y):
    p = BeamParameters(eta=1.0, n_electrons=10.0)
    a, b = GaussianScales(10.0, 2.0), GaussianScales(10.0, 4.0)
    ratio = im_gamma_gaussian(b, p, b.omega(y)) / im_gamma_gaussian(a, p, a.omega(y))
    assert ratio == pytest.approx(0.25, rel=1e-12)


def test_sweep_rows():
    p = BeamParameters(eta=1.0, n_electrons=10.0)
    s = GaussianScales(10.0, 2.0)
    rows = sweep_rows([9.0, 11.0], s, p)
    assert rows[0][3] == 1 and rows[1][3] == 0


def test_pierce_degenerate_surrogate():
    p = BeamParameters(eta=1.0, n_electrons=1.0)
    cub = pierce_cubic(100, p, degenerate=True)
    centre = transition_frequency(100, p)
    expected = sorted((centre + TWO_PI ** (1 / 3) * np.exp(2j * math.pi * k / 3) for k in range(3)), key=lambda z: (z.imag, z.real))
    assert np.allclose(cub.roots, expected, rtol=0, atol=1e-12)
    assert cub.growth_rate == pytest.approx(math.sqrt(3) / 2 * TWO_PI ** (1 / 3), abs=1e-12)
    assert max(cub.residuals) <= 1e-10


def test_pierce_matches_durand_kerner():
    p = BeamParameters(eta=1.0, n_electrons=1.0, omega_eta=100.5)
    cub = pierce_cubic(100, p)
    a, b, c = cub.centers
    coeffs = [1.0, -(a + b + c), a * b + b * c + c * a, -a * b * c - TWO_PI]
    oracle = durand_kerner(coeffs)
    for z in cub.roots:
        assert np.min(np.abs(oracle - z)) < 1e-10
    assert max(cub.residuals) <= 1e-10
    assert cub.unstable_root == max(cub.roots, key=lambda z: z.imag)
    assert cub.rho_eff == pytest.approx((1.0 / 100) ** (1 / 3), rel=1e-15)


def test_pierce_poles_match_cold_beam_self_energy():
    # every cubic root is a zero of Gamma^R built from the cold-beam two-pole form
    p = BeamParameters(eta=1.0, n_electrons=3.0, omega_eta=20.0)
    m0 = 20
    cub = pierce_cubic(m0, p)
    for z in cub.roots:
        sigma = p.n_electrons * p.eta * (1 / (z - transition_frequency(m0, p)) - 1 / (z - transition_frequency(m0 - 1, p)))
        gamma = p.n_electrons / TWO_PI * (z - p.omega_eta) - sigma
        assert abs(gamma) < 1e-9 * p.n_electrons


def test_pierce_decoupled_limit():
    p = BeamParameters(eta=1.0, n_electrons=1.0, omega_eta=3.3)
    cub = pierce_cubic(10, p, rhs=0.0)
    assert cub.unstable_root is None
    assert np.allclose(sorted(z.real for z in cub.roots), sorted(cub.centers), atol=1e-12)
    assert all(abs(z.imag) < 1e-12 for z in cub.roots)


def test_pierce_growth_invariant_under_n_and_eta():
    base = pierce_cubic(100, BeamParameters(1.0, 1.0), degenerate=True).growth_rate
    assert pierce_cubic(100, BeamParameters(1.0, 10.0), degenerate=True).growth_rate == pytest.approx(base, abs=1e-9)
    # eta -> 3 eta with m0 rescaled so that Omega_{m0} is unchanged
    assert pierce_cubic(301, BeamParameters(3.0, 1.0), degenerate=True).growth_rate == pytest.approx(base, abs=1e-9)
    # outside the surrogate the rate is N-independent but not eta-independent
    p = BeamParameters(1.0, 1.0, omega_eta=100.5)
    g1 = pierce_cubic(100, p).growth_rate
    assert pierce_cubic(100, BeamParameters(1.0, 1e4, omega_eta=100.5)).growth_rate == pytest.approx(g1, abs=1e-12)


def test_solve_pole_cubic_large_offsets():
    roots, res = solve_pole_cubic((1e6, 1e6 + 1.0, 1e6 + 2.0), TWO_PI)
    assert max(res) < 1e-10
    for z in roots:
        assert abs((z - 1e6) * (z - 1e6 - 1) * (z - 1e6 - 2) - TWO_PI) < 1e-6


def test_continuum_flat_distribution():
    p = BeamParameters(eta=1.0, n_electrons=1.0, omega_eta=2.0)
    pgrid = np.linspace(0, 20, 2001)
    f = np.full_like(pgrid, 0.3)
    assert continuum_dispersion_residual(pgrid, f, p, 7.0) == pytest.approx((7.0 - 2.0) / TWO_PI, abs=1e-14)


@pytest.mark.parametrize("eta,n,o,s,w", [(1.0, 1000.0, 50.0, 5.0, 49.0), (0.5, 200.0, 80.0, 4.0, 79.0)])
def test_continuum_root_matches_threshold(eta, n, o, s, w):
    p = BeamParameters(eta, n, w)
    scales = GaussianScales(o, s)
    pgrid, f = gaussian_momentum_distribution(scales, p, 8001)
    sol = solve_threshold(scales, p, (o - 10, o + 10))
    root, _, _, _ = bracketed_root(lambda x: continuum_dispersion_residual(pgrid, f, p, x).real, o - 10, o + 10, 1e-12, scan_points=401)
    assert abs(root - sol.omega_res) < 0.02 * s
    resid = continuum_dispersion_residual(pgrid, f, p, sol.omega_res)
    assert resid.imag == pytest.approx(gamma_r(scales, p, sol.omega_res).imag / n, rel=1e-4)


def test_continuum_reflection():
    # mirroring f about pbar leaves the principal-value term unchanged at
    # mirrored frequencies and flips the resonant term
    p = BeamParameters(eta=1.0, n_electrons=1.0, omega_eta=0.0)
    pgrid = np.linspace(0, 20, 4001)
    pbar = 10.0
    f = np.exp(-((pgrid - 8.0) ** 2) / 2) * (1 + 0.3 * np.sin(pgrid))
    f_ref = np.interp(2 * pbar - pgrid, pgrid, f)
    for w in (7.0, 8.3, 9.1):
        r = continuum_dispersion_residual(pgrid, f, p, w)
        r_ref = continuum_dispersion_residual(pgrid, f_ref, p, 2 * pbar - w)
        pv, pv_ref = r.real - w / TWO_PI, r_ref.real - (2 * pbar - w) / TWO_PI
        assert pv_ref == pytest.approx(pv, rel=1e-6, abs=1e-9)
        assert r_ref.imag == pytest.approx(-r.imag, rel=1e-6, abs=1e-9)


def test_continuum_grid_range():
    p = BeamParameters(eta=1.0, n_electrons=1.0)
    pgrid = np.linspace(0, 1, 101)
    with pytest.raises(GridRangeError):
        continuum_dispersion_residual(pgrid, np.ones_like(pgrid), p, 5.0)
